"""``durkit`` command-line tool.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unreadable or inconsistent inputs), 3 numerical failure during training.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .checkpoint import Checkpoint
from .config import ConfigError, RunConfig, load_config
from .data import DatasetManifest, ManifestError, generate_synthetic, load_manifest, save_manifest
from .eval import (EvalReport, NumericalError, bench, emit_report, evaluate, format_table, load_csv,
                   run_ablation, train_model)
from .frontend import Lexicon, ingest_textgrid_dir, text_to_phonemes
from .model import parse_mode
from .predictor import Predictor

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("durkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; durkit reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="durkit", description="Attribute-conditioned phoneme-duration modeling.")
    p.add_argument("--config", help="INI config file (default: $DURKIT_CONFIG)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value; repeatable")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("prepare", help="build a dataset manifest")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--synthetic", action="store_true", help="generate from the [data] config section")
    src.add_argument("--textgrid", metavar="DIR", help="directory of forced-alignment TextGrids")
    s.add_argument("--lexicon", help="pronunciation dictionary for --textgrid")
    s.add_argument("--scenes", help="TSV of utterance id and scene name for --textgrid")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("train", help="train one model")
    s.add_argument("manifest")
    s.add_argument("-o", "--output", required=True, help="checkpoint path (.safetensors)")
    s.add_argument("--family", help="durformer, regressor, flowmatch or ratio")
    s.add_argument("--size", help="S or L")
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("eval", help="score checkpoints on a manifest split")
    s.add_argument("manifest")
    s.add_argument("checkpoints", nargs="+")
    s.add_argument("--split")
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.add_argument("-o", "--output")

    s = sub.add_parser("predict", help="predict durations for one text")
    s.add_argument("checkpoint")
    s.add_argument("text")
    s.add_argument("--speed", type=int, default=2, help="speed level 0 (very slow) .. 4 (very fast)")
    s.add_argument("--scene", default="0", help="scene name or index")
    s.add_argument("--mode", default="mean", help="mean, sample or rescale:T")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("bench", help="train and evaluate families x sizes over all seeds")
    s.add_argument("manifest")
    s.add_argument("--families", type=_csv_list, default=["durformer", "regressor"])
    s.add_argument("--sizes", type=_csv_list, default=["S"])
    s.add_argument("--jobs", type=int)
    s.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("ablate", help="four-row attribute/semantic ablation")
    s.add_argument("manifest")
    s.add_argument("--size")
    s.add_argument("--jobs", type=int)
    s.add_argument("--out", help="output directory")

    s = sub.add_parser("plot", help="render a per-seed CSV report")
    s.add_argument("csv")
    s.add_argument("--format", choices=("svg", "text", "csv"), default="svg")
    s.add_argument("-o", "--output")
    return p


def _manifest(path: str) -> DatasetManifest:
    try:
        return load_manifest(path)
    except FileNotFoundError:
        raise ManifestError(f"{path}: no such file") from None


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_prepare(args, cfg: RunConfig) -> None:
    if args.synthetic:
        manifest = generate_synthetic(cfg.data)
    else:
        lexicon = Lexicon.from_file(args.lexicon) if args.lexicon else None
        scenes = None
        if args.scenes:
            scenes = dict(line.rstrip("\n").split("\t", 1) for line in
                          Path(args.scenes).read_text(encoding="utf-8").splitlines() if line.strip())
        records, quantizer, lex = ingest_textgrid_dir(args.textgrid, lexicon, scenes,
                                                      split_fractions=cfg.data.split_fractions, seed=cfg.data.seed)
        manifest = DatasetManifest(records, lex, cfg.data.scene_names,
                                   {"source": str(args.textgrid), "speed_boundaries": list(quantizer.boundaries)})
    save_manifest(manifest, args.output, {"config_hash": cfg.hash})
    for split, n in manifest.counts().items():
        print(f"{split}\t{n}")


def cmd_train(args, cfg: RunConfig) -> None:
    family = args.family or cfg.family
    size = args.size or cfg.size
    if args.family and args.family != cfg.family and cfg.model:
        raise UsageError("[model] overrides in the config belong to a different family than --family")
    result = train_model(family, _manifest(args.manifest), cfg.train, seed=args.seed, size=size,
                         overrides=cfg.model or None, semantic=cfg.semantic, config_hash=cfg.hash)
    result.checkpoint.save(args.output)
    last = f"{result.losses[-1][1]:.4f}" if result.losses else "n/a"
    print(f"{result.checkpoint.metadata['method']} seed {args.seed}: {cfg.train.steps} steps, "
          f"final loss {last}, {result.checkpoint.metadata['params']} params -> {args.output}")


def cmd_eval(args, cfg: RunConfig) -> None:
    manifest = _manifest(args.manifest)
    split = args.split or cfg.split
    records = manifest.split(split)
    reports: list[EvalReport] = []
    for path in args.checkpoints:
        predictor = Predictor(Checkpoint.load(path))
        if predictor.meta.get("corpus_hash") not in (None, manifest.hash):
            log.warning("%s was trained on a different corpus", path)
        reports.append(evaluate(predictor, records, split=split))
    out = format_table(reports, extra=("E-Var", "Params")) if args.format == "text" else emit_report(reports, "csv")
    _write(out, args.output)


def _parse_scene(value: str):
    return int(value) if value.isdigit() else value


def cmd_predict(args, cfg: RunConfig) -> None:
    try:
        name, total = parse_mode(args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    predictor = Predictor(Checkpoint.load(args.checkpoint))
    if not 0 <= args.speed <= 4:
        raise UsageError(f"--speed must be in 0..4, got {args.speed}")
    try:
        d = predictor.predict_text(args.text, args.speed, _parse_scene(args.scene), args.mode, args.seed)
    except ValueError as exc:
        if name == "rescale" or "scene" in str(exc) or "mode" in str(exc):
            raise UsageError(str(exc)) from None
        raise
    phon = text_to_phonemes(args.text, predictor.lexicon).tokens
    if args.json:
        print(json.dumps({"phonemes": list(phon), "durations": [int(x) for x in d], "total": int(sum(d))}))
    else:
        for x in d:
            print(int(x))
        print(f"total {int(sum(d))}")


def _emit_all(reports, out: Path, stem: str, cfg: RunConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    emit_report(reports, "csv", out / f"{stem}.csv")
    (out / f"{stem}.txt").write_text(format_table(reports, extra=("E-Var", "Params")), encoding="utf-8")
    emit_report(reports, "svg", out / f"{stem}.svg")
    doc = {"config_hash": cfg.hash, "config": cfg.to_dict(), "reports": [r.to_dict() for r in reports]}
    (out / f"{stem}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def cmd_bench(args, cfg: RunConfig) -> None:
    reports = bench(_manifest(args.manifest), cfg.train, args.families, args.sizes, cfg.split, cfg.semantic,
                    cfg.hash, args.jobs or cfg.jobs)
    _emit_all(reports, Path(args.out), "bench", cfg)
    sys.stdout.write(format_table(reports, extra=("Params",)))


def cmd_ablate(args, cfg: RunConfig) -> None:
    reports = run_ablation(_manifest(args.manifest), cfg.train, args.size or cfg.size, cfg.split, cfg.semantic,
                           cfg.hash, args.jobs or cfg.jobs, cfg.model or None)
    if args.out:
        _emit_all(reports, Path(args.out), "ablation", cfg)
    sys.stdout.write(format_table(reports))


def cmd_plot(args, cfg: RunConfig) -> None:
    try:
        reports = load_csv(args.csv)
    except FileNotFoundError:
        raise ManifestError(f"{args.csv}: no such file") from None
    _write(emit_report(reports, args.format), args.output)


COMMANDS = {"prepare": cmd_prepare, "train": cmd_train, "eval": cmd_eval, "predict": cmd_predict,
            "bench": cmd_bench, "ablate": cmd_ablate, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.overrides)
        COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"durkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"durkit: numerical failure: {exc}", file=sys.stderr)
        print(json.dumps(exc.snapshot, sort_keys=True), file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        print(f"durkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
