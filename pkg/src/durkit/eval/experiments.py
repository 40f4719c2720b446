"""Multi-seed experiment runners: size/family bench, ablations, prompt mismatch."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Sequence

import numpy as np

from ..baselines.ratio import RatioScaleCalibration, ratio_scale_predict
from ..checkpoint import Checkpoint
from ..data import DatasetManifest
from ..predictor import Predictor
from .evaluate import EvalReport, aggregate, evaluate, score_predictions
from .training import TrainConfig, train_model

log = logging.getLogger(__name__)

ABLATION_ROWS = (
    ("DurFormer", {}),
    ("w/o Attribute Encoder", {"use_attribute_encoder": False}),
    ("w/o Semantic Encoder", {"use_semantic_fusion": False}),
    ("w/o both", {"use_attribute_encoder": False, "use_semantic_fusion": False}),
)


@dataclass
class RunSpec:
    family: str
    size: str = "S"
    method: str | None = None
    overrides: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.method or f"{self.family}-{self.size}"


@dataclass
class SeedRun:
    report: EvalReport
    checkpoint: Checkpoint
    losses: list


def _one_seed(spec: RunSpec, manifest: DatasetManifest, train: TrainConfig, seed: int, split: str,
              semantic: str, config_hash: str) -> SeedRun:
    result = train_model(spec.family, manifest, train, seed=seed, size=spec.size, overrides=spec.overrides or None,
                         semantic=semantic, config_hash=config_hash, method=spec.name)
    report = evaluate(result.checkpoint, manifest.split(split), seed=seed, split=split, method=spec.name)
    log.info("%s seed %d: %s MSE %.4f", spec.name, seed, split, report.per_seed_mse[0])
    return SeedRun(report, result.checkpoint, result.losses)


def run_matrix(specs: Sequence[RunSpec], manifest: DatasetManifest, train: TrainConfig, split: str = "test",
               semantic: str = "hash", config_hash: str = "", jobs: int = 1) -> dict[str, list[SeedRun]]:
    """Train and evaluate every spec under every seed in ``train.seeds``.

    Runs are independent; with ``jobs > 1`` they execute in worker
    processes, and results are still collected in submission order.
    """
    if not manifest.split(split):
        raise ValueError(f"evaluation split {split!r} is empty")
    tasks = [(spec, seed) for spec in specs for seed in train.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=get_context("spawn")) as pool:
            futures = [pool.submit(_one_seed, s, manifest, train, seed, split, semantic, config_hash)
                       for s, seed in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_one_seed(s, manifest, train, seed, split, semantic, config_hash) for s, seed in tasks]
    out: dict[str, list[SeedRun]] = {}
    for (spec, _), run in zip(tasks, results):
        out.setdefault(spec.name, []).append(run)
    return out


def summarize(runs: dict[str, list[SeedRun]]) -> list[EvalReport]:
    return [aggregate([r.report for r in group]) for group in runs.values()]


def bench(manifest: DatasetManifest, train: TrainConfig, families: Sequence[str] = ("durformer", "regressor"),
          sizes: Sequence[str] = ("S",), split: str = "test", semantic: str = "hash", config_hash: str = "",
          jobs: int = 1) -> list[EvalReport]:
    """Family x size comparison; ``ratio`` has no sizes and runs once."""
    specs = []
    for fam in families:
        for size in (sizes if fam != "ratio" else sizes[:1]):
            specs.append(RunSpec(fam, size, method="ratio" if fam == "ratio" else None))
    return summarize(run_matrix(specs, manifest, train, split, semantic, config_hash, jobs))


def ablation_specs(size: str = "S", base_overrides: dict | None = None) -> list[RunSpec]:
    return [RunSpec("durformer", size, name, {**(base_overrides or {}), **toggles}) for name, toggles in ABLATION_ROWS]


def run_ablation(manifest: DatasetManifest, train: TrainConfig, size: str = "S", split: str = "test",
                 semantic: str = "hash", config_hash: str = "", jobs: int = 1,
                 base_overrides: dict | None = None) -> list[EvalReport]:
    """Four rows: full model, without attributes, without semantics, without both."""
    runs = run_matrix(ablation_specs(size, base_overrides), manifest, train, split, semantic, config_hash, jobs)
    return summarize(runs)


@dataclass
class MismatchResult:
    durformer: EvalReport
    ratio: EvalReport
    prompts: list[str]


def pick_mismatched_prompts(targets, pool, seed: int = 0) -> list:
    """For every target, a random pool utterance whose speed level differs."""
    rng = np.random.default_rng(seed)
    by_level: dict[int, list] = {}
    for r in pool:
        by_level.setdefault(r.speed_level, []).append(r)
    prompts = []
    for t in targets:
        candidates = [r for lvl, rs in sorted(by_level.items()) if lvl != t.speed_level for r in rs]
        if not candidates:
            raise ValueError("prompt pool has no utterance with a different speed level")
        prompts.append(candidates[int(rng.integers(len(candidates)))])
    return prompts


def prompt_mismatch(checkpoints: Sequence[Checkpoint], manifest: DatasetManifest, split: str = "test",
                    seed: int = 0) -> MismatchResult:
    """Ratio-Scale calibrated on a speed-mismatched prompt vs DurFormer.

    Each target utterance gets a prompt from the training split with a
    different speed level.  Ratio-Scale scales the prompt's frames/token
    to the target length; DurFormer predicts from the target's own text
    and conditions, independent of the prompt.  Both are scored on the
    same targets; DurFormer contributes one seed per checkpoint.
    """
    targets = manifest.split(split)
    prompts = pick_mismatched_prompts(targets, manifest.split("train"), seed)
    ratio_pred = [ratio_scale_predict(RatioScaleCalibration(len(p.phonemes), p.num_frames), len(t.phonemes)).as_array()
                  for t, p in zip(targets, prompts)]
    mse, evar, errors = score_predictions([t.durations for t in targets], ratio_pred)
    ratio = EvalReport("Ratio-Scale", "ratio", 0, split, [seed], [mse], [evar], errors=[errors])
    df_reports = [evaluate(ck, targets, split=split, method="DurFormer") for ck in checkpoints]
    return MismatchResult(aggregate(df_reports), ratio, [p.id for p in prompts])
