import json

import pytest
import torch

from durkit.cli import main
from durkit.config import ConfigError, load_config
from durkit.families import FAMILIES
from durkit.frontend import serialize_textgrid

FAST = ["--set", "train.steps=20", "--set", "train.batch_size=8", "--set", "train.seeds=0,1",
        "--set", "train.warmup_steps=2"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["--set", "data.num_utterances=100", "--set", "data.num_words=60",
                 "prepare", "--synthetic", "-o", str(d / "m.jsonl")]) == 0
    assert main(FAST + ["train", str(d / "m.jsonl"), "-o", str(d / "df.safetensors")]) == 0
    return d


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestPrepare:
    def test_synthetic_line_count(self, workdir):
        assert len((workdir / "m.jsonl").read_text().splitlines()) == 101

    def test_single_textgrid(self, tmp_path, capsys):
        tg = tmp_path / "tg"
        tg.mkdir()
        (tg / "u1.TextGrid").write_text(serialize_textgrid([("n", 0.0, 0.12), ("i", 0.12, 0.3)]))
        code, out, _ = run(capsys, ["--set", "data.split_fractions=1,0,0", "prepare", "--textgrid", str(tg),
                                    "-o", str(tmp_path / "m.jsonl")])
        assert code == 0 and "train\t1" in out
        assert len((tmp_path / "m.jsonl").read_text().splitlines()) == 2

    def test_malformed_textgrid(self, tmp_path, capsys):
        (tmp_path / "bad.TextGrid").write_text("File type = \"ooTextFile\"\ngarbage\n")
        code, _, err = run(capsys, ["prepare", "--textgrid", str(tmp_path), "-o", str(tmp_path / "m.jsonl")])
        assert code == 2 and "bad.TextGrid" in err


class TestPredict:
    def test_mean_is_repeatable(self, workdir, capsys):
        argv = ["predict", str(workdir / "df.safetensors"), "ba da", "--speed", "1", "--scene", "casual"]
        first = run(capsys, argv)
        assert first[0] == 0 and first == run(capsys, argv)
        lines = first[1].splitlines()
        assert lines[-1] == f"total {sum(int(x) for x in lines[:-1])}"

    def test_sample_is_seeded(self, workdir, capsys):
        argv = ["predict", str(workdir / "df.safetensors"), "ba da ni", "--mode", "sample", "--seed", "7", "--json"]
        a, b = run(capsys, argv), run(capsys, argv)
        assert a == b
        doc = json.loads(a[1])
        assert doc["total"] == sum(doc["durations"]) and len(doc["durations"]) == len(doc["phonemes"])

    def test_rescale(self, workdir, capsys):
        code, out, _ = run(capsys, ["predict", str(workdir / "df.safetensors"), "ba", "--mode", "rescale:40"])
        assert code == 0 and out.splitlines()[-1] == "total 40"

    def test_rescale_below_phoneme_count(self, workdir, capsys):
        code, _, err = run(capsys, ["predict", str(workdir / "df.safetensors"), "ba da", "--mode", "rescale:1"])
        assert code == 1 and "below the phoneme count" in err

    def test_bad_mode_and_scene(self, workdir, capsys):
        assert run(capsys, ["predict", str(workdir / "df.safetensors"), "ba", "--mode", "fast"])[0] == 1
        assert run(capsys, ["predict", str(workdir / "df.safetensors"), "ba", "--scene", "party"])[0] == 1


class TestEval:
    def test_text_table(self, workdir, capsys):
        code, out, _ = run(capsys, ["eval", str(workdir / "m.jsonl"), str(workdir / "df.safetensors")])
        assert code == 0 and out.split()[:6] == ["Method", "MSE-Avg", "MSE-Min", "MSE-Max", "E-Var", "Params"]

    def test_schema_mismatch_refused(self, workdir, tmp_path, capsys):
        from durkit.checkpoint import Checkpoint
        ck = Checkpoint.load(workdir / "df.safetensors")
        ck.metadata["data_schema_version"] = 99
        ck.save(tmp_path / "old.safetensors")
        code, _, err = run(capsys, ["eval", str(workdir / "m.jsonl"), str(tmp_path / "old.safetensors")])
        assert code == 2 and "schema version" in err

    def test_checkpoint_embeds_config_hash(self, workdir):
        from durkit.checkpoint import Checkpoint
        meta = Checkpoint.load(workdir / "df.safetensors").metadata
        assert meta["config_hash"] == load_config(None, FAST[1::2]).hash


def test_bench_ablate_plot(workdir, tmp_path, capsys):
    code, out, _ = run(capsys, FAST + ["bench", str(workdir / "m.jsonl"), "--families", "durformer,regressor,ratio",
                                       "--out", str(tmp_path / "b")])
    assert code == 0 and "durformer-S" in out and "ratio" in out
    csv_text = (tmp_path / "b" / "bench.csv").read_text()
    assert len(csv_text.splitlines()) == 1 + 3 * 2
    assert json.loads((tmp_path / "b" / "bench.json").read_text())["config_hash"]

    code, _, _ = run(capsys, ["plot", str(tmp_path / "b" / "bench.csv"), "-o", str(tmp_path / "p.svg")])
    svg = (tmp_path / "p.svg").read_text()
    assert code == 0 and all(svg.count(f"<!-- {m} -->") == 1 for m in ("durformer-S", "regressor-S", "ratio"))

    code, out, _ = run(capsys, FAST + ["--set", "train.seeds=0", "ablate", str(workdir / "m.jsonl")])
    rows = out.splitlines()[2:]
    assert code == 0 and len(rows) == 4 and rows[3].startswith("w/o both")


def test_nan_exit_code(workdir, tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(type(FAMILIES["durformer"]), "loss", lambda *a: torch.tensor(float("nan")))
    code, _, err = run(capsys, FAST + ["train", str(workdir / "m.jsonl"), "-o", str(tmp_path / "x.safetensors")])
    assert code == 3 and '"step": 0' in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nosuch"])
    assert exc.value.code == 1
    assert run(capsys, ["--set", "model.layers=3", "plot", "x.csv"])[0] == 1


class TestConfig:
    def test_layering(self, tmp_path, monkeypatch):
        ini = tmp_path / "run.ini"
        ini.write_text("[train]\nsteps = 40\nseeds = 0, 1, 2\n[model]\nnum_semantic_tokens = 8\n"
                       "[data]\nsemantic_strength = 0.2\n")
        cfg = load_config(ini, ["train.steps=7"])
        assert cfg.train.steps == 7 and cfg.train.seeds == (0, 1, 2)
        assert cfg.model == {"num_semantic_tokens": 8} and cfg.data.semantic_strength == 0.2
        monkeypatch.setenv("DURKIT_CONFIG", str(ini))
        assert load_config().train.steps == 40

    def test_hash_tracks_results_not_scheduling(self):
        base = load_config()
        assert load_config(None, ["eval.jobs=4"]).hash == base.hash
        assert load_config(None, ["train.steps=9"]).hash != base.hash

    @pytest.mark.parametrize("item", ["train.nope=1", "gpu.count=2", "model.heads=3", "train.steps=abc",
                                      "steps=3", "data.min_len=0", "model.size=XL"])
    def test_rejected(self, item):
        with pytest.raises(ConfigError):
            load_config(None, [item])
