import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from durkit.align import mse_metric
from durkit.data import (ManifestError, SyntheticSpec, expected_durations, generate_synthetic, load_manifest,
                         mood_cue, read_manifest_header, save_manifest)
from durkit.semantic import (FileExtractor, HashingExtractor, SemanticError, available, lookup,
                             save_embedding_store)


def small(**kw):
    return SyntheticSpec(**{"num_utterances": 60, "num_words": 40, "seed": 3, **kw})


class TestSynthetic:
    def test_deterministic(self):
        assert generate_synthetic(small()) == generate_synthetic(small())
        assert generate_synthetic(small()).hash != generate_synthetic(small(seed=4)).hash

    def test_lengths_and_splits(self):
        m = generate_synthetic(small(min_len=5, max_len=12))
        assert all(1 <= len(r.phonemes) <= 12 for r in m.records)
        assert m.counts() == {"train": 48, "dev": 6, "test": 6}

    def test_noiseless_is_the_rounded_law(self):
        spec = small(noise_std=0.0)
        m = generate_synthetic(spec)
        base = m.meta["base_durations"]
        for r in m.records:
            mean = expected_durations(r.phonemes, base, spec, r.speed_level, r.scene_id, r.text)
            assert r.durations == tuple(np.maximum(1, np.floor(mean + 0.5)).astype(int).tolist())

    def test_faster_levels_are_shorter(self):
        m = generate_synthetic(small(num_utterances=400))
        rate = {lvl: np.mean([r.num_frames / len(r.phonemes) for r in m.records if r.speed_level == lvl])
                for lvl in range(5)}
        assert all(rate[i] > rate[i + 1] for i in range(4))

    def test_oracle_beats_any_constant(self):
        # the generating law is the Bayes predictor up to rounding noise
        spec = small(num_utterances=200)
        m = generate_synthetic(spec)
        base = m.meta["base_durations"]
        oracle, const = [], []
        c = np.mean([d for r in m.records for d in r.durations])
        for r in m.records:
            mean = expected_durations(r.phonemes, base, spec, r.speed_level, r.scene_id, r.text)
            oracle.append(mse_metric(r.durations, mean))
            const.append(mse_metric(r.durations, np.full(len(r.phonemes), c)))
        assert np.mean(oracle) < 1.2 * spec.noise_std ** 2 < np.mean(const)

    def test_mood_cue(self):
        assert mood_cue("ba da?") == 0.5 and mood_cue("ba!") == -0.8 and mood_cue("") == 0.0

    @pytest.mark.parametrize("bad", [dict(min_len=0), dict(speed_multipliers=(1, 2, 3, 4, 5)),
                                     dict(split_fractions=(0.5, 0.5, 0.5)), dict(semantic_strength=1.0),
                                     dict(scene_multipliers=(1.0,))])
    def test_invalid_spec(self, bad):
        with pytest.raises(ManifestError):
            generate_synthetic(small(**bad))

    def test_spec_round_trip(self):
        s = small(base_durations={"a": 9.0})
        assert SyntheticSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s
        with pytest.raises(ManifestError):
            SyntheticSpec.from_dict({"nope": 1})


class TestManifest:
    def test_round_trip(self, tmp_path):
        m = generate_synthetic(small())
        save_manifest(m, tmp_path / "m.jsonl")
        back = load_manifest(tmp_path / "m.jsonl")
        assert back == m and back.hash == m.hash
        assert read_manifest_header(tmp_path / "m.jsonl")["num_records"] == 60

    def test_tamper_detected(self, tmp_path):
        p = tmp_path / "m.jsonl"
        save_manifest(generate_synthetic(small()), p)
        lines = p.read_text().splitlines()
        rec = json.loads(lines[3])
        rec["durations"][0] += 1
        lines[3] = json.dumps(rec, sort_keys=True)
        p.write_text("\n".join(lines) + "\n")
        with pytest.raises(ManifestError, match="hash mismatch"):
            load_manifest(p)

    def test_empty_manifest(self, tmp_path):
        m = generate_synthetic(small(num_utterances=0))
        save_manifest(m, tmp_path / "e.jsonl")
        assert load_manifest(tmp_path / "e.jsonl").records == []

    def test_schema_version_checked(self, tmp_path):
        p = tmp_path / "m.jsonl"
        save_manifest(generate_synthetic(small(num_utterances=2)), p)
        lines = p.read_text().splitlines()
        header = json.loads(lines[0])
        header["schema_version"] = 99
        p.write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n")
        with pytest.raises(ManifestError, match="schema version"):
            load_manifest(p)

    def test_not_a_manifest(self, tmp_path):
        (tmp_path / "x").write_text("hello\n")
        with pytest.raises(ManifestError):
            load_manifest(tmp_path / "x")


class TestSemantic:
    def test_hashing_is_deterministic_and_normalized(self):
        h = HashingExtractor(32)
        v = h("ba da?")
        assert v.shape == (32,) and np.linalg.norm(v) == pytest.approx(1.0)
        np.testing.assert_array_equal(v, HashingExtractor(32)("ba da?"))

    def test_punctuation_changes_vector(self):
        h = HashingExtractor()
        assert not np.allclose(h("ba da?"), h("ba da!"))

    def test_empty_text(self):
        with pytest.raises(SemanticError):
            HashingExtractor()("   ")

    def test_registry(self):
        assert {"hash", "file"} <= set(available())
        assert lookup("hash:16").dim == 16 and lookup("hash").spec() == "hash:64"
        with pytest.raises(SemanticError, match="did you mean 'hash'"):
            lookup("hsah")

    def test_file_store(self, tmp_path):
        p = tmp_path / "vec.tsv"
        save_embedding_store(p, {"ni hao.": np.array([0.5, -1.0]), "ba!": np.array([1.0, 2.0])})
        ex = lookup(f"file:{p}")
        assert isinstance(ex, FileExtractor) and ex.dim == 2
        np.testing.assert_array_equal(ex("ni hao."), [0.5, -1.0])
        np.testing.assert_array_equal(ex.extract_many(["ba!", "ni hao."]), [[1.0, 2.0], [0.5, -1.0]])
        with pytest.raises(SemanticError, match="not in embedding store"):
            ex("unseen")

    def test_file_store_errors(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("a\t1,2\nb\t1,2,3\n")
        with pytest.raises(SemanticError, match=":2: dimension"):
            FileExtractor(p)

    @settings(max_examples=100, deadline=None)
    @given(st.text(min_size=1, max_size=40).filter(lambda s: s.strip()))
    def test_any_text_maps_to_unit_or_zero(self, text):
        n = np.linalg.norm(HashingExtractor(16)(text))
        assert n == pytest.approx(1.0) or n == 0.0
