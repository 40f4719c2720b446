"""Synthetic duration corpora and JSON-lines dataset manifests.

The synthetic generator plants known effects in the durations so that
conditioning experiments have a ground truth:

    d = max(1, round(base[p] * speed_mult[level] * scene_mult[scene] * (1 + s * h(text)) + eps))

with ``eps ~ N(0, noise_std)`` and ``h(text)`` a sentence-mood cue read off
the closing punctuation, which the lexicon front end never sees.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .frontend.lexicon import Lexicon, text_to_phonemes
from .frontend.record import DEFAULT_SCENES, SPLITS, UtteranceRecord
from .frontend.speed import NUM_SPEED_LEVELS

SCHEMA_VERSION = 1
MANIFEST_FORMAT = "durkit-manifest"

CONSONANTS = ("b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x", "zh", "ch", "sh", "r", "z", "s")
VOWELS = ("a", "o", "e", "i", "u", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng", "ong")

# closing punctuation -> sentence-mood cue in [-1, 1]
MOOD_CUES = {".": 0.0, "!": -0.8, "?": 0.5, "…": 1.0}


class ManifestError(ValueError):
    pass


def mood_cue(text: str) -> float:
    """Deterministic per-utterance semantic scalar ``h(text)`` in [-1, 1]."""
    t = text.rstrip()
    return MOOD_CUES.get(t[-1], 0.0) if t else 0.0


@dataclass
class SyntheticSpec:
    consonants: tuple[str, ...] = CONSONANTS
    vowels: tuple[str, ...] = VOWELS
    # phoneme -> base duration in frames; missing entries are drawn from the seed
    base_durations: dict[str, float] = field(default_factory=dict)
    num_utterances: int = 1000
    min_len: int = 8
    max_len: int = 40
    num_words: int = 300
    speed_multipliers: tuple[float, ...] = (1.5, 1.25, 1.0, 0.8, 0.65)
    scene_names: tuple[str, ...] = DEFAULT_SCENES
    scene_multipliers: tuple[float, ...] = (1.15, 0.85, 1.0)
    semantic_strength: float = 0.35
    noise_std: float = 1.0
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def validate(self) -> None:
        if not self.consonants and not self.vowels:
            raise ManifestError("synthetic spec has no phonemes")
        if self.num_utterances < 0:
            raise ManifestError("num_utterances must be non-negative")
        if not 1 <= self.min_len <= self.max_len:
            raise ManifestError(f"need 1 <= min_len <= max_len, got {self.min_len}, {self.max_len}")
        if len(self.speed_multipliers) != NUM_SPEED_LEVELS:
            raise ManifestError(f"need {NUM_SPEED_LEVELS} speed multipliers")
        m = self.speed_multipliers
        if any(x <= 0 for x in m) or any(m[i] <= m[i + 1] for i in range(len(m) - 1)):
            raise ManifestError("speed multipliers must be positive and strictly decreasing with level")
        if len(self.scene_multipliers) != len(self.scene_names) or not self.scene_names:
            raise ManifestError("one multiplier per scene required")
        if any(x <= 0 for x in self.scene_multipliers):
            raise ManifestError("scene multipliers must be positive")
        if any(d <= 0 for d in self.base_durations.values()):
            raise ManifestError("base durations must be positive")
        if self.noise_std < 0 or self.semantic_strength < 0 or self.semantic_strength >= 1:
            raise ManifestError("need noise_std >= 0 and 0 <= semantic_strength < 1")
        if len(self.split_fractions) != 3 or any(f < 0 for f in self.split_fractions) \
                or abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ManifestError("split fractions must be three non-negative numbers summing to 1")

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ManifestError(f"unknown synthetic spec keys: {sorted(unknown)}")
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()}
        return cls(**kw)


@dataclass
class DatasetManifest:
    records: list[UtteranceRecord]
    lexicon: Lexicon
    scenes: tuple[str, ...] = DEFAULT_SCENES
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scenes = tuple(self.scenes)
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ManifestError("duplicate utterance ids")
        for r in self.records:
            r.check_scenes(len(self.scenes))

    def split(self, name: str) -> list[UtteranceRecord]:
        if name not in SPLITS:
            raise ManifestError(f"unknown split {name!r}")
        return [r for r in self.records if r.split == name]

    @property
    def hash(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps({"lexicon": self.lexicon.to_dict(), "scenes": list(self.scenes)},
                            sort_keys=True, ensure_ascii=False).encode())
        for r in self.records:
            h.update(json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False).encode())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        return (isinstance(other, DatasetManifest) and self.records == other.records
                and self.lexicon == other.lexicon and self.scenes == other.scenes and self.meta == other.meta)

    def counts(self) -> dict[str, int]:
        return {s: sum(r.split == s for r in self.records) for s in SPLITS}


def _make_lexicon(spec: SyntheticSpec, rng: np.random.Generator) -> Lexicon:
    entries: dict[str, list[str]] = {}
    attempts = 0
    while len(entries) < spec.num_words:
        attempts += 1
        if attempts > 100 * spec.num_words + 1000:
            raise ManifestError("could not build enough distinct synthetic words")
        pron: list[str] = []
        for _ in range(int(rng.integers(1, 4))):
            if spec.consonants and (not spec.vowels or rng.random() < 0.8):
                pron.append(spec.consonants[int(rng.integers(len(spec.consonants)))])
            if spec.vowels:
                pron.append(spec.vowels[int(rng.integers(len(spec.vowels)))])
        word = "".join(pron)
        if word not in entries:
            entries[word] = pron
    return Lexicon(entries, list(spec.consonants) + list(spec.vowels))


def base_duration_table(spec: SyntheticSpec, rng: np.random.Generator) -> dict[str, float]:
    table = {}
    for p in spec.consonants:
        table[p] = float(spec.base_durations.get(p, rng.uniform(3.0, 8.0)))
    for p in spec.vowels:
        table[p] = float(spec.base_durations.get(p, rng.uniform(7.0, 16.0)))
    return table


def expected_durations(phonemes: Sequence[str], base: dict[str, float], spec: SyntheticSpec,
                       speed_level: int, scene_id: int, text: str) -> np.ndarray:
    """Noise-free duration of every phoneme, before rounding."""
    scale = spec.speed_multipliers[speed_level] * spec.scene_multipliers[scene_id] \
        * (1.0 + spec.semantic_strength * mood_cue(text))
    return np.array([base[p] for p in phonemes]) * scale


def generate_synthetic(spec: SyntheticSpec) -> DatasetManifest:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    lexicon = _make_lexicon(spec, rng)
    base = base_duration_table(spec, rng)
    words = sorted(lexicon.entries)
    moods = list(MOOD_CUES)
    n_train = int(round(spec.split_fractions[0] * spec.num_utterances))
    n_dev = int(round(spec.split_fractions[1] * spec.num_utterances))
    records = []
    for k in range(spec.num_utterances):
        target = int(rng.integers(spec.min_len, spec.max_len + 1))
        chosen: list[str] = []
        length = 0
        while length < target:
            w = words[int(rng.integers(len(words)))]
            if chosen and length + len(lexicon.entries[w]) > spec.max_len:
                break
            chosen.append(w)
            length += len(lexicon.entries[w])
        text = " ".join(chosen) + moods[int(rng.integers(len(moods)))]
        phon = text_to_phonemes(text, lexicon).tokens
        level = int(rng.integers(NUM_SPEED_LEVELS))
        scene = int(rng.integers(len(spec.scene_names)))
        mean = expected_durations(phon, base, spec, level, scene, text)
        noisy = mean + rng.normal(0.0, spec.noise_std, size=mean.size) if spec.noise_std > 0 else mean
        durations = np.maximum(1, np.floor(noisy + 0.5)).astype(np.int64)
        split = "train" if k < n_train else ("dev" if k < n_train + n_dev else "test")
        records.append(UtteranceRecord(f"syn{k:06d}", text, phon, tuple(durations.tolist()), level, scene, split))
    meta = {"source": "synthetic", "spec": spec.to_dict(), "base_durations": base}
    return DatasetManifest(records, lexicon, spec.scene_names, meta)


def save_manifest(manifest: DatasetManifest, path: str | Path, extra: dict | None = None) -> None:
    header = {"format": MANIFEST_FORMAT, "schema_version": SCHEMA_VERSION, "num_records": len(manifest.records),
              "hash": manifest.hash, "scenes": list(manifest.scenes), "lexicon": manifest.lexicon.to_dict(),
              "meta": {**manifest.meta, **(extra or {})}}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
        for r in manifest.records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def read_manifest_header(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: line 1 is not a manifest header: {exc}") from None
    if header.get("format") != MANIFEST_FORMAT:
        raise ManifestError(f"{path}: not a durkit manifest")
    return header


def load_manifest(path: str | Path) -> DatasetManifest:
    header = read_manifest_header(path)
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ManifestError(f"{path}: schema version {header.get('schema_version')} != {SCHEMA_VERSION}")
    records = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            try:
                records.append(UtteranceRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad record: {exc}") from None
    if len(records) != header["num_records"]:
        raise ManifestError(f"{path}: header says {header['num_records']} records, found {len(records)}")
    m = DatasetManifest(records, Lexicon.from_dict(header["lexicon"]), tuple(header["scenes"]), header.get("meta", {}))
    if m.hash != header["hash"]:
        raise ManifestError(f"{path}: hash mismatch (file modified after it was written)")
    return m
