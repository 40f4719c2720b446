"""Build utterance records from a directory of forced-alignment TextGrids."""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Mapping, Sequence

from .lexicon import SIL, Lexicon
from .record import DEFAULT_SCENES, UtteranceRecord
from .speed import NUM_SPEED_LEVELS, SpeedQuantizer, fit_speed_quantizer, phoneme_rate, quantize_speed
from .textgrid import TextGridError, intervals_to_durations, parse_textgrid, read_textgrid

log = logging.getLogger(__name__)

# phonemes/s; used only when a corpus is too small to fit its own quantiles
FALLBACK_SPEED_BOUNDARIES = (9.0, 11.0, 13.0, 15.0)


def split_for(utt_id: str, fractions: Sequence[float], seed: int = 0) -> str:
    """Deterministic train/dev/test assignment from a hash of the id."""
    h = hashlib.blake2b(f"{seed}:{utt_id}".encode(), digest_size=8).digest()
    u = int.from_bytes(h, "big") / 2**64
    acc = 0.0
    for name, frac in zip(("train", "dev", "test"), fractions):
        acc += frac
        if u < acc:
            return name
    return "train"


def _transcript(path: Path, grid) -> str:
    for ext in (".lab", ".txt"):
        side = path.with_suffix(ext)
        if side.exists():
            return side.read_text(encoding="utf-8").strip()
    try:
        words = grid.tier("words").items
        text = " ".join(m for m, _, _ in words if m.strip())
        if text:
            return text
    except TextGridError:
        pass
    return " ".join(m for m, _, _ in grid.tier("phones").items if m.strip())


def record_from_textgrid(path: str | Path, scene_id: int = 0, speed_level: int = 2,
                         split: str = "train") -> UtteranceRecord:
    path = Path(path)
    data = path.read_bytes()
    intervals = parse_textgrid(data)
    durations = intervals_to_durations(intervals)
    text = _transcript(path, read_textgrid(data))
    return UtteranceRecord(id=path.stem, text=text, phonemes=tuple(p for p, _, _ in intervals),
                           durations=durations.durations, speed_level=speed_level, scene_id=scene_id, split=split)


def ingest_textgrid_dir(directory: str | Path, lexicon: Lexicon | None = None,
                        scenes: Mapping[str, str] | None = None, scene_names: Sequence[str] = DEFAULT_SCENES,
                        include_silence_in_rate: bool = False, split_fractions=(0.8, 0.1, 0.1),
                        seed: int = 0) -> tuple[list[UtteranceRecord], SpeedQuantizer, Lexicon]:
    """Read every ``*.TextGrid`` under ``directory`` into records.

    ``scenes`` maps utterance id to scene name (default: ``neutral`` or the
    last configured scene).  Speed levels come from a quantizer fitted on
    this corpus's phoneme rates.  Returns the records, the quantizer, and a
    lexicon whose vocabulary covers every aligned phone.
    """
    directory = Path(directory)
    paths = sorted(p for p in directory.rglob("*") if p.suffix.lower() == ".textgrid")
    if not paths:
        raise TextGridError(f"no TextGrid files under {directory}")
    default_scene = "neutral" if "neutral" in scene_names else scene_names[-1]
    scene_index = {name: i for i, name in enumerate(scene_names)}
    raw = []
    for p in paths:
        try:
            raw.append(record_from_textgrid(p))
        except (TextGridError, ValueError) as exc:
            raise TextGridError(f"{p}: {exc}") from exc
    rates = [phoneme_rate(r.phonemes, r.durations, include_silence_in_rate) for r in raw]
    try:
        quantizer = fit_speed_quantizer(rates)
    except ValueError:
        log.warning("only %d utterance(s); using fallback speed boundaries %s", len(raw), FALLBACK_SPEED_BOUNDARIES)
        quantizer = SpeedQuantizer(FALLBACK_SPEED_BOUNDARIES)
    phones = sorted({p for r in raw for p in r.phonemes if p != SIL})
    base = lexicon or Lexicon()
    lex = Lexicon(base.entries, base.symbols[3:] + [p for p in phones if p not in base.index])
    records = []
    for r, rate in zip(raw, rates):
        scene = (scenes or {}).get(r.id, default_scene)
        if scene not in scene_index:
            raise TextGridError(f"{r.id}: unknown scene {scene!r}; configured scenes are {list(scene_names)}")
        level = min(quantize_speed(quantizer, rate), NUM_SPEED_LEVELS - 1)
        records.append(UtteranceRecord(r.id, r.text, r.phonemes, r.durations, level, scene_index[scene],
                                       split_for(r.id, split_fractions, seed)))
    return records, quantizer, lex
