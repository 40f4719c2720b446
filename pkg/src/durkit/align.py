"""Alignment algebra: duration sequences, monotonic frame paths and metrics.

A duration sequence ``D`` assigns every phoneme a whole number of 10 ms
frames.  Expanding ``D`` over a phoneme sequence yields the hard monotonic
alignment path mapping each frame to the phoneme it belongs to, and the
run-length encoding of such a path gives ``D`` back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FRAME_SECONDS = 0.010


class AlignmentError(ValueError):
    """Raised for malformed duration sequences or alignment paths."""


@dataclass(frozen=True)
class PhonemeSequence:
    tokens: tuple[str, ...]
    ids: tuple[int, ...]

    def __init__(self, tokens: Sequence[str], ids: Sequence[int], vocab_size: int | None = None):
        tokens = tuple(tokens)
        ids = tuple(int(i) for i in ids)
        if len(tokens) == 0:
            raise AlignmentError("phoneme sequence must contain at least one phoneme")
        if len(tokens) != len(ids):
            raise AlignmentError(f"{len(tokens)} tokens but {len(ids)} ids")
        if any(i < 0 for i in ids) or (vocab_size is not None and any(i >= vocab_size for i in ids)):
            raise AlignmentError(f"phoneme id out of range [0, {vocab_size})")
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class DurationSequence:
    """Per-phoneme frame counts; every entry is at least one frame."""

    durations: tuple[int, ...]

    def __init__(self, durations: Sequence[int]):
        values = []
        for d in durations:
            if isinstance(d, (float, np.floating)) and not float(d).is_integer():
                raise AlignmentError(f"duration {d!r} is not a whole number of frames")
            values.append(int(d))
        if not values:
            raise AlignmentError("duration sequence must contain at least one phoneme")
        bad = [d for d in values if d < 1]
        if bad:
            raise AlignmentError(f"durations must be >= 1 frame, got {bad[0]}")
        object.__setattr__(self, "durations", tuple(values))

    @property
    def total(self) -> int:
        return sum(self.durations)

    def __len__(self) -> int:
        return len(self.durations)

    def __iter__(self):
        return iter(self.durations)

    def __getitem__(self, i):
        return self.durations[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.durations, dtype=np.int64)


@dataclass(frozen=True)
class AlignmentPath:
    """Frame-to-phoneme map of a hard monotonic alignment."""

    frame_to_phoneme: tuple[int, ...]

    def __init__(self, frame_to_phoneme: Sequence[int]):
        path = tuple(int(i) for i in frame_to_phoneme)
        _check_path(path)
        object.__setattr__(self, "frame_to_phoneme", path)

    def __len__(self) -> int:
        return len(self.frame_to_phoneme)

    @property
    def num_phonemes(self) -> int:
        return self.frame_to_phoneme[-1] + 1


def _check_path(path: tuple[int, ...]) -> None:
    if not path:
        raise AlignmentError("alignment path is empty")
    if path[0] != 0:
        raise AlignmentError(f"path must start at phoneme 0, starts at {path[0]}")
    for t in range(1, len(path)):
        step = path[t] - path[t - 1]
        if step < 0:
            raise AlignmentError(f"path is not monotonic at frame {t}")
        if step > 1:
            raise AlignmentError(f"path skips phoneme {path[t - 1] + 1} at frame {t}")


def _as_durations(d) -> DurationSequence:
    return d if isinstance(d, DurationSequence) else DurationSequence(d)


def expand(durations, phonemes: PhonemeSequence | Sequence | None = None) -> AlignmentPath:
    """Repeat phoneme index ``i`` exactly ``d_i`` times.

    >>> expand([2, 3, 1]).frame_to_phoneme
    (0, 0, 1, 1, 1, 2)
    """
    D = _as_durations(durations)
    if phonemes is not None and len(phonemes) != len(D):
        raise AlignmentError(f"{len(D)} durations for {len(phonemes)} phonemes")
    path = np.repeat(np.arange(len(D)), D.as_array())
    return AlignmentPath(path.tolist())


def durations_from_alignment(path) -> DurationSequence:
    """Run-length encode a frame path; inverse of :func:`expand`."""
    if not isinstance(path, AlignmentPath):
        path = AlignmentPath(path)
    counts = np.bincount(np.asarray(path.frame_to_phoneme), minlength=path.num_phonemes)
    return DurationSequence(counts.tolist())


def _paired_arrays(a, b) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a.durations if isinstance(a, DurationSequence) else a, dtype=np.float64)
    y = np.asarray(b.durations if isinstance(b, DurationSequence) else b, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise AlignmentError(f"length mismatch: {x.shape} vs {y.shape}")
    return x, y


def alignment_distance(d_a, d_b) -> float:
    """Euclidean distance between two duration vectors of equal length."""
    x, y = _paired_arrays(d_a, d_b)
    return float(np.linalg.norm(x - y))


def mse_metric(d_gt, d_pred) -> float:
    """Mean of squared per-phoneme duration errors, in squared frames.

    Model outputs may be real-valued; ground truth is normally integer.
    """
    x, y = _paired_arrays(d_gt, d_pred)
    if x.size == 0:
        raise AlignmentError("cannot score empty sequences")
    diff = x - y
    return float(np.dot(diff, diff) / x.size)


def normalized_l2_error(d_gt, d_pred) -> float:
    """``||d_gt - d_pred||_2 / L``, the literal normalized-norm variant of the error."""
    x, y = _paired_arrays(d_gt, d_pred)
    if x.size == 0:
        raise AlignmentError("cannot score empty sequences")
    return float(np.linalg.norm(x - y) / x.size)


def round_half_up(x):
    """Round to nearest integer with ties away from zero for positives."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(np.int64)


def allocate_frames(weights, total: int, min_frames: int = 1) -> np.ndarray:
    """Split ``total`` frames proportionally to ``weights`` by largest remainder.

    Ties in the remainder go to the earlier index.  Entries that would fall
    below ``min_frames`` are raised to it, taking frames back from the
    longest entries so the sum stays exactly ``total``.
    """
    w = np.asarray(weights, dtype=np.float64)
    n = w.size
    if n == 0:
        raise AlignmentError("no weights to allocate over")
    total = int(total)
    if total < n * min_frames:
        raise AlignmentError(f"cannot give {n} phonemes >= {min_frames} frame(s) each from {total} frames")
    if not np.all(np.isfinite(w)):
        raise AlignmentError("weights must be finite")
    w = np.clip(w, 0.0, None)
    peak = w.max()
    # scaling by the peak keeps subnormal or huge weights from overflowing total / s
    w = w / peak if peak > 0 else np.ones(n)
    s = w.sum()
    # rounding at 1e-9 absorbs float noise such as 0.29 / 0.01 == 28.999999999999996
    raw = np.round(w * (total / s), 9)
    out = np.floor(raw).astype(np.int64)
    remainder = raw - out
    deficit = total - int(out.sum())
    if deficit > 0:
        order = np.argsort(-remainder, kind="stable")
        out[order[:deficit]] += 1
    return _enforce_minimum(out, min_frames)


def _enforce_minimum(out: np.ndarray, min_frames: int) -> np.ndarray:
    short = out < min_frames
    if not short.any():
        return out
    need = int((min_frames - out[short]).sum())
    out[short] = min_frames
    while need > 0:
        i = int(np.argmax(out))
        out[i] -= 1
        need -= 1
    return out
