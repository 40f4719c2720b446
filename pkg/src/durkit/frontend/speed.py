"""Five-level speaking-speed quantization from phoneme rate."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..align import FRAME_SECONDS
from .lexicon import SIL

SPEED_LEVELS = ("very slow", "slow", "moderate", "fast", "very fast")
NUM_SPEED_LEVELS = len(SPEED_LEVELS)
QUANTILES = (20.0, 40.0, 60.0, 80.0)


def phoneme_rate(phonemes: Sequence[str], durations: Sequence[int], include_silence: bool = False,
                 frame_seconds: float = FRAME_SECONDS) -> float:
    """Phonemes per second of (by default non-silent) speech."""
    pairs = [(p, d) for p, d in zip(phonemes, durations) if include_silence or p != SIL]
    if not pairs:
        raise ValueError("utterance has no non-silent phonemes")
    return len(pairs) / (sum(d for _, d in pairs) * frame_seconds)


@dataclass(frozen=True)
class SpeedQuantizer:
    """Four increasing rate boundaries splitting rates into levels 0..4.

    A rate equal to a boundary falls into the upper bucket.
    """

    boundaries: tuple[float, float, float, float]

    def __post_init__(self):
        b = tuple(float(x) for x in self.boundaries)
        if len(b) != NUM_SPEED_LEVELS - 1:
            raise ValueError(f"need {NUM_SPEED_LEVELS - 1} boundaries, got {len(b)}")
        if any(not np.isfinite(x) for x in b) or any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError(f"boundaries must be finite and strictly increasing: {b}")
        object.__setattr__(self, "boundaries", b)

    def __call__(self, rate: float) -> int:
        return quantize_speed(self, rate)

    def to_dict(self) -> dict:
        return {"boundaries": list(self.boundaries)}

    @classmethod
    def from_dict(cls, d) -> "SpeedQuantizer":
        return cls(tuple(d["boundaries"]))


def fit_speed_quantizer(rates: Iterable[float]) -> SpeedQuantizer:
    """Equal-mass buckets: boundaries at the 20/40/60/80th percentiles.

    Percentiles use linear interpolation between order statistics
    (``numpy.percentile`` default), so rates 1..100 give
    20.8, 40.6, 60.4 and 80.2.
    """
    r = np.asarray(list(rates), dtype=np.float64)
    if r.size == 0:
        raise ValueError("cannot fit a speed quantizer on an empty corpus")
    if np.unique(r).size < NUM_SPEED_LEVELS:
        raise ValueError(f"need at least {NUM_SPEED_LEVELS} distinct rates, got {np.unique(r).size}")
    return SpeedQuantizer(tuple(np.percentile(r, QUANTILES).tolist()))


def quantize_speed(quantizer: SpeedQuantizer, rate: float) -> int:
    if not rate > 0:
        raise ValueError(f"phoneme rate must be positive, got {rate}")
    return bisect_right(quantizer.boundaries, rate)
