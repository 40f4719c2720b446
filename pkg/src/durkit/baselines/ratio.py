"""Ratio-Scale: total frames proportional to text length, split uniformly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..align import DurationSequence, allocate_frames, round_half_up


@dataclass(frozen=True)
class RatioScaleCalibration:
    ref_tokens: int
    ref_frames: int

    def __post_init__(self):
        if self.ref_tokens < 1 or self.ref_frames < 1:
            raise ValueError(f"reference lengths must be positive, got {self.ref_tokens} tokens,"
                             f" {self.ref_frames} frames")

    @property
    def frames_per_token(self) -> float:
        return self.ref_frames / self.ref_tokens

    @classmethod
    def from_records(cls, records) -> "RatioScaleCalibration":
        """Calibrate on the pooled lengths of a set of utterances."""
        records = list(records)
        if not records:
            raise ValueError("cannot calibrate on an empty set of records")
        return cls(sum(len(r.phonemes) for r in records), sum(r.num_frames for r in records))


def ratio_scale_total(cal: RatioScaleCalibration, target_text_len: int) -> int:
    """``round(target_len * ref_frames / ref_tokens)``, at least one frame per token."""
    if target_text_len < 1:
        raise ValueError("target text length must be >= 1")
    total = int(round_half_up(target_text_len * cal.ref_frames / cal.ref_tokens))
    return max(total, target_text_len)


def ratio_scale_predict(cal: RatioScaleCalibration, target_text_len: int) -> DurationSequence:
    """Uniform per-token split of the Ratio-Scale total (largest remainder)."""
    total = ratio_scale_total(cal, target_text_len)
    return DurationSequence(allocate_frames(np.ones(target_text_len), total).tolist())
