"""FastSpeech2-style deterministic duration regressor.

Transformer phoneme encoder followed by the usual two-layer convolutional
variance predictor, trained with MSE on ``log(1 + d)``.  It sees the
phonemes only: no speed, scene or sentence-level conditioning.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..nn import PhonemeEncoder, count_parameters, masked_mean


@dataclass
class RegressorConfig:
    vocab_size: int = 64
    d_model: int = 32
    num_encoder_layers: int = 2
    num_heads: int = 2
    d_ff: int = 64
    filter_size: int = 32
    kernel_size: int = 3
    dropout: float = 0.1

    def __post_init__(self):
        if self.d_model % self.num_heads:
            raise ValueError(f"d_model={self.d_model} must be divisible by num_heads={self.num_heads}")
        if self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RegressorConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown regressor config keys: {sorted(unknown)}")
        return cls(**d)


class VariancePredictor(nn.Module):
    def __init__(self, d_in: int, filter_size: int, kernel_size: int, dropout: float):
        super().__init__()
        pad = kernel_size // 2
        self.conv1 = nn.Conv1d(d_in, filter_size, kernel_size, padding=pad)
        self.norm1 = nn.LayerNorm(filter_size)
        self.conv2 = nn.Conv1d(filter_size, filter_size, kernel_size, padding=pad)
        self.norm2 = nn.LayerNorm(filter_size)
        self.dropout = nn.Dropout(dropout)
        self.out = nn.Linear(filter_size, 1)

    def forward(self, x, mask):
        keep = mask.unsqueeze(-1).to(x.dtype)
        # zeroing padding makes neighbouring pads look like conv zero-padding
        x = x * keep
        x = self.dropout(self.norm1(F.relu(self.conv1(x.transpose(1, 2)).transpose(1, 2))))
        x = x * keep
        x = self.dropout(self.norm2(F.relu(self.conv2(x.transpose(1, 2)).transpose(1, 2))))
        return self.out(x).squeeze(-1)


class DurationRegressor(nn.Module):
    family = "regressor"

    def __init__(self, config: RegressorConfig):
        super().__init__()
        self.config = c = config
        self.encoder = PhonemeEncoder(c.vocab_size, c.d_model, c.num_encoder_layers, c.num_heads, c.d_ff, c.dropout)
        self.predictor = VariancePredictor(c.d_model, c.filter_size, c.kernel_size, c.dropout)

    def init_output_bias(self, log_mean: float) -> None:
        with torch.no_grad():
            self.predictor.out.bias.fill_(float(log_mean))

    def forward(self, ids, mask) -> torch.Tensor:
        """Predicted ``log(1 + d)`` per phoneme, ``(B, N)``."""
        return self.predictor(self.encoder(ids, mask), mask)

    def loss(self, ids, mask, durations) -> torch.Tensor:
        pred = self(ids, mask)
        return masked_mean((pred - torch.log1p(durations.to(pred.dtype))) ** 2, mask)

    @torch.no_grad()
    def predict_frames(self, ids, mask) -> torch.Tensor:
        """Durations in frames, rounded and clamped to >= 1."""
        return torch.clamp(torch.floor(torch.expm1(self(ids, mask)) + 0.5), min=1)


def match_parameter_count(target: int, base: RegressorConfig, max_filter: int = 2048) -> RegressorConfig:
    """Pick the variance-predictor width whose total size is closest to ``target``."""
    best, best_gap = base, None
    lo, hi = 1, max_filter
    # parameter count is monotone in filter_size: bisect, then check neighbours
    while lo < hi:
        mid = (lo + hi) // 2
        if count_parameters(DurationRegressor(replace(base, filter_size=mid))) < target:
            lo = mid + 1
        else:
            hi = mid
    for f in (lo - 1, lo, lo + 1):
        if f < 1:
            continue
        cfg = replace(base, filter_size=f)
        gap = abs(count_parameters(DurationRegressor(cfg)) - target)
        if best_gap is None or gap < best_gap:
            best, best_gap = cfg, gap
    return best
