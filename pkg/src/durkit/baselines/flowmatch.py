"""Conditional flow matching over per-phoneme duration vectors.

Training pairs noise ``x0 ~ N(0, I)`` with normalized durations ``x1`` on
the straight path ``x_t = (1 - t) x0 + t x1`` and regresses the velocity
field onto the constant target ``x1 - x0``.  Sampling integrates the
learned field with Euler steps from noise and maps back to frames.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Callable

import torch
import torch.nn as nn

from ..nn import EncoderBlock, PhonemeEncoder, masked_mean, sinusoidal_positions


@dataclass
class FlowMatchConfig:
    vocab_size: int = 64
    d_model: int = 32
    num_encoder_layers: int = 2
    num_velocity_layers: int = 1
    num_heads: int = 2
    d_ff: int = 64
    time_dim: int = 16
    num_steps: int = 32
    dropout: float = 0.0

    def __post_init__(self):
        if self.num_steps < 1:
            raise ValueError("num_steps must be >= 1")
        if self.d_model % self.num_heads:
            raise ValueError(f"d_model={self.d_model} must be divisible by num_heads={self.num_heads}")
        if self.time_dim % 2:
            raise ValueError("time_dim must be even")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FlowMatchConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown flow-matching config keys: {sorted(unknown)}")
        return cls(**d)


def straight_path(x0: torch.Tensor, x1: torch.Tensor, t: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Point on the noise-to-data line at time ``t`` (broadcast over phonemes) and its velocity."""
    t = t.view(-1, *([1] * (x0.dim() - 1))) if t.dim() else t
    return (1 - t) * x0 + t * x1, x1 - x0


def euler_integrate(velocity: Callable[[torch.Tensor, torch.Tensor], torch.Tensor], x0: torch.Tensor,
                    num_steps: int) -> torch.Tensor:
    """Integrate ``dx/dt = velocity(x, t)`` from t=0 to t=1 in equal Euler steps."""
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    x = x0
    dt = 1.0 / num_steps
    for k in range(num_steps):
        t = torch.full((x.shape[0],), k * dt, dtype=x.dtype, device=x.device)
        x = x + dt * velocity(x, t)
    return x


def _noise(shape, generator, dtype) -> torch.Tensor:
    """Standard normal ``(B, N)`` drawn phoneme-major, so extra padding columns leave real entries unchanged.

    ``torch.randn`` output depends on the total draw size, ``torch.rand``
    does not, so normals come from the inverse CDF of uniforms.
    """
    b, n = shape
    u = torch.rand((n, b), generator=generator, dtype=dtype).clamp(1e-12, 1 - 1e-12)
    return torch.special.ndtri(u).T


class FlowMatchDuration(nn.Module):
    family = "flowmatch"

    def __init__(self, config: FlowMatchConfig):
        super().__init__()
        self.config = c = config
        self.encoder = PhonemeEncoder(c.vocab_size, c.d_model, c.num_encoder_layers, c.num_heads, c.d_ff, c.dropout)
        self.x_proj = nn.Linear(1, c.d_model)
        self.t_proj = nn.Sequential(nn.Linear(c.time_dim, c.d_model), nn.GELU(), nn.Linear(c.d_model, c.d_model))
        self.blocks = nn.ModuleList(EncoderBlock(c.d_model, c.num_heads, c.d_ff, c.dropout)
                                    for _ in range(c.num_velocity_layers))
        self.out = nn.Linear(c.d_model, 1)
        self.register_buffer("norm_mean", torch.zeros(()))
        self.register_buffer("norm_std", torch.ones(()))

    def set_normalization(self, mean: float, std: float) -> None:
        self.norm_mean.fill_(float(mean))
        self.norm_std.fill_(max(float(std), 1e-6))

    def normalize(self, frames: torch.Tensor) -> torch.Tensor:
        return (frames - self.norm_mean) / self.norm_std

    def denormalize(self, x: torch.Tensor) -> torch.Tensor:
        return x * self.norm_std + self.norm_mean

    def _time_features(self, t: torch.Tensor) -> torch.Tensor:
        half = self.config.time_dim // 2
        # frequencies spread geometrically over [1, 1000] rad per unit time
        freq = torch.exp(torch.arange(half, dtype=t.dtype, device=t.device) * (math.log(1000.0) / max(half - 1, 1)))
        ang = t[:, None] * freq[None, :]
        return torch.cat([torch.sin(ang), torch.cos(ang)], dim=-1)

    def velocity(self, cond: torch.Tensor, mask: torch.Tensor, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        h = cond + self.x_proj(x.unsqueeze(-1)) + self.t_proj(self._time_features(t))[:, None, :]
        for block in self.blocks:
            h = block(h, mask)
        return self.out(h).squeeze(-1) * mask.to(x.dtype)

    def loss(self, ids, mask, durations, generator: torch.Generator | None = None) -> torch.Tensor:
        cond = self.encoder(ids, mask)
        x1 = self.normalize(durations.to(cond.dtype))
        t = torch.rand(x1.shape[0], generator=generator, dtype=x1.dtype)
        x0 = _noise(x1.shape, generator, x1.dtype)
        xt, target = straight_path(x0, x1, t)
        v = self.velocity(cond, mask, xt, t)
        return masked_mean((v - target) ** 2, mask)

    @torch.no_grad()
    def sample(self, ids, mask, generator: torch.Generator | None = None, num_steps: int | None = None) -> torch.Tensor:
        """Sampled durations in frames ``(B, N)``, rounded and clamped to >= 1."""
        cond = self.encoder(ids, mask)
        x0 = _noise(ids.shape, generator, cond.dtype)
        x1 = euler_integrate(lambda x, t: self.velocity(cond, mask, x, t), x0, num_steps or self.config.num_steps)
        return torch.clamp(torch.floor(self.denormalize(x1) + 0.5), min=1)
