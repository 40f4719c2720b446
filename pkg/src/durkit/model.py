"""DurFormer: conditioned Gaussian phoneme-duration predictor.

Pipeline for a batch of phoneme ids ``(B, N)``:

1. phoneme embedding + sinusoidal positions;
2. plus the attribute embedding ``E(speed, scene)``, broadcast over phonemes;
3. transformer encoder blocks;
4. cross-attention from phoneme states to tokens derived from the
   sentence semantic vector ``g`` by a small MLP;
5. linear heads giving the mean and standard deviation (in frames) of
   every phoneme's duration.

Either conditioning path can be switched off for ablations, in which case
its weights are not even created.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .align import DurationSequence, allocate_frames, round_half_up
from .frontend.speed import NUM_SPEED_LEVELS
from .nn import MultiHeadAttention, PhonemeEncoder, masked_mean


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    vocab_size: int = 64
    d_model: int = 32
    num_encoder_layers: int = 2
    num_heads: int = 2
    d_ff: int = 64
    d_sem: int = 64
    num_scenes: int = 3
    num_speed_levels: int = NUM_SPEED_LEVELS
    dropout: float = 0.1
    use_attribute_encoder: bool = True
    use_semantic_fusion: bool = True
    # attention values from the semantic tokens; False gives the query-stream form
    values_from_semantic: bool = True
    num_semantic_tokens: int = 4
    sigma_min: float = 0.1

    def __post_init__(self):
        if self.d_model % self.num_heads:
            raise ConfigError(f"d_model={self.d_model} must be divisible by num_heads={self.num_heads}")
        if not self.sigma_min > 0:
            raise ConfigError("sigma_min must be positive")
        for name in ("vocab_size", "d_model", "num_heads", "d_ff", "d_sem", "num_scenes", "num_semantic_tokens"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.num_encoder_layers < 0 or not 0 <= self.dropout < 1:
            raise ConfigError("need num_encoder_layers >= 0 and 0 <= dropout < 1")

    @property
    def d_k(self) -> int:
        return self.d_model // self.num_heads

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class GaussianDurationPrediction:
    """Per-phoneme duration mean and standard deviation, both ``(B, N)``."""

    mu: torch.Tensor
    sigma: torch.Tensor
    mask: torch.Tensor

    def utterance(self, b: int = 0) -> tuple[np.ndarray, np.ndarray]:
        keep = self.mask[b].cpu().numpy()
        return (self.mu[b].detach().cpu().double().numpy()[keep],
                self.sigma[b].detach().cpu().double().numpy()[keep])


class AttributeEncoder(nn.Module):
    """``E(speed, scene) = W (emb_speed[speed] + emb_scene[scene]) + b``."""

    def __init__(self, num_speed_levels: int, num_scenes: int, d_model: int):
        super().__init__()
        self.speed = nn.Embedding(num_speed_levels, d_model)
        self.scene = nn.Embedding(num_scenes, d_model)
        self.proj = nn.Linear(d_model, d_model)

    def forward(self, speed: torch.Tensor, scene: torch.Tensor) -> torch.Tensor:
        if int(speed.min()) < 0 or int(speed.max()) >= self.speed.num_embeddings:
            raise ValueError(f"speed level out of range [0, {self.speed.num_embeddings})")
        if int(scene.min()) < 0 or int(scene.max()) >= self.scene.num_embeddings:
            raise ValueError(f"scene id out of range [0, {self.scene.num_embeddings})")
        return self.proj(self.speed(speed) + self.scene(scene))


class SemanticFusion(nn.Module):
    """Cross-attention of phoneme states (queries) onto MLP(g) (keys).

    With ``values_from_semantic`` the values are the semantic tokens too.
    Otherwise values come from the query stream, ``W^V z_i``; attention
    rows sum to one, so that form returns ``W^V z_i`` irrespective of g.
    A residual connection and layer norm wrap the block.
    """

    def __init__(self, d_model: int, d_sem: int, num_heads: int, num_tokens: int = 4,
                 values_from_semantic: bool = True, dropout: float = 0.0):
        super().__init__()
        self.d_model = d_model
        self.num_tokens = num_tokens
        self.values_from_semantic = values_from_semantic
        self.mlp = nn.Sequential(nn.Linear(d_sem, d_model), nn.GELU(), nn.Linear(d_model, num_tokens * d_model))
        self.attn = MultiHeadAttention(d_model, num_heads, dropout)
        self.norm = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def semantic_tokens(self, g: torch.Tensor) -> torch.Tensor:
        return self.mlp(g).view(g.shape[0], self.num_tokens, self.d_model)

    def attend(self, z: torch.Tensor, g: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Attention output (before residual/norm) and weights ``(B, H, N, M)``."""
        if g.dim() != 2 or g.shape[0] != z.shape[0] or g.shape[1] != self.mlp[0].in_features:
            raise ValueError(f"semantic vector shape {tuple(g.shape)} does not match batch of {z.shape[0]}"
                             f" x d_sem={self.mlp[0].in_features}")
        s = self.semantic_tokens(g)
        if self.values_from_semantic:
            return self.attn(z, s, s)
        a = self.attn
        q = a._heads(a.q_proj(z))
        k = a._heads(a.k_proj(s))
        v = a._heads(a.v_proj(z))
        weights = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(a.d_k), dim=-1)
        out = a.dropout(weights).sum(-1, keepdim=True) * v
        b, h, n, d = out.shape
        return a.out_proj(out.transpose(1, 2).reshape(b, n, h * d)), weights

    def forward(self, z: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
        out, _ = self.attend(z, g)
        return self.norm(z + self.dropout(out))


class DurFormer(nn.Module):
    family = "durformer"

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        c = config
        self.encoder = PhonemeEncoder(c.vocab_size, c.d_model, c.num_encoder_layers, c.num_heads, c.d_ff, c.dropout)
        self.mean_head = nn.Linear(c.d_model, 1)
        self.scale_head = nn.Linear(c.d_model, 1)
        # optional parts are created last so shared weights get the same init under a fixed seed
        self.attribute = AttributeEncoder(c.num_speed_levels, c.num_scenes, c.d_model) \
            if c.use_attribute_encoder else None
        self.semantic = SemanticFusion(c.d_model, c.d_sem, c.num_heads, c.num_semantic_tokens,
                                       c.values_from_semantic, c.dropout) if c.use_semantic_fusion else None

    def init_output_bias(self, mean: float, std: float) -> None:
        """Start the heads at the corpus duration mean and spread."""
        with torch.no_grad():
            self.mean_head.bias.fill_(float(mean))
            target = max(float(std) - self.config.sigma_min, 1e-3)
            self.scale_head.bias.fill_(target + math.log(-math.expm1(-target)))  # softplus^-1

    def attribute_encode(self, speed, scene, like: torch.Tensor) -> torch.Tensor:
        """Attribute embedding ``(B, d_model)``; zeros when the encoder is ablated."""
        if self.attribute is None:
            return torch.zeros(like.shape[0], self.config.d_model, dtype=like.dtype, device=like.device)
        if speed is None or scene is None:
            raise ValueError("attribute encoder enabled but speed/scene not given")
        return self.attribute(torch.as_tensor(speed), torch.as_tensor(scene))

    def semantic_fuse(self, z: torch.Tensor, g) -> torch.Tensor:
        if self.semantic is None:
            return z
        if g is None:
            raise ValueError("semantic fusion enabled but no semantic vector given")
        return self.semantic(z, torch.as_tensor(g, dtype=z.dtype))

    def hidden(self, ids, mask, speed=None, scene=None, g=None, embedded: torch.Tensor | None = None):
        """Fused phoneme states ``(B, N, d_model)``.

        ``embedded`` replaces the token embedding lookup (used by gradient
        checks that need a differentiable input).
        """
        x = self.encoder.embed_tokens(ids) if embedded is None else embedded
        x = self.encoder.add_positions(x)
        if self.attribute is not None:
            x = x + self.attribute_encode(speed, scene, x)[:, None, :]
        z = self.encoder.encode(x, mask)
        return self.semantic_fuse(z, g)

    def forward(self, ids, mask, speed=None, scene=None, g=None, embedded=None) -> GaussianDurationPrediction:
        h = self.hidden(ids, mask, speed, scene, g, embedded)
        mu = self.mean_head(h).squeeze(-1)
        sigma = self.config.sigma_min + F.softplus(self.scale_head(h).squeeze(-1))
        return GaussianDurationPrediction(mu, sigma, mask)


def gaussian_nll_terms(mu, sigma, target):
    """Per-position ``(mu - d)^2 / (2 sigma^2) + log sigma`` (no 0.5 log 2pi)."""
    return (mu - target) ** 2 / (2 * sigma ** 2) + torch.log(sigma)


def nll_loss(pred: GaussianDurationPrediction, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    """Mean Gaussian negative log-likelihood over unmasked phonemes."""
    mask = pred.mask if mask is None else mask
    if pred.mu.shape != target.shape or pred.sigma.shape != target.shape:
        raise ValueError(f"prediction shape {tuple(pred.mu.shape)} vs target {tuple(target.shape)}")
    if not bool(mask.any()):
        raise ValueError("fully masked batch: no positions to score")
    if bool((pred.sigma[mask] <= 0).any()):
        raise ValueError("non-positive sigma in prediction")
    target = target.to(pred.mu.dtype)
    return masked_mean(gaussian_nll_terms(pred.mu, pred.sigma, target), mask)


def parse_mode(mode: str) -> tuple[str, int | None]:
    """``"mean"``, ``"sample"`` or ``"rescale:T"`` -> (name, T).  Bare ``rescale`` gives T=None."""
    name, _, arg = mode.partition(":")
    if name in ("mean", "sample") and not arg:
        return name, None
    if name == "rescale":
        if not arg:
            return name, None
        try:
            return name, int(arg)
        except ValueError:
            raise ValueError(f"rescale mode needs an integer total, e.g. rescale:120 (got {mode!r})") from None
    raise ValueError(f"unknown sampling mode {mode!r}; expected mean, sample or rescale:T")


def sample_durations(mu, sigma=None, mode: str = "mean", seed: int | None = None,
                     target_total: int | None = None) -> DurationSequence:
    """Turn one utterance's Gaussian into whole-frame durations (each >= 1).

    ``mean`` rounds the means; ``sample`` rounds ``mu + sigma * eps`` with
    seeded standard-normal ``eps``; ``rescale`` scales the means to sum to
    exactly ``target_total`` frames by largest remainder.
    """
    if isinstance(mu, GaussianDurationPrediction):
        mu, sigma = mu.utterance(0)
    name, total = parse_mode(mode)
    if name == "rescale" and target_total is None:
        target_total = total
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1 or mu.size == 0 or not np.all(np.isfinite(mu)):
        raise ValueError("mu must be a non-empty finite vector")
    if name == "mean":
        values = round_half_up(mu)
    elif name == "sample":
        sigma = np.asarray(sigma, dtype=np.float64)
        if sigma.shape != mu.shape or np.any(sigma <= 0):
            raise ValueError("sigma must be positive and match mu")
        eps = np.random.default_rng(seed).standard_normal(mu.size)
        values = round_half_up(mu + sigma * eps)
    else:
        if target_total is None:
            raise ValueError("rescale mode needs a target total")
        if target_total < mu.size:
            raise ValueError(f"rescale target {target_total} frames is below the phoneme count {mu.size}")
        values = allocate_frames(np.clip(mu, 1e-6, None), target_total)
    return DurationSequence(np.maximum(values, 1).tolist())
