"""Small transformer building blocks shared by every learned predictor.

Masks follow one convention throughout: ``mask`` is a bool tensor of
shape ``(B, N)`` that is True at real tokens and False at padding.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


def sinusoidal_positions(n: int, dim: int, dtype=torch.float32, device=None) -> torch.Tensor:
    pos = torch.arange(n, dtype=torch.float64, device=device).unsqueeze(1)
    freq = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64, device=device) * (-math.log(10000.0) / dim))
    pe = torch.zeros(n, dim, dtype=torch.float64, device=device)
    pe[:, 0::2] = torch.sin(pos * freq)
    pe[:, 1::2] = torch.cos(pos * freq[: dim // 2])
    return pe.to(dtype)


class MultiHeadAttention(nn.Module):
    """Scaled dot-product attention with separate query/key/value inputs.

    ``forward`` returns the output and the attention weights
    ``(B, heads, Nq, Nk)``.  ``key_mask`` hides padded keys.
    """

    def __init__(self, d_model: int, num_heads: int, dropout: float = 0.0, kv_dim: int | None = None):
        super().__init__()
        if d_model % num_heads:
            raise ValueError(f"d_model={d_model} not divisible by num_heads={num_heads}")
        kv_dim = kv_dim or d_model
        self.num_heads = num_heads
        self.d_k = d_model // num_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(kv_dim, d_model)
        self.v_proj = nn.Linear(kv_dim, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def _heads(self, x: torch.Tensor) -> torch.Tensor:
        b, n, _ = x.shape
        return x.view(b, n, self.num_heads, self.d_k).transpose(1, 2)

    def forward(self, query, key, value, key_mask=None):
        q = self._heads(self.q_proj(query))
        k = self._heads(self.k_proj(key))
        v = self._heads(self.v_proj(value))
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_k)
        if key_mask is not None:
            scores = scores.masked_fill(~key_mask[:, None, None, :], float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        out = self.dropout(weights) @ v
        b, h, n, d = out.shape
        return self.out_proj(out.transpose(1, 2).reshape(b, n, h * d)), weights


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float = 0.0):
        super().__init__()
        self.fc1 = nn.Linear(d_model, d_ff)
        self.fc2 = nn.Linear(d_ff, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x):
        # GELU keeps the network smooth, which finite-difference checks rely on
        return self.fc2(self.dropout(F.gelu(self.fc1(x))))


class EncoderBlock(nn.Module):
    """Post-norm block: self-attention then feed-forward, each with residual."""

    def __init__(self, d_model: int, num_heads: int, d_ff: int, dropout: float = 0.0):
        super().__init__()
        self.attn = MultiHeadAttention(d_model, num_heads, dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.ff = FeedForward(d_model, d_ff, dropout)
        self.norm2 = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, mask):
        a, _ = self.attn(x, x, x, key_mask=mask)
        x = self.norm1(x + self.dropout(a))
        x = self.norm2(x + self.dropout(self.ff(x)))
        return x


class PhonemeEncoder(nn.Module):
    """Token embedding + sinusoidal positions + a stack of encoder blocks."""

    def __init__(self, vocab_size: int, d_model: int, num_layers: int, num_heads: int, d_ff: int,
                 dropout: float = 0.0, padding_idx: int = 0):
        super().__init__()
        self.vocab_size = vocab_size
        self.d_model = d_model
        self.embed = nn.Embedding(vocab_size, d_model, padding_idx=padding_idx)
        self.layers = nn.ModuleList(EncoderBlock(d_model, num_heads, d_ff, dropout) for _ in range(num_layers))
        self.dropout = nn.Dropout(dropout)

    def embed_tokens(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.numel() and (int(ids.min()) < 0 or int(ids.max()) >= self.vocab_size):
            raise ValueError(f"phoneme id out of range [0, {self.vocab_size})")
        return self.embed(ids) * math.sqrt(self.d_model)

    def add_positions(self, x: torch.Tensor) -> torch.Tensor:
        return x + sinusoidal_positions(x.shape[1], self.d_model, x.dtype, x.device)

    def encode(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Run the block stack on already embedded inputs."""
        x = self.dropout(x)
        for layer in self.layers:
            x = layer(x, mask)
        return x

    def forward(self, ids, mask):
        return self.encode(self.add_positions(self.embed_tokens(ids)), mask)


def masked_mean(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    m = mask.to(values.dtype)
    count = m.sum()
    if count == 0:
        raise ValueError("every position is masked; nothing to average")
    return (values * m).sum() / count


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
