"""Encode utterance records once and collate padded batches from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from .frontend.lexicon import PAD_ID, Lexicon
from .frontend.record import UtteranceRecord
from .semantic import SemanticExtractor


@dataclass
class Batch:
    ids: torch.Tensor        # (B, N) long
    mask: torch.Tensor       # (B, N) bool, True at real phonemes
    durations: torch.Tensor  # (B, N) frames, 0 at padding
    speed: torch.Tensor      # (B,) long
    scene: torch.Tensor      # (B,) long
    g: torch.Tensor | None   # (B, d_sem)

    @property
    def lengths(self) -> list[int]:
        return self.mask.sum(1).tolist()

    def pad_to(self, n: int) -> "Batch":
        """Copy with extra padding columns appended up to length ``n``."""
        extra = n - self.ids.shape[1]
        if extra < 0:
            raise ValueError("cannot pad to a shorter length")
        pad = lambda t, v: torch.cat([t, torch.full((t.shape[0], extra), v, dtype=t.dtype)], 1)
        return Batch(pad(self.ids, PAD_ID), pad(self.mask, False), pad(self.durations, 0), self.speed, self.scene,
                     self.g)


class EncodedCorpus:
    """Records turned into id arrays and semantic vectors, ready for collation."""

    def __init__(self, records: Sequence[UtteranceRecord], lexicon: Lexicon,
                 extractor: SemanticExtractor | None = None, dtype=torch.float32):
        self.records = list(records)
        self.dtype = dtype
        self.ids = [np.asarray(lexicon.encode(r.phonemes, vocab_size_check=False).ids, dtype=np.int64)
                    for r in self.records]
        self.durations = [np.asarray(r.durations, dtype=np.float64) for r in self.records]
        self.speed = np.array([r.speed_level for r in self.records], dtype=np.int64)
        self.scene = np.array([r.scene_id for r in self.records], dtype=np.int64)
        if extractor is not None and self.records:
            cache: dict[str, np.ndarray] = {}
            rows = []
            for r in self.records:
                if r.text not in cache:
                    cache[r.text] = extractor.extract(r.text)
                rows.append(cache[r.text])
            self.g = np.stack(rows)
        else:
            self.g = None

    def __len__(self) -> int:
        return len(self.records)

    def batch(self, indices: Sequence[int]) -> Batch:
        indices = list(indices)
        if not indices:
            raise ValueError("empty batch")
        n = max(len(self.ids[i]) for i in indices)
        ids = np.full((len(indices), n), PAD_ID, dtype=np.int64)
        dur = np.zeros((len(indices), n))
        mask = np.zeros((len(indices), n), dtype=bool)
        for row, i in enumerate(indices):
            k = len(self.ids[i])
            ids[row, :k] = self.ids[i]
            dur[row, :k] = self.durations[i]
            mask[row, :k] = True
        g = None if self.g is None else torch.as_tensor(self.g[indices], dtype=self.dtype)
        return Batch(torch.as_tensor(ids), torch.as_tensor(mask), torch.as_tensor(dur, dtype=self.dtype),
                     torch.as_tensor(self.speed[indices]), torch.as_tensor(self.scene[indices]), g)

    def batches(self, batch_size: int):
        for start in range(0, len(self), batch_size):
            yield list(range(start, min(start + batch_size, len(self))))
