"""Seeded, single-threaded training for every predictor family."""

from __future__ import annotations

import contextlib
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import torch

from ..batching import EncodedCorpus
from ..checkpoint import Checkpoint
from ..data import SCHEMA_VERSION, DatasetManifest
from ..families import get_family, resolve_config
from ..semantic import lookup

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Training produced a non-finite loss; ``snapshot`` holds diagnostics."""

    def __init__(self, message: str, snapshot: dict):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass
class TrainConfig:
    learning_rate: float = 3e-3
    steps: int = 800
    batch_size: int = 32
    grad_clip: float = 1.0
    warmup_steps: int = 50
    # cosine decay from the peak rate down to this fraction of it
    final_lr_fraction: float = 0.1
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    checkpoint_every: int = 0

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("need batch_size >= 1 and learning_rate > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)

    def lr_at(self, step: int) -> float:
        if self.warmup_steps and step < self.warmup_steps:
            return self.learning_rate * (step + 1) / self.warmup_steps
        span = max(self.steps - self.warmup_steps, 1)
        progress = min(max(step - self.warmup_steps, 0) / span, 1.0)
        floor = self.final_lr_fraction
        return self.learning_rate * (floor + (1 - floor) * 0.5 * (1 + math.cos(math.pi * progress)))


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    losses: list[tuple[int, float]] = field(default_factory=list)


@contextlib.contextmanager
def single_threaded():
    prev = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.set_num_threads(prev)


def train_model(family: str, manifest: DatasetManifest, train: TrainConfig, seed: int = 0, size: str = "S",
                overrides: dict | None = None, semantic: str = "hash", config_hash: str = "",
                checkpoint_dir: str | Path | None = None, method: str | None = None) -> TrainResult:
    """Train one model on the manifest's train split.

    Fully determined by ``seed``: initialization, batch order, dropout and
    flow-matching noise all derive from it.
    """
    fam = get_family(family)
    records = manifest.split("train")
    if not records:
        raise ValueError("training split is empty")
    extractor = lookup(semantic) if fam.uses_semantic else None
    d_sem = extractor.dim if extractor is not None else 1
    config = resolve_config(family, size, manifest.lexicon.vocab_size, len(manifest.scenes), d_sem, overrides)
    if extractor is not None and config.get("use_semantic_fusion", True) and config["d_sem"] != extractor.dim:
        raise ValueError(f"model d_sem={config['d_sem']} but extractor {semantic!r} gives {extractor.dim}")

    with single_threaded():
        torch.manual_seed(seed)
        model = fam.build(config)
        corpus = EncodedCorpus(records, manifest.lexicon, extractor)
        extra = fam.prepare(model, corpus)
        meta = {"seed": seed, "step": 0, "size": size, "method": method or f"{family}-{size}",
                "corpus_hash": manifest.hash, "config_hash": config_hash, "data_schema_version": SCHEMA_VERSION,
                "lexicon": manifest.lexicon.to_dict(), "scenes": list(manifest.scenes),
                "semantic": extractor.spec() if extractor is not None else None,
                "train": train.to_dict(), **extra}
        losses: list[tuple[int, float]] = []
        if model is not None and train.steps > 0:
            losses = _optimize(fam, model, corpus, train, seed, meta, checkpoint_dir)
            meta["step"] = train.steps
        tensors = {k: v.detach().clone() for k, v in model.state_dict().items()} if model is not None else {}
    meta["params"] = sum(p.numel() for p in model.parameters()) if model is not None else 0
    return TrainResult(Checkpoint(family, config, tensors, meta), losses)


def _optimize(fam, model, corpus: EncodedCorpus, train: TrainConfig, seed: int, meta: dict,
              checkpoint_dir) -> list[tuple[int, float]]:
    rng = np.random.default_rng(seed)
    gen = torch.Generator().manual_seed(seed)
    opt = torch.optim.Adam(model.parameters(), lr=train.learning_rate)
    model.train()
    order = rng.permutation(len(corpus))
    cursor = 0
    losses = []
    for step in range(train.steps):
        if cursor + train.batch_size > len(order):
            order = rng.permutation(len(corpus))
            cursor = 0
        idx = order[cursor:cursor + train.batch_size]
        cursor += train.batch_size
        for group in opt.param_groups:
            group["lr"] = train.lr_at(step)
        loss = fam.loss(model, corpus.batch(idx), gen)
        value = loss.item()
        if not math.isfinite(value):
            snapshot = {"step": step, "recent_losses": [l for _, l in losses[-10:]], "family": fam.name,
                        "seed": seed, "lr": train.lr_at(step)}
            raise NumericalError(f"{fam.name}: non-finite loss at step {step} (seed {seed})", snapshot)
        opt.zero_grad()
        loss.backward()
        if train.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(model.parameters(), train.grad_clip)
        opt.step()
        losses.append((step, value))
        if checkpoint_dir and train.checkpoint_every and (step + 1) % train.checkpoint_every == 0:
            ck = Checkpoint(fam.name, _config_of(model), dict(model.state_dict()), {**meta, "step": step + 1})
            ck.save(Path(checkpoint_dir) / f"{meta['method']}-seed{seed}-step{step + 1}.safetensors")
    model.eval()
    return losses


def _config_of(model) -> dict:
    return model.config.to_dict()
