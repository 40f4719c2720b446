"""Inference wrapper that rebuilds any family from its checkpoint."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch

from .batching import EncodedCorpus
from .checkpoint import Checkpoint, CheckpointError
from .data import SCHEMA_VERSION
from .families import get_family
from .frontend.lexicon import Lexicon, text_to_phonemes
from .frontend.record import UtteranceRecord
from .semantic import lookup


class Predictor:
    def __init__(self, checkpoint: Checkpoint):
        meta = checkpoint.metadata
        version = meta.get("data_schema_version")
        if version != SCHEMA_VERSION:
            raise CheckpointError(f"checkpoint data schema version {version} != {SCHEMA_VERSION}")
        self.checkpoint = checkpoint
        self.family = get_family(checkpoint.family)
        self.meta = meta
        self.lexicon = Lexicon.from_dict(meta["lexicon"])
        self.scenes = tuple(meta.get("scenes", ()))
        self.extractor = lookup(meta["semantic"]) if meta.get("semantic") else None
        self.model = self.family.build(checkpoint.config)
        if self.model is not None:
            # a copy keeps evaluation from ever touching the checkpoint's tensors
            state = {k: v.detach().clone() for k, v in checkpoint.tensors.items()}
            self.model.load_state_dict(state)
            self.model.eval()

    @property
    def method(self) -> str:
        return self.meta.get("method", self.checkpoint.family)

    @property
    def params(self) -> int:
        return int(self.meta.get("params", 0))

    def predict_records(self, records: Sequence[UtteranceRecord], seed: int = 0, batch_size: int = 64,
                        **kw) -> list[np.ndarray]:
        """Frame durations for every record, in input order."""
        corpus = EncodedCorpus(records, self.lexicon, self.extractor)
        out: list[np.ndarray] = []
        with torch.no_grad():
            for idx in corpus.batches(batch_size):
                out.extend(self.family.predict(self.model, corpus.batch(idx), self.meta, seed=seed + idx[0], **kw))
        return out

    def predict_text(self, text: str, speed_level: int = 2, scene: int | str = 0, mode: str = "mean",
                     seed: int = 0) -> np.ndarray:
        phon = text_to_phonemes(text, self.lexicon)
        if isinstance(scene, str):
            if scene not in self.scenes:
                raise ValueError(f"unknown scene {scene!r}; expected one of {list(self.scenes)}")
            scene = self.scenes.index(scene)
        rec = UtteranceRecord("query", text, phon.tokens, (1,) * len(phon), speed_level, scene)
        kw = {"mode": mode} if self.family.name == "durformer" else {}
        if self.family.name != "durformer" and mode != "mean":
            raise ValueError(f"mode {mode!r} is only supported by the durformer family")
        return self.predict_records([rec], seed=seed, **kw)[0]
