"""Checkpoint container shared by every predictor family.

A checkpoint is a safetensors file: an 8-byte little-endian header length,
a JSON header listing every tensor's name, dtype (always F32), shape and
byte offsets, then the raw little-endian float32 payload.  The header's
``__metadata__`` entry holds one key, ``durkit``, whose value is a JSON
document::

    {"format_version": 1, "family": "durformer", "config": {...},
     "metadata": {"seed": 0, "step": 600, "corpus_hash": "...", "config_hash": "...",
                  "data_schema_version": 1, "lexicon": {...}, "scenes": [...], ...}}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import torch
from safetensors import safe_open
from safetensors.torch import save_file

FORMAT_VERSION = 1
FAMILIES = ("ratio", "regressor", "flowmatch", "durformer")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    family: str
    config: dict
    tensors: dict[str, torch.Tensor] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CheckpointError(f"unknown family {self.family!r}; expected one of {FAMILIES}")

    def weights_hash(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.tensors):
            t = self.tensors[name].detach().to(torch.float32).contiguous()
            h.update(name.encode())
            h.update(json.dumps(list(t.shape)).encode())
            h.update(t.numpy().tobytes())
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        doc = {"format_version": FORMAT_VERSION, "family": self.family, "config": self.config,
               "metadata": self.metadata}
        tensors = {k: v.detach().to(torch.float32).contiguous().clone() for k, v in self.tensors.items()}
        save_file(tensors, str(path), metadata={"durkit": json.dumps(doc, sort_keys=True, ensure_ascii=False)})

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        try:
            with safe_open(str(path), framework="pt") as fh:
                meta = fh.metadata() or {}
                tensors = {k: fh.get_tensor(k) for k in fh.keys()}
        except Exception as exc:  # safetensors raises its own error types
            raise CheckpointError(f"{path}: not a readable checkpoint ({exc})") from None
        if "durkit" not in meta:
            raise CheckpointError(f"{path}: missing durkit metadata")
        doc = json.loads(meta["durkit"])
        if doc.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"{path}: checkpoint format {doc.get('format_version')} != {FORMAT_VERSION}")
        return cls(doc["family"], doc["config"], tensors, doc["metadata"])
