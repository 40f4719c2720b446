"""Sentence-level semantic vectors for conditioning the duration model.

Extractors are looked up by name.  ``hash`` is a dependency-free character
n-gram feature hasher; ``file:<path>`` serves vectors precomputed by an
external language model from a TSV store (``text<TAB>v1,v2,...``).
"""

from __future__ import annotations

import difflib
import hashlib
import unicodedata
from pathlib import Path
from typing import Callable

import numpy as np


class SemanticError(ValueError):
    pass


class SemanticExtractor:
    name = "base"
    dim: int

    def extract(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, text: str) -> np.ndarray:
        return self.extract(text)

    def extract_many(self, texts) -> np.ndarray:
        return np.stack([self.extract(t) for t in texts]) if len(texts) else np.zeros((0, self.dim))

    def spec(self) -> str:
        """Registry string that rebuilds this extractor."""
        return self.name


class HashingExtractor(SemanticExtractor):
    """Signed feature hashing of character 1-, 2- and 3-grams, L2-normalized.

    Punctuation and casing are kept: they carry sentence mood, which is the
    point of a sentence-level signal.
    """

    name = "hash"

    def __init__(self, dim: int = 64, ngrams: tuple[int, ...] = (1, 2, 3)):
        if dim < 1:
            raise SemanticError("dim must be positive")
        self.dim = int(dim)
        self.ngrams = tuple(ngrams)

    def extract(self, text: str) -> np.ndarray:
        text = unicodedata.normalize("NFC", text).strip()
        if not text:
            raise SemanticError("cannot extract semantics from empty text")
        padded = f"\x02{text}\x03"
        v = np.zeros(self.dim, dtype=np.float64)
        for n in self.ngrams:
            for i in range(len(padded) - n + 1):
                h = int.from_bytes(hashlib.blake2b(padded[i:i + n].encode(), digest_size=8).digest(), "little")
                v[h % self.dim] += 1.0 if (h >> 63) & 1 else -1.0
        norm = np.linalg.norm(v)
        if norm == 0:
            # every feature cancelled; fall back to a fixed unit vector
            v[0] = 1.0
            norm = 1.0
        return v / norm

    def spec(self) -> str:
        return f"hash:{self.dim}"


class FileExtractor(SemanticExtractor):
    """Lookup of precomputed vectors stored as ``text<TAB>comma-separated floats``."""

    name = "file"

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.store: dict[str, np.ndarray] = {}
        dim = None
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if "\t" not in line:
                    raise SemanticError(f"{self.path}:{lineno}: expected text<TAB>vector")
                text, vec = line.rsplit("\t", 1)
                try:
                    v = np.array([float(x) for x in vec.split(",")], dtype=np.float64)
                except ValueError:
                    raise SemanticError(f"{self.path}:{lineno}: malformed vector") from None
                if not np.all(np.isfinite(v)):
                    raise SemanticError(f"{self.path}:{lineno}: non-finite vector entries")
                if dim is None:
                    dim = v.size
                elif v.size != dim:
                    raise SemanticError(f"{self.path}:{lineno}: dimension {v.size}, expected {dim}")
                self.store[unicodedata.normalize("NFC", text)] = v
        if dim is None:
            raise SemanticError(f"{self.path}: empty embedding store")
        self.dim = dim

    def extract(self, text: str) -> np.ndarray:
        if not text.strip():
            raise SemanticError("cannot extract semantics from empty text")
        try:
            return self.store[unicodedata.normalize("NFC", text)].copy()
        except KeyError:
            raise SemanticError(f"text not in embedding store {self.path}: {text[:40]!r}") from None

    def spec(self) -> str:
        return f"file:{self.path}"


def save_embedding_store(path: str | Path, vectors: dict[str, np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for text, v in vectors.items():
            if "\t" in text or "\n" in text:
                raise SemanticError(f"text may not contain tabs or newlines: {text!r}")
            fh.write(text + "\t" + ",".join(repr(float(x)) for x in v) + "\n")


_REGISTRY: dict[str, Callable[[str], SemanticExtractor]] = {}


def register(name: str):
    """Register a factory ``f(argument) -> SemanticExtractor`` under ``name``.

    Lookup strings have the form ``name`` or ``name:argument``.
    """
    def deco(factory):
        _REGISTRY[name] = factory
        return factory
    return deco


@register("hash")
def _hash_factory(arg: str) -> SemanticExtractor:
    return HashingExtractor(int(arg)) if arg else HashingExtractor()


@register("file")
def _file_factory(arg: str) -> SemanticExtractor:
    if not arg:
        raise SemanticError("file extractor needs a path: file:<path.tsv>")
    return FileExtractor(arg)


def available() -> list[str]:
    return sorted(_REGISTRY)


def lookup(spec: str) -> SemanticExtractor:
    name, _, arg = spec.partition(":")
    try:
        factory = _REGISTRY[name]
    except KeyError:
        close = difflib.get_close_matches(name, available(), n=3)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise SemanticError(f"unknown semantic extractor {name!r} (available: {', '.join(available())}){hint}") from None
    return factory(arg)
