"""Pronunciation lexicon and text-to-phoneme lookup."""

from __future__ import annotations

import re
import unicodedata
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..align import PhonemeSequence

PAD = "<pad>"
UNK = "<unk>"
SIL = "SIL"
RESERVED = (PAD, UNK, SIL)
PAD_ID, UNK_ID, SIL_ID = 0, 1, 2

# CJK ideographs are tokenized one character at a time; other scripts by word.
_TOKEN_RE = re.compile(r"[㐀-䶿一-鿿豈-﫿]|[^\W_]+(?:'[^\W_]+)*", re.UNICODE)


class LexiconError(ValueError):
    pass


def normalize_text(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip().lower()


def tokenize(text: str) -> list[str]:
    """Split normalized text into lexicon lookup keys; punctuation is dropped."""
    return _TOKEN_RE.findall(normalize_text(text))


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


class Lexicon:
    """Word to phoneme-list mapping plus the phoneme vocabulary.

    Ids 0, 1 and 2 are reserved for padding, unknown tokens and silence;
    real phonemes are numbered from 3 in sorted order unless an explicit
    ``phonemes`` list fixes the order.
    """

    def __init__(self, entries: Mapping[str, Sequence[str]] | None = None,
                 phonemes: Iterable[str] | None = None):
        self.entries: dict[str, tuple[str, ...]] = {}
        for word, pron in (entries or {}).items():
            key = normalize_text(word)
            if not key:
                raise LexiconError("empty lexicon headword")
            if not pron:
                raise LexiconError(f"empty pronunciation for {word!r}")
            self.entries.setdefault(key, tuple(pron))
        symbols = set(phonemes or ())
        for pron in self.entries.values():
            symbols.update(pron)
        collisions = symbols & {PAD, UNK}
        if collisions:
            raise LexiconError(f"reserved symbol used as phoneme: {sorted(collisions)}")
        symbols.discard(SIL)
        if phonemes is not None and not isinstance(phonemes, (set, frozenset)):
            ordered = [p for p in dict.fromkeys(phonemes) if p not in RESERVED]
            ordered += sorted(symbols - set(ordered))
        else:
            ordered = sorted(symbols)
        self.symbols: list[str] = list(RESERVED) + ordered
        self.index: dict[str, int] = {s: i for i, s in enumerate(self.symbols)}

    @property
    def vocab_size(self) -> int:
        return len(self.symbols)

    def __contains__(self, word: str) -> bool:
        return normalize_text(word) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Lexicon) and self.entries == other.entries and self.symbols == other.symbols

    def lookup(self, word: str) -> tuple[str, ...] | None:
        return self.entries.get(normalize_text(word))

    def encode(self, symbols: Sequence[str], vocab_size_check: bool = True) -> PhonemeSequence:
        """Map phoneme symbols to ids; symbols outside the vocabulary become UNK."""
        ids = [self.index.get(s, UNK_ID) for s in symbols]
        return PhonemeSequence(list(symbols), ids, self.vocab_size if vocab_size_check else None)

    def to_dict(self) -> dict:
        return {"entries": {w: list(p) for w, p in self.entries.items()}, "phonemes": self.symbols[len(RESERVED):]}

    @classmethod
    def from_dict(cls, payload: Mapping) -> "Lexicon":
        return cls(payload.get("entries", {}), payload.get("phonemes"))

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        """Read an MFA-style dictionary: ``word  ph1 ph2 ...`` per line.

        Numeric columns between the word and the phones (pronunciation
        probabilities) are skipped; ``#`` starts a comment line.
        """
        entries: dict[str, list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                fields = line.split()
                word, rest = fields[0], fields[1:]
                while rest and _is_number(rest[0]):
                    rest = rest[1:]
                if not rest:
                    raise LexiconError(f"{path}:{lineno}: no phonemes for {word!r}")
                entries.setdefault(word, rest)
        return cls(entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word, pron in self.entries.items():
                fh.write(f"{word}\t{' '.join(pron)}\n")


def text_to_phonemes(text: str, lexicon: Lexicon) -> PhonemeSequence:
    """Concatenate lexicon pronunciations of every token in ``text``.

    A token missing from the lexicon contributes a single UNK.
    """
    tokens = tokenize(text)
    if not tokens:
        raise LexiconError(f"no pronounceable tokens in {text!r}")
    symbols: list[str] = []
    for tok in tokens:
        pron = lexicon.lookup(tok)
        symbols.extend(pron if pron is not None else (UNK,))
    return lexicon.encode(symbols)
