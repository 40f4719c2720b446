"""Praat TextGrid reading and writing, long and short text formats.

Only what forced-aligner output needs: interval tiers (point tiers are
read and kept but never interpreted).  Both formats are handled by one
reader: every meaningful line carries exactly one value, either bare
(short format) or after ``key =`` (long format).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..align import FRAME_SECONDS, DurationSequence, allocate_frames
from .lexicon import SIL

CONTIGUITY_TOL = 1e-6
SILENCE_MARKS = frozenset({"", "sil", "sp", "<eps>", SIL.lower()})


class TextGridError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


Interval = tuple[str, float, float]


@dataclass
class Tier:
    name: str
    kind: str = "IntervalTier"
    xmin: float = 0.0
    xmax: float = 0.0
    # (mark, start, end) for interval tiers, (mark, time, time) for point tiers
    items: list[Interval] = field(default_factory=list)


@dataclass
class TextGrid:
    xmin: float
    xmax: float
    tiers: list[Tier]

    def tier(self, name: str) -> Tier:
        for t in self.tiers:
            if t.name == name:
                return t
        # MFA multi-speaker output names tiers "<speaker> - phones"
        for t in self.tiers:
            if t.name.endswith(f" - {name}"):
                return t
        raise TextGridError(f"missing tier {name!r} (have {[t.name for t in self.tiers]})")


@dataclass
class _Value:
    text: str
    line: int


_KEY_VALUE = re.compile(r'^([^"=]+?)\s*=\s*(.*)$')


def _values(text: str) -> list[_Value]:
    out: list[_Value] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        lineno = i + 1
        i += 1
        if not raw:
            continue
        m = _KEY_VALUE.match(raw)
        if m:
            raw = m.group(2).strip()
        elif "<exists>" in raw or "<absent>" in raw:
            raw = "<exists>" if "<exists>" in raw else "<absent>"
        elif raw.endswith(":") and not raw.startswith('"'):
            continue  # "item [1]:", "intervals [3]:"
        if raw.startswith('"'):
            # quoted strings may span lines; "" is an escaped quote
            while raw.count('"') % 2 == 1 and i < len(lines):
                raw += "\n" + lines[i]
                i += 1
        out.append(_Value(raw, lineno))
    return out


class _Reader:
    def __init__(self, values: list[_Value]):
        self.values = values
        self.pos = 0

    def _next(self, what: str) -> _Value:
        if self.pos >= len(self.values):
            last = self.values[-1].line if self.values else None
            raise TextGridError(f"unexpected end of file while reading {what}", last)
        v = self.values[self.pos]
        self.pos += 1
        return v

    def number(self, what: str) -> float:
        v = self._next(what)
        try:
            x = float(v.text)
        except ValueError:
            raise TextGridError(f"malformed numeric field {what}: {v.text!r}", v.line) from None
        if not math.isfinite(x):
            raise TextGridError(f"non-finite {what}: {v.text!r}", v.line)
        return x

    def integer(self, what: str) -> int:
        v = self.values[self.pos] if self.pos < len(self.values) else None
        x = self.number(what)
        if not x.is_integer() or x < 0:
            raise TextGridError(f"malformed count {what}: {x!r}", v.line if v else None)
        return int(x)

    def string(self, what: str) -> tuple[str, int]:
        v = self._next(what)
        s = v.text.strip()
        if len(s) < 2 or not (s.startswith('"') and s.endswith('"')):
            raise TextGridError(f"expected quoted string for {what}, got {v.text!r}", v.line)
        return s[1:-1].replace('""', '"'), v.line

    def flag(self) -> str:
        return self._next("tiers flag").text


def read_textgrid(data: bytes | str) -> TextGrid:
    if isinstance(data, bytes):
        if data.startswith(b"\xfe\xff") or data.startswith(b"\xff\xfe"):
            text = data.decode("utf-16")
        else:
            text = data.decode("utf-8-sig")
    else:
        text = data
    r = _Reader(_values(text))
    file_type, line = r.string("file type")
    if not file_type.startswith("ooTextFile"):
        raise TextGridError(f"not a Praat text file: {file_type!r}", line)
    obj_class, line = r.string("object class")
    if obj_class != "TextGrid":
        raise TextGridError(f"object class is {obj_class!r}, not TextGrid", line)
    xmin = r.number("xmin")
    xmax = r.number("xmax")
    if r.flag() != "<exists>":
        return TextGrid(xmin, xmax, [])
    n_tiers = r.integer("tier count")
    tiers = []
    for _ in range(n_tiers):
        kind, _line = r.string("tier class")
        name, _line = r.string("tier name")
        tier = Tier(name, kind, r.number("tier xmin"), r.number("tier xmax"))
        n = r.integer("interval count")
        for _ in range(n):
            if kind == "IntervalTier":
                start, end = r.number("interval xmin"), r.number("interval xmax")
                mark, line = r.string("interval text")
                if end < start:
                    raise TextGridError(f"interval ends before it starts ({start} > {end})", line)
                tier.items.append((mark, start, end))
            else:
                t = r.number("point time")
                mark, _line = r.string("point mark")
                tier.items.append((mark, t, t))
        tiers.append(tier)
    return TextGrid(xmin, xmax, tiers)


def clean_intervals(items: Iterable[Interval]) -> list[Interval]:
    """Sort, check for overlaps, fill gaps and normalize silence marks to SIL."""
    ordered = sorted(items, key=lambda iv: (iv[1], iv[2]))
    out: list[Interval] = []
    for mark, start, end in ordered:
        symbol = SIL if mark.strip().lower() in SILENCE_MARKS else mark.strip()
        if out:
            prev_end = out[-1][2]
            if start < prev_end - CONTIGUITY_TOL:
                raise TextGridError(f"overlapping intervals at {start}s (previous ends {prev_end}s)")
            if start > prev_end + CONTIGUITY_TOL:
                out.append((SIL, prev_end, start))
        out.append((symbol, start, end))
    return out


def parse_textgrid(data: bytes | str, tier: str = "phones") -> list[Interval]:
    """Return ``(phoneme, start_s, end_s)`` triples of the phone tier.

    Empty and silence marks become ``SIL``; gaps larger than 1e-6 s are
    filled with ``SIL`` so the intervals tile the tier.
    """
    grid = read_textgrid(data)
    t = grid.tier(tier)
    if t.kind != "IntervalTier":
        raise TextGridError(f"tier {t.name!r} is a {t.kind}, expected IntervalTier")
    return clean_intervals(t.items)


def intervals_to_durations(intervals: Sequence[Interval], frame_seconds: float = FRAME_SECONDS) -> DurationSequence:
    """Quantize interval lengths to frames while conserving the total.

    The total is ``round(span / frame)``; per-interval counts come from a
    largest-remainder split of it, and any interval that would get zero
    frames is given one.
    """
    if not intervals:
        raise TextGridError("no intervals")
    lengths = np.array([end - start for _, start, end in intervals], dtype=np.float64)
    if np.any(lengths < 0):
        i = int(np.argmax(lengths < 0))
        raise TextGridError(f"negative-length interval {intervals[i]!r}")
    raw = lengths / frame_seconds
    total = int(np.floor(round(float(raw.sum()), 9) + 0.5))
    n = len(intervals)
    if total >= n:
        frames = allocate_frames(raw, total)
    else:
        frames = np.maximum(1, np.floor(np.round(raw, 9) + 0.5).astype(np.int64))
    return DurationSequence(frames.tolist())


def _quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def _fmt(x: float) -> str:
    return repr(float(x))


def write_textgrid(grid: TextGrid, short: bool = False) -> str:
    """Serialize ``grid``; SIL marks are written as empty strings."""

    def mark(m: str) -> str:
        return _quote("" if m == SIL else m)

    lines = ['File type = "ooTextFile"', 'Object class = "TextGrid"', ""]
    if short:
        lines += [_fmt(grid.xmin), _fmt(grid.xmax), "<exists>", str(len(grid.tiers))]
        for t in grid.tiers:
            lines += [_quote(t.kind), _quote(t.name), _fmt(t.xmin), _fmt(t.xmax), str(len(t.items))]
            for m, start, end in t.items:
                if t.kind == "IntervalTier":
                    lines += [_fmt(start), _fmt(end), mark(m)]
                else:
                    lines += [_fmt(start), mark(m)]
    else:
        lines += [f"xmin = {_fmt(grid.xmin)} ", f"xmax = {_fmt(grid.xmax)} ", "tiers? <exists> ",
                  f"size = {len(grid.tiers)} ", "item []: "]
        for k, t in enumerate(grid.tiers, 1):
            lines += [f"    item [{k}]:", f"        class = {_quote(t.kind)} ", f"        name = {_quote(t.name)} ",
                      f"        xmin = {_fmt(t.xmin)} ", f"        xmax = {_fmt(t.xmax)} "]
            if t.kind == "IntervalTier":
                lines.append(f"        intervals: size = {len(t.items)} ")
                for j, (m, start, end) in enumerate(t.items, 1):
                    lines += [f"        intervals [{j}]:", f"            xmin = {_fmt(start)} ",
                              f"            xmax = {_fmt(end)} ", f"            text = {mark(m)} "]
            else:
                lines.append(f"        points: size = {len(t.items)} ")
                for j, (m, time, _) in enumerate(t.items, 1):
                    lines += [f"        points [{j}]:", f"            number = {_fmt(time)} ",
                              f"            mark = {mark(m)} "]
    return "\n".join(lines) + "\n"


def serialize_textgrid(intervals: Sequence[Interval], tier: str = "phones", short: bool = False,
                       words: Sequence[Interval] | None = None) -> str:
    """Write phone intervals (and optionally a words tier) as a TextGrid."""
    xmin = intervals[0][1] if intervals else 0.0
    xmax = intervals[-1][2] if intervals else 0.0
    tiers = []
    if words is not None:
        tiers.append(Tier("words", "IntervalTier", xmin, xmax, list(words)))
    tiers.append(Tier(tier, "IntervalTier", xmin, xmax, list(intervals)))
    return write_textgrid(TextGrid(xmin, xmax, tiers), short=short)
