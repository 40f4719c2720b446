"""From forced-alignment TextGrids to a training manifest.

Writes two small TextGrids, parses them back, quantizes intervals to
10 ms frames and builds records with a lexicon.

Run: python demos/textgrid_frontend.py
"""

import tempfile
from pathlib import Path

from durkit.frontend import (Lexicon, ingest_textgrid_dir, intervals_to_durations, parse_textgrid,
                             serialize_textgrid, text_to_phonemes)

lexicon = Lexicon({"hello": ["h", "@", "l", "oU"], "world": ["w", "3", "l", "d"]})
print("hello world ->", text_to_phonemes("Hello, world!", lexicon).tokens)

utterances = {
    "u1": [("h", 0.0, 0.061), ("@", 0.061, 0.118), ("l", 0.118, 0.2), ("oU", 0.2, 0.355)],
    "u2": [("", 0.0, 0.05), ("w", 0.05, 0.12), ("3", 0.12, 0.265), ("l", 0.265, 0.31), ("d", 0.31, 0.4)],
}
with tempfile.TemporaryDirectory() as tmp:
    for name, iv in utterances.items():
        (Path(tmp) / f"{name}.TextGrid").write_text(serialize_textgrid(iv, short=name == "u2"))
    text = (Path(tmp) / "u1.TextGrid").read_text()
    print(text.splitlines()[0], "...", len(text.splitlines()), "lines")
    parsed = parse_textgrid(text)
    print("parsed u1:", parsed)
    print("frames u1:", intervals_to_durations(parsed).durations)
    records, quantizer, lex = ingest_textgrid_dir(tmp, lexicon, split_fractions=(1.0, 0.0, 0.0))
    for r in records:
        print(f"{r.id}: {' '.join(r.phonemes):<14} {r.durations}  speed level {r.speed_level}")
    print("speed boundaries (phonemes/s):", [round(b, 2) for b in quantizer.boundaries])
