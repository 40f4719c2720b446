"""Text and alignment front end: lexicon lookup, TextGrid ingestion, speed levels."""

from .lexicon import PAD, PAD_ID, SIL, SIL_ID, UNK, UNK_ID, Lexicon, LexiconError, text_to_phonemes, tokenize
from .record import DEFAULT_SCENES, SPLITS, RecordError, UtteranceRecord
from .speed import (NUM_SPEED_LEVELS, SPEED_LEVELS, SpeedQuantizer, fit_speed_quantizer, phoneme_rate,
                    quantize_speed)
from .textgrid import (TextGrid, TextGridError, Tier, intervals_to_durations, parse_textgrid, read_textgrid,
                       serialize_textgrid, write_textgrid)
from .ingest import ingest_textgrid_dir, record_from_textgrid

__all__ = [
    "PAD", "PAD_ID", "SIL", "SIL_ID", "UNK", "UNK_ID", "Lexicon", "LexiconError", "text_to_phonemes", "tokenize",
    "DEFAULT_SCENES", "SPLITS", "RecordError", "UtteranceRecord",
    "NUM_SPEED_LEVELS", "SPEED_LEVELS", "SpeedQuantizer", "fit_speed_quantizer", "phoneme_rate", "quantize_speed",
    "TextGrid", "TextGridError", "Tier", "intervals_to_durations", "parse_textgrid", "read_textgrid",
    "serialize_textgrid", "write_textgrid", "ingest_textgrid_dir", "record_from_textgrid",
]
