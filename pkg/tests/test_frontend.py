import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from durkit.frontend import (SIL, UNK, Lexicon, LexiconError, SpeedQuantizer, TextGridError, fit_speed_quantizer,
                             ingest_textgrid_dir, intervals_to_durations, parse_textgrid, phoneme_rate,
                             quantize_speed, read_textgrid, serialize_textgrid, text_to_phonemes, tokenize)
from durkit.frontend.lexicon import PAD_ID, UNK_ID

LONG_TG = '''File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.2
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "words"
        xmin = 0
        xmax = 0.2
        intervals: size = 1
        intervals [1]:
            xmin = 0
            xmax = 0.2
            text = "ba"
    item [2]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.2
        intervals: size = 2
        intervals [1]:
            xmin = 0.00
            xmax = 0.07
            text = "b"
        intervals [2]:
            xmin = 0.07
            xmax = 0.20
            text = "a"
'''

SHORT_TG = '''File type = "ooTextFile"
Object class = "TextGrid"

0
0.3
<exists>
1
"IntervalTier"
"phones"
0
0.3
3
0
0.1
""
0.1
0.2
"n"
0.2
0.3
"i"
'''


class TestLexicon:
    def test_direct_lookup(self):
        lex = Lexicon({"ba": ["b", "a"]})
        assert text_to_phonemes("ba", lex).tokens == ("b", "a")

    def test_unknown_token_is_single_unk(self):
        seq = text_to_phonemes("xq", Lexicon())
        assert seq.tokens == (UNK,) and seq.ids == (UNK_ID,)

    def test_concatenation(self):
        lex = Lexicon({"ba": ["b", "a"]})
        seq = text_to_phonemes("ba ba", lex)
        assert seq.tokens == ("b", "a", "b", "a")
        assert len(set(seq.ids)) == 2

    def test_punctuation_and_case_dropped(self):
        lex = Lexicon({"ba": ["b", "a"]})
        assert text_to_phonemes("Ba, BA!", lex).tokens == ("b", "a", "b", "a")

    def test_cjk_characters_split(self):
        assert tokenize("你好 world") == ["你", "好", "world"]

    def test_empty_text(self):
        with pytest.raises(LexiconError):
            text_to_phonemes("  ?! ", Lexicon())

    def test_reserved_ids_disjoint(self):
        lex = Lexicon({"ba": ["b", "a"], "da": ["d", "a"]})
        real = {lex.index[p] for p in ("a", "b", "d")}
        assert PAD_ID not in real and UNK_ID not in real
        with pytest.raises(LexiconError):
            Lexicon({"x": ["<pad>"]})

    def test_file_round_trip(self, tmp_path):
        p = tmp_path / "lex.dict"
        p.write_text("# comment\nni\t0.9\tn i\nhao h ao\n\n", encoding="utf-8")
        lex = Lexicon.from_file(p)
        assert lex.lookup("ni") == ("n", "i")
        lex.save(tmp_path / "out.dict")
        assert Lexicon.from_file(tmp_path / "out.dict").entries == lex.entries

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from(["ba", "da", "xyz", "a"]), min_size=1, max_size=20))
    def test_length_is_sum_of_token_lengths(self, words):
        lex = Lexicon({"ba": ["b", "a"], "da": ["d", "a"], "a": ["a"]})
        expected = sum(len(lex.lookup(w)) if w in lex else 1 for w in words)
        assert len(text_to_phonemes(" ".join(words), lex)) == expected


class TestTextGrid:
    def test_long_format_pass_through(self):
        assert parse_textgrid(LONG_TG.encode()) == [("b", 0.0, 0.07), ("a", 0.07, 0.2)]

    def test_short_format_with_silence(self):
        assert parse_textgrid(SHORT_TG) == [(SIL, 0.0, 0.1), ("n", 0.1, 0.2), ("i", 0.2, 0.3)]

    def test_missing_tier(self):
        text = LONG_TG.replace('"phones"', '"segments"')
        with pytest.raises(TextGridError, match="missing tier"):
            parse_textgrid(text)

    def test_malformed_number_reports_line(self):
        text = LONG_TG.replace("xmax = 0.07\n", "xmax = 0.0x7\n")
        with pytest.raises(TextGridError) as exc:
            parse_textgrid(text)
        assert exc.value.line == 27

    def test_overlap_rejected(self):
        text = LONG_TG.replace("xmin = 0.07\n", "xmin = 0.05\n")
        with pytest.raises(TextGridError, match="overlapping"):
            parse_textgrid(text)

    def test_gap_filled_with_silence(self):
        text = LONG_TG.replace("xmin = 0.07\n", "xmin = 0.09\n")
        assert parse_textgrid(text)[1] == (SIL, 0.07, 0.09)

    def test_speaker_prefixed_tier(self):
        text = LONG_TG.replace('"phones"', '"spk1 - phones"')
        assert len(parse_textgrid(text)) == 2

    def test_quoted_marks_with_specials(self):
        iv = [("a\"b", 0.0, 0.1), ("x = y", 0.1, 0.25)]
        for short in (False, True):
            assert parse_textgrid(serialize_textgrid(iv, short=short)) == iv

    def test_utf16_input(self):
        assert parse_textgrid(SHORT_TG.encode("utf-16"))[1] == ("n", 0.1, 0.2)


class TestQuantization:
    def test_exact_tenth(self):
        assert intervals_to_durations([("a", 0.0, 0.10)]).durations == (10,)

    def test_nearest_frame(self):
        assert intervals_to_durations([("a", 0.0, 0.0749)]).durations == (7,)

    def test_total_correction(self):
        d = intervals_to_durations([("a", 0.0, 0.014), ("b", 0.014, 0.030)])
        assert d.durations == (1, 2) and d.total == 3

    def test_clamp(self):
        assert intervals_to_durations([("a", 0.0, 0.004)]).durations == (1,)

    def test_negative_interval(self):
        with pytest.raises(TextGridError):
            intervals_to_durations([("a", 0.2, 0.1)])


class TestSpeed:
    def test_percentiles_of_1_to_100(self):
        q = fit_speed_quantizer(range(1, 101))
        np.testing.assert_allclose(q.boundaries, [20.8, 40.6, 60.4, 80.2])
        assert q(50) == 2

    def test_extremes(self):
        q = SpeedQuantizer((1.0, 2.0, 3.0, 4.0))
        assert quantize_speed(q, 0.5) == 0
        assert quantize_speed(q, 10.0) == 4

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_speed_quantizer([])
        with pytest.raises(ValueError):
            fit_speed_quantizer([1, 1, 2, 2, 3])
        with pytest.raises(ValueError):
            SpeedQuantizer((1.0, 1.0, 2.0, 3.0))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.01, 1e3), st.floats(0.01, 1e3))
    def test_monotone(self, a, b):
        q = SpeedQuantizer((5.0, 9.0, 12.5, 20.0))
        lo, hi = sorted((a, b))
        assert q(lo) <= q(hi)

    def test_rate_excludes_silence(self):
        assert phoneme_rate([SIL, "a", "b"], [50, 10, 10]) == pytest.approx(2 / 0.2)
        assert phoneme_rate([SIL, "a", "b"], [50, 10, 10], include_silence=True) == pytest.approx(3 / 0.7)


def test_ingest_directory(tmp_path):
    for k in range(6):
        ivs = [(SIL, 0.0, 0.1)]
        t = 0.1
        for j in range(3 + k):
            ivs.append(("a" if j % 2 else "b", t, t + 0.05 + 0.01 * k))
            t = ivs[-1][2]
        (tmp_path / f"utt{k}.TextGrid").write_text(serialize_textgrid(ivs, short=bool(k % 2)), encoding="utf-8")
        (tmp_path / f"utt{k}.lab").write_text("ba ba", encoding="utf-8")
    records, quantizer, lex = ingest_textgrid_dir(tmp_path, Lexicon({"ba": ["b", "a"]}))
    assert [r.id for r in records] == [f"utt{k}" for k in range(6)]
    assert records[0].phonemes[0] == SIL and records[0].text == "ba ba"
    assert all(sum(r.durations) == round(sum(e - s for _, s, e in parse_textgrid(
        (tmp_path / f"{r.id}.TextGrid").read_text())) / 0.01) for r in records)
    # slower speech in later files -> non-increasing speed level
    levels = [r.speed_level for r in records]
    assert levels == sorted(levels, reverse=True)
    assert "a" in lex.index and "b" in lex.index


def test_read_textgrid_keeps_all_tiers():
    grid = read_textgrid(LONG_TG)
    assert [t.name for t in grid.tiers] == ["words", "phones"]
    assert grid.tier("words").items == [("ba", 0.0, 0.2)]
