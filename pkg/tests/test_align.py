import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from durkit.align import (AlignmentError, AlignmentPath, DurationSequence, PhonemeSequence, alignment_distance,
                          allocate_frames, durations_from_alignment, expand, mse_metric, normalized_l2_error)

durations_st = st.lists(st.integers(1, 50), min_size=1, max_size=200)


def phonemes(n):
    return PhonemeSequence([f"p{i}" for i in range(n)], list(range(n)))


class TestExpand:
    def test_identity(self):
        assert expand([1, 1], phonemes(2)).frame_to_phoneme == (0, 1)

    def test_braces_expansion(self):
        assert expand([2, 3, 1], phonemes(3)).frame_to_phoneme == (0, 0, 1, 1, 1, 2)

    def test_single_phoneme(self):
        assert expand([5], phonemes(1)).frame_to_phoneme == (0, 0, 0, 0, 0)

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            expand([1, 2], phonemes(3))

    @pytest.mark.parametrize("bad", [[0, 2], [3, -1], []])
    def test_rejects_nonpositive_or_empty(self, bad):
        with pytest.raises(AlignmentError):
            expand(bad)


class TestRunLength:
    @pytest.mark.parametrize("path, expected", [
        ([0, 0, 1, 1, 1, 2], (2, 3, 1)),
        ([0], (1,)),
        ([0, 1, 1, 2, 2, 2, 3], (1, 2, 3, 1)),
    ])
    def test_examples(self, path, expected):
        assert durations_from_alignment(path).durations == expected

    @pytest.mark.parametrize("path", [[0, 1, 0], [0, 2], [1, 1], []])
    def test_invalid_paths(self, path):
        with pytest.raises(AlignmentError):
            durations_from_alignment(path)

    def test_path_type_validates(self):
        with pytest.raises(AlignmentError):
            AlignmentPath([0, 0, 2])


class TestDistances:
    def test_zero_for_identical(self):
        assert alignment_distance([4, 5, 6], [4, 5, 6]) == 0.0

    def test_three_four_five(self):
        # zero durations are fine for the metric itself; only DurationSequence rejects them
        assert alignment_distance([3, 4], [0, 0]) == 5.0

    def test_hand_computed(self):
        assert alignment_distance([2, 3, 1], [1, 3, 3]) == pytest.approx(math.sqrt(5))

    def test_mse_examples(self):
        assert mse_metric([7, 8], [7, 8]) == 0.0
        assert mse_metric([10, 10], [12, 6]) == 10.0

    def test_normalized_norm_variant(self):
        assert normalized_l2_error([10, 10], [12, 6]) == pytest.approx(math.sqrt(20) / 2)

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            mse_metric([1, 2], [1])
        with pytest.raises(AlignmentError):
            alignment_distance([1, 2], [1, 2, 3])

    def test_empty_rejected(self):
        with pytest.raises(AlignmentError):
            mse_metric([], [])


@settings(max_examples=300, deadline=None)
@given(durations_st)
def test_round_trip_and_monotonic(d):
    path = expand(d, phonemes(len(d)))
    assert len(path) == sum(d)
    steps = np.diff(path.frame_to_phoneme)
    assert set(steps.tolist()) <= {0, 1}
    assert durations_from_alignment(path).durations == tuple(d)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_metric_axioms(data):
    n = data.draw(st.integers(1, 50))
    a = data.draw(st.lists(st.integers(1, 60), min_size=n, max_size=n))
    b = data.draw(st.lists(st.integers(1, 60), min_size=n, max_size=n))
    m = mse_metric(a, b)
    assert m >= 0
    assert (m == 0) == (a == b)
    assert m == mse_metric(b, a)
    assert alignment_distance(a, b) ** 2 == pytest.approx(n * m, rel=1e-12)


class TestAllocateFrames:
    def test_proportional(self):
        assert allocate_frames([10, 10], 30).tolist() == [15, 15]

    def test_largest_remainder(self):
        # 61 * [1/6, 2/6, 3/6] = 10.17, 20.33, 30.5 -> floors sum to 60, +1 to the largest remainder
        assert allocate_frames([10, 20, 30], 61).tolist() == [10, 20, 31]

    def test_minimum_frames_enforced(self):
        out = allocate_frames([100, 0.001, 0.001], 10)
        assert out.sum() == 10 and out.min() >= 1

    def test_too_few_frames(self):
        with pytest.raises(AlignmentError):
            allocate_frames([1, 1, 1], 2)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0, 100), min_size=1, max_size=60), st.integers(0, 500))
    def test_sum_exact(self, w, extra):
        total = len(w) + extra
        out = allocate_frames(w, total)
        assert out.sum() == total and out.min() >= 1


def test_types_reject_invalid():
    with pytest.raises(AlignmentError):
        PhonemeSequence([], [])
    with pytest.raises(AlignmentError):
        PhonemeSequence(["a"], [5], vocab_size=3)
    with pytest.raises(AlignmentError):
        DurationSequence([1.5])
    assert DurationSequence([2, 3]).total == 5


@pytest.mark.parametrize("w", [[2.2250738585072014e-308], [5e-324, 5e-324], [1.7e308, 1.7e308, 1.0]])
def test_allocate_extreme_weights(w):
    out = allocate_frames(w, len(w) + 3)
    assert out.sum() == len(w) + 3 and out.min() >= 1
