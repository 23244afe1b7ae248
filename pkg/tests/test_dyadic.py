import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gasket_bvp.dyadic import (DyadicSequence, expansion_from_value, hausdorff_dimension,
                               nonconsecutive_bound, parse_word, parse_x_spec, shift_normalized,
                               tilde_F, tilde_tilde_F, word_index, words)

increasing = st.lists(st.integers(1, 50), min_size=1, max_size=20, unique=True).map(sorted)


def test_expansion_of_dyadic_rational():
    seq = expansion_from_value(0.65625)
    assert seq.exponents == (1, 3, 5)
    assert seq.partial_sum() == Fraction(21, 32)


def test_one_is_patterned():
    seq = expansion_from_value(1.0, 5)
    assert seq.exponents == (1, 2, 3, 4, 5)
    assert seq.is_patterned
    assert seq.extended(8).exponents[-1] == 8


@given(increasing)
def test_expansion_round_trip(exps):
    seq = DyadicSequence(tuple(exps))
    back = expansion_from_value(float(seq.partial_sum()), 64)
    assert back.exponents == seq.exponents


@given(increasing, st.integers(0, 5))
def test_shift_drops_and_renormalizes(exps, times):
    seq = DyadicSequence(tuple(exps))
    if times >= seq.depth:
        with pytest.raises(ValueError):
            shift_normalized(seq, times)
        return
    y = shift_normalized(seq, times)
    base = exps[times - 1] if times else 0
    assert y.exponents == tuple(n - base for n in exps[times:])
    # 2^{n_m} times the remainder of x beyond x_[m]
    assert y.partial_sum() == 2**base * (seq.partial_sum() - seq.partial_sum(times))


def test_periodic_and_arithmetic():
    assert DyadicSequence.arithmetic(1, 2, 4).exponents == (1, 3, 5, 7)
    assert DyadicSequence.periodic([1, 2], 5).exponents == (1, 3, 4, 6, 7)
    p = DyadicSequence.periodic([1, 2], 3)
    assert p.extended(6).exponents == DyadicSequence.periodic([1, 2], 6).exponents


def test_invalid_sequences():
    with pytest.raises(ValueError):
        DyadicSequence((3, 2))
    with pytest.raises(ValueError):
        DyadicSequence(())
    with pytest.raises(ValueError):
        DyadicSequence((1, 2)).extended(4)
    with pytest.raises(ValueError):
        expansion_from_value(0.0)


def test_words_and_addresses():
    assert list(words(2)) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert [word_index(w) for w in words(3)] == list(range(8))
    assert parse_word("12") == parse_word("1,2") == (1, 2)
    with pytest.raises(ValueError):
        parse_word("0")
    seq = DyadicSequence((2, 3, 6))
    assert tilde_F(seq, (1, 2, 1)) == (0, 1, 2, 0, 0, 1)
    assert tilde_tilde_F(seq, (1, 2, 1)) == (0, 1, 2, 0, 0, 0)
    assert tilde_tilde_F(seq, (2,)) == (0, 0)


def test_nonconsecutive_bound():
    assert nonconsecutive_bound(DyadicSequence.arithmetic(1, 2, 5)) == 2
    assert nonconsecutive_bound(DyadicSequence.periodic([1, 1, 3], 5)) == 4
    assert nonconsecutive_bound(DyadicSequence.arithmetic(1, 1, 5)) is None
    assert nonconsecutive_bound(DyadicSequence((1, 2, 3, 5, 6, 9))) == 4
    assert nonconsecutive_bound(DyadicSequence((1, 3, 4))) is None


def test_hausdorff_dimension():
    assert math.isclose(hausdorff_dimension(2), math.log2((1 + math.sqrt(5)) / 2), abs_tol=1e-10)
    assert hausdorff_dimension(3) > hausdorff_dimension(2)
    assert hausdorff_dimension(50) > 0.999


@pytest.mark.parametrize("spec, exps", [
    ("0.65625", (1, 3, 5)), ("1,3,5", (1, 3, 5)), ("[2,4]", (2, 4)),
    ("arith:2,3", (2, 5, 8)), ("periodic:1,2", (1, 3, 4)),
])
def test_parse_x_spec(spec, exps):
    assert parse_x_spec(spec, 3).exponents == exps
