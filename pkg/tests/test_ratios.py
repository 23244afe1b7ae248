import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gasket_bvp.dyadic import DyadicSequence, shift_normalized
from gasket_bvp.ratios import (RatioTriple, dtn_multiplier, m0, m0_exact, m0_levels, m0_sweep,
                               periodic_fixed_point, ratio_table, ratio_triple, shift_residual)

finite = st.lists(st.integers(1, 40), min_size=2, max_size=20, unique=True).map(
    lambda e: DyadicSequence(tuple(sorted(e))))


def test_x_equals_one():
    x = DyadicSequence.arithmetic(1, 1, 10)
    tr = ratio_triple(x)
    assert math.isclose(tr.m0, 0.3, abs_tol=1e-14)
    assert math.isclose(tr.m1, 91 / 160, abs_tol=1e-14)
    assert math.isclose(tr.m2, 21 / 160, abs_tol=1e-14)
    assert math.isclose(dtn_multiplier(x, 0), 35 / 8, rel_tol=1e-13)


def test_periodic_fixed_point_is_fixed():
    # x = 1 has gap cycle (1,) and m0 = 3/10
    assert math.isclose(periodic_fixed_point((1,)), 0.3, abs_tol=1e-15)
    seq = DyadicSequence.periodic([1, 3], 30)
    lv = m0_levels(seq)
    assert math.isclose(lv[0], lv[2], abs_tol=1e-14)


def test_truncations_converge_to_patterned_value():
    pat = DyadicSequence.arithmetic(1, 2, 4)
    exact = m0(pat)[0]
    errs = [abs(m0(pat.extended(k).truncated())[0] - exact) for k in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-10


@given(finite)
@settings(max_examples=200)
def test_identities(seq):
    v, err = m0(seq)
    assert 0.0 <= v <= 0.3
    assert abs(RatioTriple.from_m0(v).total - 1) < 1e-12
    assert shift_residual(seq) <= max(10 * err, 1e-15)


@given(finite)
@settings(max_examples=50)
def test_exact_agrees_with_float(seq):
    assert isinstance(m0_exact(seq), Fraction)
    assert abs(float(m0_exact(seq)) - m0(seq)[0]) < 1e-14


@given(finite)
@settings(max_examples=50)
def test_levels_are_shifts(seq):
    lv = m0_levels(seq)
    for j in range(1, seq.depth - 1):
        assert lv[j] == pytest.approx(m0_levels(shift_normalized(seq, j))[0], abs=1e-15)


def test_ratio_table_shape_and_json():
    t = ratio_table(DyadicSequence((1, 3, 5, 7)))
    d = t.to_dict()
    assert t.depth == 4 and len(d["levels"]) == 4
    assert d["levels"][-1]["m0"] == 0.0
    assert '"levels"' in t.to_json()


def test_short_sequence_rejected():
    with pytest.raises(ValueError):
        m0(DyadicSequence((2,)))
    with pytest.raises(ValueError):
        dtn_multiplier(DyadicSequence((1, 2)), 2)


def test_sweep_bounds():
    vals = m0_sweep(np.linspace(0.01, 1, 100))
    assert vals.shape == (100,)
    assert vals.min() >= 0 and vals.max() <= 0.3 + 1e-15
