from fractions import Fraction

import numpy as np
import pytest

from gasket_bvp.dyadic import DyadicSequence
from gasket_bvp.extension import (ONE_MINUS_H0, added_energy, basis_bound_constant, extend,
                                  extend_basis, finite_domain, glue, growth_csv, minimal_extension,
                                  obstruction_experiment, operator_norm_ratio, trace)
from gasket_bvp.harmonics import HaarSpectrum, eval_h0, h_omega_nodes, synthesize
from gasket_bvp.mesh import MeshFunction
from gasket_bvp.ratios import m0_levels

ODD = DyadicSequence((1, 3, 5, 7))


def test_finite_domain_drops_pattern():
    dom = finite_domain(DyadicSequence.arithmetic(1, 2, 10), 6)
    assert not dom.seq.is_patterned
    assert dom.seq.exponents == (1, 3, 5)


def test_added_energy_exact_values():
    assert added_energy(ODD, (), exact=True) == 8 * Fraction(5, 3) ** 2
    assert added_energy(DyadicSequence((3, 5, 7)), ONE_MINUS_H0, exact=True) == 8 * Fraction(5, 3) ** 4


def test_added_energy_level_independent():
    a = added_energy(ODD, (1,))
    b = added_energy(ODD, (1,), level=ODD.exponents[-1] + 3)
    assert a == pytest.approx(b, rel=1e-12)


def test_extension_matches_upper_and_trace():
    spec = HaarSpectrum(0.4, -0.3, {"": 1.0, "1": 0.5, "21": -0.2})
    ext = extend(ODD, spec, 8)
    up = synthesize(ODD, spec, 8, ext.domain.depth).values
    mask = ext.domain.vertex_mask
    assert np.allclose(ext.function.values[mask], up[mask])
    assert np.isfinite(ext.function.values).all()
    tr = trace(ext.function, ext.domain)
    assert tr.coeffs[(2, 1)] == pytest.approx(-0.2)
    assert operator_norm_ratio(ODD, spec, 8) == pytest.approx(ext.energy_total / ext.energy_upper)


def test_extension_of_constant_is_constant():
    ext = extend(ODD, HaarSpectrum(2.0, 2.0), 8)
    assert np.allclose(ext.function.values, 2.0)
    assert ext.energy_total == pytest.approx(0.0, abs=1e-10)


def test_extension_is_linear():
    s1 = HaarSpectrum(1.0, 0.0, {"2": 1.0})
    s2 = HaarSpectrum(0.0, 0.5, {"": -1.0})
    a = extend(ODD, s1, 8).function.values
    b = extend(ODD, s2, 8).function.values
    c = extend(ODD, s1 + s2.scaled(3), 8).function.values
    assert np.allclose(c, a + 3 * b)


def test_consecutive_run_rejected():
    with pytest.raises(ValueError):
        extend_basis(DyadicSequence((1, 2, 3)), (), 5)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_bound_constant(N):
    seq = DyadicSequence(tuple(range(1, N)) + (N + 1,))
    ratio = extend_basis(seq, (), seq.exponents[-1] + 1).energy_total / (5 / 3) ** seq.exponents[0]
    assert ratio <= basis_bound_constant(N) * (1 + 1e-12)


def test_glue_strips():
    seq = DyadicSequence((1, 3, 4, 6))
    dom = finite_domain(seq, 8)
    g = glue(eval_h0(seq, 8), MeshFunction(dom.mesh, np.zeros(dom.mesh.n_vertices)), dom)
    assert g.energy_total == pytest.approx(g.energy_upper + g.energy_lower)
    assert len(g.strip) == dom.depth
    assert "strip" in g.to_dict()
    with pytest.raises(ValueError):
        glue(eval_h0(seq, 8), MeshFunction(dom.mesh, np.ones(dom.mesh.n_vertices)), dom)


def test_obstruction_growth():
    rows = obstruction_experiment(range(2, 6))
    ratios = [b.e_min / a.e_min for a, b in zip(rows, rows[1:])]
    assert all(1.3 < r < 2.0 for r in ratios)
    assert ratios == sorted(ratios)
    csv = growth_csv(rows)
    assert csv.splitlines()[0] == "N,E_min,ratio" and len(csv.splitlines()) == 5
    with pytest.raises(ValueError):
        obstruction_experiment([1])


def test_minimal_extension_level_independent():
    seq = DyadicSequence((1, 2, 3))
    nodes = lambda d: h_omega_nodes(m0_levels(d.seq), (), d.depth)
    e = [minimal_extension(seq, nodes, L)[3] for L in (3, 5)]
    assert e[0] == pytest.approx(e[1], rel=1e-10)
