import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gasket_bvp.dyadic import DyadicSequence, words
from gasket_bvp.harmonics import (HaarSpectrum, energy_h0, energy_h0_with_error, energy_h1,
                                  energy_h_omega, energy_report, eval_h0, eval_h1, eval_h_omega,
                                  psi_on_pieces, synthesize)
from gasket_bvp.mesh import Domain, solve_dirichlet_graph

X_ONE = DyadicSequence.arithmetic(1, 1, 20)


def test_psi_orthonormal():
    depth = 4
    basis = [np.ones(2**depth)] + [psi_on_pieces(w, depth) for m in range(depth) for w in words(m)]
    gram = np.array([[a @ b for b in basis] for a in basis]) / 2**depth
    assert np.allclose(gram, np.eye(len(basis)))


def test_spectrum_boundary_round_trip():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=8)
    s = HaarSpectrum.from_boundary(vals, a=0.5)
    assert np.allclose(s.boundary_values(3), vals)
    back = HaarSpectrum.from_json(s.to_json())
    assert back.a == 0.5 and back.coeffs == s.coeffs
    with pytest.raises(ValueError):
        HaarSpectrum.from_boundary(np.ones(6))


def test_spectrum_arithmetic():
    s = HaarSpectrum(1, 2, {"1": 3}) + HaarSpectrum(0, 1, {(1,): 1, "": 2}).scaled(2)
    assert (s.a, s.b) == (1, 4) and s.coeffs == {(1,): 5.0, (): 4.0}
    assert s.max_length == 1


def test_golden_energies():
    assert energy_h0(X_ONE) == pytest.approx(7 / 3, abs=1e-12)
    assert energy_h0_with_error(X_ONE)[1] < 1e-12
    assert energy_h1(X_ONE) == pytest.approx(35 / 8, abs=1e-12)
    assert energy_h_omega(X_ONE, "1") == pytest.approx(175 / 12, abs=1e-12)
    assert energy_h_omega(X_ONE, "") == energy_h1(X_ONE)


def test_h0_boundary_values():
    seq = DyadicSequence((1, 3, 4))
    f = eval_h0(seq, 7)
    dom = Domain(seq, 7)
    assert f.values[dom.apex] == 1.0
    assert np.allclose(f.values[dom.corners], 0.0)
    assert np.isnan(f.values[~dom.vertex_mask]).all()


def test_h_omega_trace_is_psi():
    seq = DyadicSequence((1, 2, 4, 5))
    dom = Domain(seq, 7)
    for w in [(), (1,), (2, 1)]:
        f = eval_h_omega(seq, w, 7)
        assert np.allclose(f.values[dom.corners], psi_on_pieces(w, dom.depth))
        assert f.values[dom.apex] == 0.0


@given(st.integers(0, 2**31))
@settings(max_examples=8, deadline=None)
def test_synthesis_is_graph_harmonic(seed):
    rng = np.random.default_rng(seed)
    seq = DyadicSequence((1, 2, 4))
    spec = HaarSpectrum.random(rng, 4, 2)
    h = synthesize(seq, spec, 7)
    dom = Domain(seq, 7)
    u = solve_dirichlet_graph(dom.mesh, dom.cell_mask, dom.boundary, h.values[dom.boundary])
    assert np.nanmax(np.abs(u - h.values)) < 1e-8


def test_synthesis_rejects_deep_words():
    with pytest.raises(ValueError):
        synthesize(DyadicSequence((1, 2)), HaarSpectrum(0, 0, {"11": 1.0}), 5)


def test_energy_report_orthogonality():
    seq = DyadicSequence((1, 3, 4, 6))
    spec = HaarSpectrum(0.3, -0.2, {"": 1.0, "2": -0.5, "12": 0.25})
    h = synthesize(seq, spec, 9)
    dom = Domain(seq, 9)
    graph = dom.mesh.energy(np.nan_to_num(h.values), cell_mask=dom.cell_mask)
    assert graph == pytest.approx(energy_report(seq, spec).exact_energy, rel=1e-10)


def test_finite_sequence_energy_is_exact_at_any_level():
    # the domain is a finite union of cells and the functions are cellwise harmonic
    seq = DyadicSequence((2, 3, 5))
    for L in (5, 7):
        dom = Domain(seq, L)
        e = dom.mesh.energy(np.nan_to_num(eval_h1(seq, L).values), cell_mask=dom.cell_mask)
        assert e == pytest.approx(energy_h1(seq), rel=1e-12)
