from fractions import Fraction

import numpy as np
import pytest

from gasket_bvp.dyadic import DyadicSequence
from gasket_bvp.mesh import (Domain, GasketMesh, MeshFunction, SolverError, build_mesh,
                             solve_dirichlet_graph)


@pytest.mark.parametrize("L", range(0, 6))
def test_counts(L):
    m = build_mesh(L)
    assert m.n_vertices == 3 * (3**L + 1) // 2
    assert m.n_cells == 3**L
    assert len(m.edges) == m.n_edges == 3 ** (L + 1)
    # coarse vertices come first
    assert np.all(m.birth[: m.level_vertices(L - 1)] < L) if L else True


def test_level_limits():
    with pytest.raises(ValueError):
        GasketMesh(-1)
    with pytest.raises(ValueError):
        GasketMesh(99)


def test_harmonic_extension_preserves_energy():
    m = build_mesh(6)
    coarse = np.array([1.0, 0.0, 0.0])
    f = m.extend_from(coarse, 0)
    assert m.energy(f) == pytest.approx(2.0, rel=1e-13)
    assert np.allclose(m.laplacian(f)[3:], 0, atol=1e-8)


def test_exact_energy_is_rational():
    m = build_mesh(3)
    f = np.array([Fraction(i % 3) for i in range(m.n_vertices)], dtype=object)
    e = m.energy(f)
    assert isinstance(e, Fraction)
    assert float(e) == pytest.approx(m.energy(f.astype(float)), rel=1e-14)


def test_integrate_constant():
    m = build_mesh(4)
    assert m.integrate(np.ones(m.n_vertices)) == pytest.approx(1.0)
    assert m.vertex_weights().sum() == pytest.approx(1.0)


@pytest.mark.parametrize("method", ["direct", "cg", "exact"])
def test_solvers_agree_on_full_gasket(method):
    m = build_mesh(4)
    b = np.arange(3)
    u = solve_dirichlet_graph(m, None, b, np.array([1.0, 0.0, 0.0]), method=method)
    ref = m.extend_from(np.array([1.0, 0.0, 0.0]), 0)
    assert np.max(np.abs(u - ref)) < 1e-9


def test_solver_with_forcing_matches_laplacian():
    m = build_mesh(5)
    F = np.ones(m.n_vertices)
    u = solve_dirichlet_graph(m, None, np.arange(3), np.zeros(3), forcing=F)
    free = np.arange(3, m.n_vertices)
    assert np.allclose(-m.laplacian(u)[free], F[free], atol=1e-8)
    assert np.all(u[free] > 0)


def test_solver_errors():
    m = build_mesh(2)
    with pytest.raises(SolverError):
        solve_dirichlet_graph(m, None, np.array([], dtype=int), np.array([]))


def test_csv_round_trip():
    m = build_mesh(3)
    vals = np.linspace(0, 1, m.n_vertices)
    vals[5] = np.nan
    f = MeshFunction(m, vals, "u")
    g = MeshFunction.from_csv(f.to_csv(), m)
    assert g.name == "u"
    assert np.array_equal(np.isnan(g.values), np.isnan(vals))
    assert np.allclose(g.values[~np.isnan(vals)], vals[~np.isnan(vals)])


def test_domain_structure():
    seq = DyadicSequence((1, 3, 4))
    dom = Domain(seq, 6)
    assert dom.depth == 3
    assert [len(n) for n in dom.node_ids] == [1, 2, 4, 8]
    assert len(dom.boundary) == 9
    assert dom.cell_mask.sum() == sum(len(b) * 3 ** (6 - n) for b, n in zip(dom.big_cells, seq.exponents))
    assert not dom.interior[dom.boundary].any()
    # corners sit on the cut line
    assert np.allclose(dom.mesh.depth[dom.corners], float(seq.partial_sum()))
    with pytest.raises(ValueError):
        Domain(DyadicSequence((3, 5)), 2)
