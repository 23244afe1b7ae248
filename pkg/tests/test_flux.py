import numpy as np
import pytest

from gasket_bvp.dyadic import DyadicSequence
from gasket_bvp.flux import (BoundaryFlux, dn_at_apex, finite_difference_flux, gauss_green_check,
                             gauss_green_residual, normal_derivative, weighted_coefficient_sum)
from gasket_bvp.harmonics import HaarSpectrum, eval_h_omega, psi_on_pieces, synthesize
from gasket_bvp.mesh import Domain, MeshFunction
from gasket_bvp.ratios import dtn_multiplier

X_ONE = DyadicSequence.arithmetic(1, 1, 20)


def test_x_one_flux():
    f = normal_derivative(X_ONE, HaarSpectrum(0, 0, {"": 1.0}))
    assert f.coeffs[()] == pytest.approx(35 / 8)
    assert weighted_coefficient_sum(X_ONE, HaarSpectrum(0, 0, {"": 1.0}))[0] == pytest.approx(25 / 9)


def test_flux_json_round_trip():
    f = normal_derivative(DyadicSequence((1, 3, 4)), HaarSpectrum(1, 0.5, {"1": 2.0}))
    g = BoundaryFlux.from_dict(f.to_dict())
    assert g == f
    assert f.l2_squared() == pytest.approx(f.constant_part**2 + f.coeffs[(1,)] ** 2)


def test_constants_have_zero_flux():
    f = normal_derivative(DyadicSequence((2, 3)), HaarSpectrum(1.0, 1.0))
    assert f.constant_part == 0 and f.dn_at_q0 == 0


@pytest.mark.parametrize("w", [(), (1,), (2, 1)])
def test_finite_difference_is_level_independent(w):
    seq = DyadicSequence((1, 2, 4, 5))
    dom = Domain(seq, 8)
    f = eval_h_omega(seq, w, 8)
    mult = dtn_multiplier(seq, len(w))
    for m in range(len(w) + 1, dom.depth + 1):
        assert np.allclose(finite_difference_flux(f, dom, m), mult * psi_on_pieces(w, m), rtol=1e-10)


def test_gauss_green():
    rng = np.random.default_rng(0)
    seq = DyadicSequence((1, 3, 4))
    dom = Domain(seq, 8)
    spec = HaarSpectrum(0.7, -0.1, {"": 1.0, "2": 0.3, "21": -0.4})
    v = MeshFunction(dom.mesh, np.where(dom.vertex_mask, rng.normal(size=dom.mesh.n_vertices), np.nan))
    assert gauss_green_check(seq, spec, v, 8) < 1e-8
    h = synthesize(seq, spec, 8)
    res, e = gauss_green_residual(h, v, dom)
    assert res < 1e-8 * max(1, abs(e))
    assert dn_at_apex(h, dom) == pytest.approx(normal_derivative(seq, spec).dn_at_q0)


def test_flux_level_range():
    seq = DyadicSequence((1, 2))
    dom = Domain(seq, 4)
    with pytest.raises(ValueError):
        finite_difference_flux(eval_h_omega(seq, (), 4), dom, 3)
