"""Normal derivatives on the cut and the Dirichlet-to-Neumann map.

The outward normal derivative of a harmonic ``h`` on the cut is piecewise
constant on the dyadic pieces at every truncation.  In the Haar basis the
Dirichlet-to-Neumann map is diagonal, with multiplier ``dtn_multiplier(x, |w|)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicSequence, parse_word
from .harmonics import HaarSpectrum, _word_str, psi_on_pieces
from .mesh import Domain, MeshFunction
from .ratios import RATE, dtn_multiplier, m0_levels


@dataclass
class BoundaryFlux:
    """``dn h = constant_part + sum coeffs[w] psi_w`` on the cut, plus ``dn h(q0)``."""

    constant_part: float
    coeffs: dict = field(default_factory=dict)
    dn_at_q0: float = 0.0

    def values_on_pieces(self, depth: int) -> np.ndarray:
        out = np.full(2**depth, float(self.constant_part))
        for w, c in self.coeffs.items():
            out += c * psi_on_pieces(w, depth)
        return out

    def l2_squared(self) -> float:
        """``||dn h||^2`` in ``L^2(mu)`` (Haar functions are orthonormal)."""
        return self.constant_part**2 + sum(c * c for c in self.coeffs.values())

    def to_dict(self) -> dict:
        return {"constant_part": self.constant_part, "dn_at_q0": self.dn_at_q0,
                "coeffs": [{"word": _word_str(w), "c": c} for w, c in sorted(self.coeffs.items())]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryFlux":
        return cls(float(d["constant_part"]),
                   {parse_word(e["word"]): float(e["c"]) for e in d.get("coeffs", [])},
                   float(d.get("dn_at_q0", 0.0)))


def normal_derivative(seq: DyadicSequence, spectrum: HaarSpectrum) -> BoundaryFlux:
    t = m0_levels(seq if seq.depth > 1 or not seq.is_patterned else seq.extended(2))[0]
    base = 2 * RATE ** seq.exponents[0] * (1 - t)
    coeffs = {w: dtn_multiplier(seq, len(w)) * c for w, c in spectrum.coeffs.items()}
    return BoundaryFlux(base * (spectrum.b - spectrum.a), coeffs, base * (spectrum.a - spectrum.b))


def finite_difference_flux(f: MeshFunction, dom: Domain, m: int) -> np.ndarray:
    """Level-``m`` approximant of the outward normal derivative on the ``2^m`` pieces.

    For ``m >= 1`` the value on ``S_w`` is ``2^m (5/3)^{n_m} (2 f(p_w) - f(top) - f(sibling))``
    over the ``n_m``-cell whose bottom corner is ``p_w``; for ``m = 0`` it is the
    single value ``-(5/3)^{n_1} (2 f(q0) - f(p_1) - f(p_2))``.
    """
    if not 0 <= m <= dom.depth:
        raise ValueError(f"flux level {m} needs domain depth >= {m} (have {dom.depth})")
    v = f.values
    if m == 0:
        n1 = dom.exponents[0]
        p = dom.node_ids[1]
        return np.array([-(RATE**n1) * (2 * v[dom.apex] - v[p[0]] - v[p[1]])])
    top = np.repeat(dom.node_ids[m - 1], 2)
    corners = dom.node_ids[m]
    sibling = corners.reshape(-1, 2)[:, ::-1].ravel()
    return 2**m * RATE ** dom.exponents[m - 1] * (2 * v[corners] - v[top] - v[sibling])


def dn_at_apex(f: MeshFunction, dom: Domain) -> float:
    n1 = dom.exponents[0]
    p = dom.node_ids[1]
    v = f.values
    return float(RATE**n1 * (2 * v[dom.apex] - v[p[0]] - v[p[1]]))


def gauss_green_residual(h: MeshFunction, v: MeshFunction, dom: Domain) -> tuple[float, float]:
    """``|E(h, v) - v(q0) dn h(q0) - int v dn h dmu|`` at truncation, and ``E(h, v)``.

    The boundary integral is the finite sum over the ``2^K`` pieces, with ``v``
    sampled at the corners that represent them.
    """
    e = dom.mesh.energy(np.nan_to_num(h.values), np.nan_to_num(v.values), cell_mask=dom.cell_mask)
    flux = finite_difference_flux(h, dom, dom.depth)
    rhs = v.values[dom.apex] * dn_at_apex(h, dom) + np.dot(v.values[dom.corners], flux) / 2**dom.depth
    return abs(e - rhs), e


def gauss_green_check(seq: DyadicSequence, spectrum: HaarSpectrum, v: MeshFunction,
                      level: int, depth: int | None = None) -> float:
    """Residual of the Gauss-Green formula using the closed-form flux."""
    from .harmonics import synthesize

    dom = Domain(seq, level, depth)
    h = synthesize(dom.seq, spectrum, level, dom.depth)
    flux = normal_derivative(dom.seq, spectrum)
    e = dom.mesh.energy(np.nan_to_num(h.values), np.nan_to_num(v.values), cell_mask=dom.cell_mask)
    bnd = np.dot(v.values[dom.corners], flux.values_on_pieces(dom.depth)) / 2**dom.depth
    return abs(e - v.values[dom.apex] * flux.dn_at_q0 - bnd)


def weighted_coefficient_sum(seq: DyadicSequence, spectrum: HaarSpectrum) -> tuple[float, bool]:
    """``sum 2^{2m} (5/3)^{2 n_{m+1}} |c_w|^2`` and whether it is finite."""
    total = 0.0
    for w, c in spectrum.coeffs.items():
        m = len(w)
        s = seq if m < seq.depth else seq.extended(m + 1)
        total += 4.0**m * RATE ** (2 * s.exponents[m]) * c * c
    return total, bool(np.isfinite(total))
