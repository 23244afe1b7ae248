"""Gluing across the cut, traces, and extension of harmonic functions below the cut.

All constructions use the finite model of the domain: the cut is represented by
the ``2^K`` corners ``p_w`` (``|w| = K``), which are the only vertices the
domain shares with the region below it.

Extension rule for a trace that equals the constant ``c`` on ``S(x)`` inside the
cell ``Q = tilde_F_tau(SG)`` (``|tau| = k``):

* if the next gap ``n_{k+1} - n_k`` is at least 2, or the sequence ends at ``k``,
  the part of ``Q F_0`` below the cut is set to ``c`` and ``Q F_1``, ``Q F_2``
  are harmonic with value ``c`` at the top and 0 at the bottom corners;
* if the next gap is 1, ``Q F_0`` lies in the domain and the rule is applied to
  the two cells ``Q F_1 = tilde_F_{tau 1}(SG)`` and ``Q F_2 = tilde_F_{tau 2}(SG)``.

``h_w`` uses ``c = +-2^{m/2}`` on ``tau = w1, w2``; ``1 - h0`` uses ``c = 1`` on
``tau = 1, 2``.  Everything else below the cut is 0.
"""
from __future__ import annotations

import csv
import io
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicSequence, nonconsecutive_bound, parse_word, tilde_F, words
from .harmonics import HaarSpectrum, h0_nodes, h_omega_nodes, m0_levels, spectrum_nodes
from .mesh import Domain, MeshFunction, solve_dirichlet_graph
from .ratios import RATE

ONE_MINUS_H0 = "1-h0"
TRACE_TOL = 1e-10
OBSTRUCTION_MAX_N = 8


def finite_domain(seq: DyadicSequence, level: int, depth: int | None = None) -> Domain:
    """Domain built on the finite truncation of ``seq`` at the resolved depth."""
    dom = Domain(seq, level, depth)
    if dom.seq.is_patterned or dom.seq.depth != dom.depth:
        dom = Domain(dom.seq.truncated(dom.depth), level)
    return dom


def lower_cells(dom: Domain) -> np.ndarray:
    return ~dom.cell_mask


# -- gluing -----------------------------------------------------------------------------

@dataclass
class GluedFunction:
    upper: MeshFunction
    lower: MeshFunction
    combined: MeshFunction
    energy_total: float
    energy_upper: float
    energy_lower: float
    strip: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"energy_total": self.energy_total, "energy_upper": self.energy_upper,
                "energy_lower": self.energy_lower, "strip": self.strip}


def _cell_energy(values, cells, scale) -> float:
    v = values[cells]
    d = (v[:, 0] - v[:, 1]) ** 2 + (v[:, 0] - v[:, 2]) ** 2 + (v[:, 1] - v[:, 2]) ** 2
    return float(scale * d.sum())


def glue(upper: MeshFunction, lower: MeshFunction, dom: Domain, tol: float = TRACE_TOL) -> GluedFunction:
    """Combine a function above the cut with one below it and split the energy.

    For each ``m`` the report lists the coarse strip energy
    ``(5/3)^{n_m} sum`` over the corners of the cells ``tilde_F_w(SG)``, ``|w| = m``,
    and the level-``L`` energies of ``B_m^+``, ``S_m^+``, ``S_m^-`` and ``B_m^-``.
    """
    mesh = dom.mesh
    c = dom.corners
    mismatch = np.max(np.abs(upper.values[c] - lower.values[c]))
    if not mismatch <= tol:
        raise ValueError(f"traces disagree on the cut by {mismatch:.3e}")
    low = ~dom.cell_mask
    vals = np.where(dom.vertex_mask, upper.values, lower.values)
    combined = MeshFunction(mesh, vals, "u")
    e_up = mesh.energy(vals, cell_mask=dom.cell_mask)
    e_low = mesh.energy(vals, cell_mask=low)
    strip = []
    for m in range(1, dom.depth + 1):
        n = dom.exponents[m - 1]
        cells = np.array([mesh.cell_index(tilde_F(dom.seq, w)) for w in words(m)])
        coarse = _cell_energy(vals, mesh.cells[n][cells], RATE**n)
        s = dom.strip_cells(m)
        up = dom.upper_cells(m)
        strip.append({
            "m": m,
            "coarse_strip": coarse,
            "B_plus": mesh.energy(vals, cell_mask=up),
            "S_plus": mesh.energy(vals, cell_mask=s & dom.cell_mask),
            "S_minus": mesh.energy(vals, cell_mask=s & low),
            "B_minus": mesh.energy(vals, cell_mask=~(up | s)),
        })
    return GluedFunction(upper, lower, combined, e_up + e_low, e_up, e_low, strip)


def trace(upper: MeshFunction, dom: Domain, m: int | None = None) -> HaarSpectrum:
    """Haar spectrum of the boundary values read at the ``2^m`` corners ``p_w``."""
    m = dom.depth if m is None else m
    if not 0 <= m <= dom.depth:
        raise ValueError(f"trace depth {m} exceeds the domain depth {dom.depth}")
    vals = upper.values[dom.node_ids[m]]
    if not np.all(np.isfinite(vals)):
        raise ValueError("function is undefined at the cut corners")
    return HaarSpectrum.from_boundary(vals, a=float(upper.values[dom.apex]))


# -- extension operator ------------------------------------------------------------------

def _apply_rule(values, dom: Domain, tau: tuple, c: float):
    mesh = dom.mesh
    seq = dom.seq
    k = len(tau)
    q = tilde_F(seq, tau)
    n = seq.exponents[k - 1]
    if n + 1 > mesh.level:
        raise ValueError(f"mesh level {mesh.level} cannot resolve the cells below n_{k} = {n}")
    if k < dom.depth and seq.exponents[k] - n == 1:
        _apply_rule(values, dom, tau + (1,), c)
        _apply_rule(values, dom, tau + (2,), c)
        return
    lo, hi = mesh.cell_range(q + (0,))
    below = np.zeros(mesh.n_cells, dtype=bool)
    below[lo:hi] = ~dom.cell_mask[lo:hi]
    vids = np.unique(mesh.cells[mesh.level][below].ravel())
    shared = ~dom.vertex_mask[vids] | np.isin(vids, dom.corners)
    values[vids[shared]] = c
    for letter in (1, 2):
        idx = mesh.cell_index(q + (letter,))
        corners = mesh.cells[n + 1][idx]
        values[corners] = (c, 0 * c, 0 * c)
        mesh.fill_cells(values, n + 1, [idx])


def _lower_values(dom: Domain, word, exact: bool = False) -> np.ndarray:
    """Values below the cut (0 on the domain's own vertices except the shared corners)."""
    if exact:
        values = np.full(dom.mesh.n_vertices, Fraction(0), dtype=object)
    else:
        values = np.zeros(dom.mesh.n_vertices)
    one = Fraction(1) if exact else 1.0
    if word == ONE_MINUS_H0:
        for letter in (1, 2):
            _apply_rule(values, dom, (letter,), one)
        return values
    w = parse_word(word)
    if exact and len(w) % 2:
        raise ValueError("exact mode needs a rational sign level 2^{m/2} (even |w|)")
    c = 2 ** (len(w) // 2) * one if exact else 2 ** (len(w) / 2)
    _apply_rule(values, dom, w + (1,), c)
    _apply_rule(values, dom, w + (2,), -c)
    return values


def _require_bound(seq: DyadicSequence) -> int:
    bound = nonconsecutive_bound(seq)
    if bound is None:
        raise ValueError(f"the nonconsecutive condition cannot be certified for {seq}")
    return bound


@dataclass
class ExtendedFunction:
    function: MeshFunction
    domain: Domain
    energy_upper: float
    energy_added: float

    @property
    def energy_total(self) -> float:
        return self.energy_upper + self.energy_added


def _upper_nodes(dom: Domain, word):
    levels = m0_levels(dom.seq)
    if word == ONE_MINUS_H0:
        return [1 - v for v in h0_nodes(levels, dom.depth)]
    return h_omega_nodes(levels, word, dom.depth)


def _assemble(dom: Domain, upper_vals, lower_vals, name) -> ExtendedFunction:
    mesh = dom.mesh
    c = dom.corners
    if np.max(np.abs(upper_vals[c] - lower_vals[c])) > TRACE_TOL:
        raise AssertionError("extension does not match the trace on the cut")
    vals = np.where(dom.vertex_mask, upper_vals, lower_vals)
    e_up = mesh.energy(vals, cell_mask=dom.cell_mask)
    e_low = mesh.energy(vals, cell_mask=~dom.cell_mask)
    return ExtendedFunction(MeshFunction(mesh, vals, name), dom, e_up, e_low)


def extend_basis(seq: DyadicSequence, word, level: int, depth: int | None = None) -> ExtendedFunction:
    """Extension of ``h_w`` (or of ``1 - h0`` for ``word = "1-h0"``) to the whole gasket."""
    dom = finite_domain(seq, level, depth)
    _require_bound(dom.seq)
    if word != ONE_MINUS_H0 and len(parse_word(word)) >= dom.depth:
        raise ValueError(f"word {word!r} is too deep for domain depth {dom.depth}")
    up = dom.fill_nodes(_upper_nodes(dom, word))
    low = _lower_values(dom, word)
    name = "ext_" + ("1-h0" if word == ONE_MINUS_H0 else "".join(map(str, parse_word(word))) or "empty")
    return _assemble(dom, up, low, name)


def extend(seq: DyadicSequence, spectrum: HaarSpectrum, level: int, depth: int | None = None) -> ExtendedFunction:
    """``T u = a T(h0) + b T(1 - h0) + sum c_w T(h_w)`` with ``T(h0) = 1 - T(1 - h0)``."""
    dom = finite_domain(seq, level, depth)
    _require_bound(dom.seq)
    up = dom.fill_nodes(spectrum_nodes(m0_levels(dom.seq), spectrum, dom.depth))
    low = (spectrum.b - spectrum.a) * _lower_values(dom, ONE_MINUS_H0) + spectrum.a
    for w, c in spectrum.coeffs.items():
        low += c * _lower_values(dom, w)
    return _assemble(dom, up, low, "Tu")


def added_energy(seq: DyadicSequence, word, level: int | None = None, exact: bool = False):
    """Energy of the extension below the cut (rational when ``exact``).

    The default level ``n_K + 1`` is the coarsest one that resolves every
    constructed cell; the extension is piecewise harmonic there, so finer
    levels give the same value.
    """
    if level is None:
        s = seq if not seq.is_patterned else seq.truncated()
        level = s.exponents[-1] + 1
    dom = finite_domain(seq, level)
    _require_bound(dom.seq)
    low = _lower_values(dom, word, exact)
    return dom.mesh.energy(low, cell_mask=~dom.cell_mask)


def operator_norm_ratio(seq: DyadicSequence, spectrum: HaarSpectrum, level: int) -> float:
    """``E(Tu) / E(u)`` for the extension of the synthesized function."""
    ext = extend(seq, spectrum, level)
    return ext.energy_total / ext.energy_upper


def basis_bound_constant(N: int) -> float:
    """Upper constant of ``E(T h_w) <= C(N) 2^m (5/3)^{n_{m+1}}`` for this construction.

    The domain part contributes at most 6; after a run of ``j <= N - 2`` unit gaps
    the ``2^{j+1}`` leaf cells add ``8 (5/3) (10/3)^j``.
    """
    return 6.0 + 8.0 * RATE * (2 * RATE) ** (N - 2)


# -- obstruction ---------------------------------------------------------------------------

@dataclass
class ObstructionRow:
    N: int
    level: int
    energy_upper: float
    energy_lower: float
    residual: float

    @property
    def e_min(self) -> float:
        return self.energy_upper + self.energy_lower


def minimal_extension(seq: DyadicSequence, upper_nodes, level: int, method: str = "direct"):
    """Energy-minimizing extension below the cut of the function with the given node tree.

    Dirichlet data only at the cut corners; every other lower vertex, including
    the bottom corners of the gasket, is free (natural condition).
    """
    dom = finite_domain(seq, level)
    up = dom.fill_nodes(upper_nodes(dom))
    low_mask = ~dom.cell_mask
    u = solve_dirichlet_graph(dom.mesh, low_mask, dom.corners, up[dom.corners], method=method)
    vals = np.where(dom.vertex_mask, up, u)
    e_up = dom.mesh.energy(vals, cell_mask=dom.cell_mask)
    e_low = dom.mesh.energy(vals, cell_mask=low_mask)
    # Euler-Lagrange: zero graph Laplacian at free lower vertices (natural where edges are missing)
    free = dom.mesh.cell_vertex_mask(low_mask)
    free[dom.corners] = False
    lap = dom.mesh.graph_laplacian(low_mask) @ np.nan_to_num(vals)
    residual = float(np.max(np.abs(lap[free]))) if free.any() else 0.0
    return dom, MeshFunction(dom.mesh, vals, "u_min"), e_up, e_low, residual


def obstruction_experiment(Ns, level_offset: int = 0, method: str = "direct") -> list[ObstructionRow]:
    """Minimal extension energy of ``h1`` for ``x`` with exponents ``1, 2, ..., N``."""
    rows = []
    for N in Ns:
        if not 2 <= N <= OBSTRUCTION_MAX_N:
            raise ValueError(f"N must lie in [2, {OBSTRUCTION_MAX_N}]")
        seq = DyadicSequence(tuple(range(1, N + 1)))
        level = N + level_offset
        _, _, e_up, e_low, res = minimal_extension(
            seq, lambda d: h_omega_nodes(m0_levels(d.seq), (), d.depth), level, method)
        rows.append(ObstructionRow(N, level, e_up, e_low, res))
    return rows


def growth_csv(rows: list[ObstructionRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["N", "E_min", "ratio"])
    prev = None
    for r in rows:
        ratio = "" if prev is None else repr(r.e_min / prev)
        w.writerow([r.N, repr(r.e_min), ratio])
        prev = r.e_min
    return out.getvalue()
