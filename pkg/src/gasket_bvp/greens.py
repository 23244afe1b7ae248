"""Green's function of the domain above the cut, assembled from piecewise harmonic splines.

``G^m(s, t) = sum_{k=1}^{n_m} sum_{z, z'} g_x(z, z') phi_z^k(s) phi_{z'}^k(t)``, with
``z, z'`` running over the vertices born at level ``k`` inside the domain.
Away from the cut the splines and weights are the standard ones.  A corner
``z = p_w`` with ``|w| = l`` (the set ``T^l``, born at level ``n_l``) has only one
``n_l``-cell inside the domain.  Its spline is the usual hat on that cell and
``h0`` rescaled to 1 at ``z`` on the part of ``tilde_F_w(SG)`` above the cut.

Everything is computed on the finite model of the domain (``q0`` and the
depth-``K`` corners carry the Dirichlet data), where the reproducing identity
is exact at graph level.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .dyadic import DyadicSequence, tilde_F, word_index, words
from .extension import finite_domain
from .harmonics import h0_nodes
from .mesh import Domain, MeshFunction, build_mesh
from .ratios import RATE, m0_levels

DECAY = 3.0 / 5.0


def g_standard(z: int, zp: int, k: int, mesh=None) -> float:
    """Standard weight ``g(z, z')`` at level ``k`` for vertex ids of ``mesh``.

    ``(3/10)(3/5)^k`` on the diagonal of ``V_k \\ V_{k-1}``, ``(1/10)(3/5)^k`` for distinct
    points born at level ``k`` in the same ``(k-1)``-cell, 0 otherwise.
    """
    if mesh is None:
        mesh = build_mesh(k)
    if mesh.birth[z] != k or mesh.birth[zp] != k:
        return 0.0
    if z == zp:
        return 0.3 * DECAY**k
    return 0.1 * DECAY**k if _same_parent(mesh, z, zp, k) else 0.0


def g_standard_value(k: int, diagonal: bool) -> float:
    return (0.3 if diagonal else 0.1) * DECAY**k


def g_modified(m0: float, n: int, diagonal: bool) -> float:
    """Weight for corners in ``T^l`` (``n = n_l``, ``m0 = m0(y_{l-1})``)."""
    if diagonal:
        return (m0 + m0 * m0) / (2 * m0 + 1) * DECAY**n
    return m0 * m0 / (2 * m0 + 1) * DECAY**n


def g_modified_exact(m0: Fraction, n: int, diagonal: bool) -> Fraction:
    d = Fraction(3, 5) ** n
    return ((m0 + m0 * m0) if diagonal else m0 * m0) / (2 * m0 + 1) * d


def _same_parent(mesh, z, zp, k) -> bool:
    if k == 0:
        return False
    parents = mesh.mids[k - 1]
    rows = np.flatnonzero((parents == z).any(axis=1))
    return bool(np.any((parents[rows] == zp).any(axis=1)))


def g_domain(seq: DyadicSequence, l: int, diagonal: bool = True) -> float:
    """Weight for corners in ``T^l``: the diagonal or the ``n_l``-neighbour pair."""
    if l < 1 or (l >= seq.depth and not seq.is_patterned):
        raise ValueError(f"level {l} must lie in [1, {seq.depth - 1}]")
    s = seq if seq.depth >= l + 1 else seq.extended(l + 1)
    t = m0_levels(s)[l - 1]
    return g_modified(t, s.exponents[l - 1], diagonal)


def g_modified_residuals(seq: DyadicSequence, l: int) -> tuple[float, float]:
    """Residuals of ``(5/3)^{n_l} ((1+m0)/m0 g_diag - g_off) = 1`` and of the swapped combination ``= 0``."""
    if l < 1 or (l >= seq.depth and not seq.is_patterned):
        raise ValueError(f"level {l} must lie in [1, {seq.depth - 1}]")
    s = seq if seq.depth >= l + 1 else seq.extended(l + 1)
    t = m0_levels(s)[l - 1]
    n = s.exponents[l - 1]
    gd, go = g_modified(t, n, True), g_modified(t, n, False)
    r = RATE**n
    return abs(r * ((1 + t) / t * gd - go) - 1.0), abs(r * ((1 + t) / t * go - gd))


@lru_cache(maxsize=32)
def _template(depth: int):
    """Hat shape functions of a cell refined ``depth`` times: lattice offsets and 3 value columns."""
    tm = build_mesh(depth)
    vals = np.stack([tm.extend_from(np.eye(3)[c], 0) for c in range(3)], axis=1)
    return tm.lattice, vals


@dataclass
class SplineLevel:
    k: int
    vertices: np.ndarray          # spline centres (vertex ids), column order
    phi: sp.csr_matrix            # n_vertices x n_splines
    weights: sp.csr_matrix        # n_splines x n_splines, symmetric
    modified: np.ndarray          # bool per spline: centre lies in some T^l


@dataclass
class GreenKernel:
    """Truncated kernel ``G^m`` on the finite domain at mesh level ``L``."""

    domain: Domain
    m: int
    levels: list = field(default_factory=list)

    @property
    def mesh(self):
        return self.domain.mesh

    def terms(self):
        """``(k, z, z', g)`` for every nonzero weight."""
        for lev in self.levels:
            w = lev.weights.tocoo()
            for i, j, g in zip(w.row, w.col, w.data):
                yield lev.k, int(lev.vertices[i]), int(lev.vertices[j]), float(g)

    def __call__(self, s: int, t: int) -> float:
        total = 0.0
        for lev in self.levels:
            a = lev.phi[s]
            b = lev.phi[t]
            total += float((a @ lev.weights @ b.T).toarray()[0, 0])
        return total

    def slice(self, t: int) -> np.ndarray:
        """``G^m(., t)`` on all vertices (0 off the domain)."""
        out = np.zeros(self.mesh.n_vertices)
        for lev in self.levels:
            col = lev.phi[t].toarray().ravel()
            out += lev.phi @ (lev.weights @ col)
        return out

    def apply(self, rhs: np.ndarray) -> np.ndarray:
        """``sum_k Phi_k W_k Phi_k^T rhs``."""
        out = np.zeros(self.mesh.n_vertices)
        for lev in self.levels:
            out += lev.phi @ (lev.weights @ (lev.phi.T @ rhs))
        return out

    def interpolant(self, v: np.ndarray) -> np.ndarray:
        """``sum_z v(z) phi_z^{n_m}``: the level-``n_m`` spline interpolant of ``v``."""
        basis = spline_level(self.domain, self.domain.exponents[self.m - 1], self.m)
        return basis.phi @ v[basis.vertices]

    def solve(self, forcing: np.ndarray) -> np.ndarray:
        """``u(s) = int G^m(s, t) F(t) dmu(t)`` with the cell-average quadrature."""
        w = self.mesh.vertex_weights(self.domain.cell_mask)
        u = self.apply(w * np.nan_to_num(forcing))
        u[~self.domain.vertex_mask] = np.nan
        return u


def _full_cells(dom: Domain, k: int) -> np.ndarray:
    span = 3 ** (dom.level - k)
    return np.flatnonzero(dom.cell_mask.reshape(3**k, span).all(axis=1))


def _t_index(dom: Domain, upto: int) -> dict:
    """``vertex id -> (l, word index)`` for corners ``p_w``, ``1 <= |w| = l <= upto``."""
    out = {}
    for l in range(1, upto + 1):
        for i, v in enumerate(dom.node_ids[l]):
            out[int(v)] = (l, i)
    return out


def spline_level(dom: Domain, k: int, m: int, h0_values=None) -> SplineLevel:
    """Level-``k`` splines centred at every interior vertex of ``V_k`` (the interpolation basis)."""
    return _spline_level(dom, k, m, h0_values, centres="all")


def _spline_level(dom: Domain, k: int, m: int, h0_values=None, centres: str = "born") -> SplineLevel:
    mesh = dom.mesh
    L = mesh.level
    cells = _full_cells(dom, k)
    if len(cells) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return SplineLevel(k, empty, sp.csr_matrix((mesh.n_vertices, 0)), sp.csr_matrix((0, 0)),
                           np.zeros(0, dtype=bool))
    corners = mesh.cells[k][cells]
    lattice, shape = _template(L - k)
    tops = mesh._tops[k][cells]
    pts = tops[:, None, :] + lattice[None, :, :]
    gids = mesh._vid(pts.reshape(-1, 2)).reshape(len(cells), -1)

    tmap = _t_index(dom, m)
    flat = corners.ravel()
    if centres == "born":
        cand = flat[mesh.birth[flat] == k]
    else:
        cand = flat
    boundary = set(int(b) for b in dom.boundary)
    cand = np.array(sorted(set(int(v) for v in cand) - boundary), dtype=np.int64)
    col = {int(v): i for i, v in enumerate(cand)}

    rows, cols, vals = [], [], []
    count = np.zeros(len(cand), dtype=np.int64)
    for c in range(3):
        owner = corners[:, c]
        sel = np.array([int(v) in col for v in owner], dtype=bool)
        if not sel.any():
            continue
        j = np.array([col[int(v)] for v in owner[sel]])
        np.add.at(count, j, 1)
        g = gids[sel]
        v = np.broadcast_to(shape[:, c], g.shape)
        keep = (v != 0) & (g != owner[sel][:, None])
        rows.append(g[keep])
        cols.append(np.broadcast_to(j[:, None], g.shape)[keep])
        vals.append(v[keep])
    modified = count == 1
    if h0_values is None and modified.any():
        h0_values = dom.fill_nodes(h0_nodes(m0_levels(dom.seq), dom.depth))
    for i in np.flatnonzero(modified):
        z = int(cand[i])
        if z not in tmap:
            raise AssertionError(f"vertex {z} has one full {k}-cell but is not a cut corner")
        l, widx = tmap[z]
        w = list(words(l))[widx]
        lo, hi = mesh.cell_range(tilde_F(dom.seq, w))
        sub = np.zeros(mesh.n_cells, dtype=bool)
        sub[lo:hi] = dom.cell_mask[lo:hi]
        vids = np.unique(mesh.cells[L][sub].ravel())
        vids = vids[vids != z]
        scale = h0_values[z]
        rows.append(vids)
        cols.append(np.full(len(vids), i))
        vals.append(h0_values[vids] / scale)
    rows.append(cand)
    cols.append(np.arange(len(cand)))
    vals.append(np.ones(len(cand)))
    phi = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(mesh.n_vertices, len(cand)))
    phi.eliminate_zeros()
    return SplineLevel(k, cand, phi, sp.csr_matrix((len(cand), len(cand))), modified)


def _weights(dom: Domain, lev: SplineLevel, m0s) -> sp.csr_matrix:
    mesh = dom.mesh
    k = lev.k
    idx = {int(v): i for i, v in enumerate(lev.vertices)}
    tmap = _t_index(dom, dom.depth)
    r, c, w = [], [], []
    for i, v in enumerate(lev.vertices):
        r.append(i)
        c.append(i)
        if lev.modified[i]:
            l = tmap[int(v)][0]
            w.append(g_modified(m0s[l - 1], dom.exponents[l - 1], True))
        else:
            w.append(g_standard_value(k, True))
    # standard pairs: the three midpoints of a full (k-1)-cell
    if k >= 1:
        parents = _full_cells(dom, k - 1)
        mids = mesh.mids[k - 1][parents]
        for a, b in ((0, 1), (0, 2), (1, 2)):
            for p, q in zip(mids[:, a], mids[:, b]):
                if int(p) in idx and int(q) in idx:
                    i, j = idx[int(p)], idx[int(q)]
                    g = g_standard_value(k, False)
                    r += [i, j]
                    c += [j, i]
                    w += [g, g]
    # neighbour pairs in T^l: the two bottom corners of each big n_l-cell
    for l in range(1, dom.depth):
        if dom.exponents[l - 1] != k:
            continue
        pairs = dom.node_ids[l].reshape(-1, 2)
        for p, q in pairs:
            if int(p) in idx and int(q) in idx:
                i, j = idx[int(p)], idx[int(q)]
                g = g_modified(m0s[l - 1], k, False)
                r += [i, j]
                c += [j, i]
                w += [g, g]
    n = len(lev.vertices)
    return sp.csr_matrix((w, (r, c)), shape=(n, n))


def green_kernel(seq: DyadicSequence, m: int, level: int, depth: int | None = None) -> GreenKernel:
    """Assemble ``G^m`` on the finite domain at mesh level ``level`` (needs ``1 <= m <= K - 1``)."""
    dom = finite_domain(seq, level, depth)
    if not 1 <= m <= dom.depth - 1:
        raise ValueError(f"truncation m = {m} must lie in [1, {dom.depth - 1}] for domain depth {dom.depth}")
    m0s = m0_levels(dom.seq)
    h0 = dom.fill_nodes(h0_nodes(m0s, dom.depth))
    kern = GreenKernel(dom, m)
    for k in range(1, dom.exponents[m - 1] + 1):
        lev = _spline_level(dom, k, m, h0)
        if len(lev.vertices) == 0:
            continue
        lev.weights = _weights(dom, lev, m0s)
        kern.levels.append(lev)
    return kern


def modified_spline(seq: DyadicSequence, word, level: int, depth: int | None = None) -> MeshFunction:
    """Spline centred at ``p_w`` (``|w| = l``) at level ``n_l`` on the finite domain."""
    from .dyadic import parse_word

    w = parse_word(word)
    dom = finite_domain(seq, level, depth)
    l = len(w)
    if not 1 <= l <= dom.depth - 1:
        raise ValueError(f"word length must lie in [1, {dom.depth - 1}]")
    lev = _spline_level(dom, dom.exponents[l - 1], l)
    z = int(dom.node_ids[l][word_index(w)])
    i = int(np.flatnonzero(lev.vertices == z)[0])
    vals = lev.phi[:, i].toarray().ravel()
    vals[~dom.vertex_mask] = np.nan
    return MeshFunction(dom.mesh, vals, "phi")


def spline_flux(seq: DyadicSequence, l: int) -> float:
    """Normal derivative of a ``T^l`` spline on its own piece: ``-2 (5/3)^{n_{l+1}} (1 - m0(y_l)) 2^l``."""
    t = m0_levels(seq)[l]
    return -2.0 * RATE ** seq.exponents[l] * (1 - t) * 2**l


@dataclass
class FluxBoundReport:
    levels: list
    contributions: list
    bounds: list
    flux: np.ndarray

    @property
    def constant(self) -> float:
        r = [c / b for c, b in zip(self.contributions, self.bounds) if b > 0]
        return max(r) if r else 0.0

    def to_dict(self) -> dict:
        return {"levels": self.levels, "contributions": self.contributions,
                "bounds": self.bounds, "constant": self.constant,
                "flux_on_pieces": self.flux.tolist()}


def solution_flux(kern: GreenKernel, forcing: np.ndarray) -> FluxBoundReport:
    """Normal derivative of ``u = G^m F`` on the ``2^K`` pieces, split by spline level.

    Only the ``T^l`` splines reach the cut; each contributes its coefficient
    ``sum_{z'} g(z, z') int phi_{z'} F`` times its closed-form flux on the pieces below it.
    """
    dom = kern.domain
    mesh = kern.mesh
    F = np.nan_to_num(forcing)
    wq = mesh.vertex_weights(dom.cell_mask) * F
    K = dom.depth
    fnorm = float(np.max(np.abs(F[dom.vertex_mask]))) if dom.vertex_mask.any() else 0.0
    flux = np.zeros(2**K)
    contribs, bounds = [], []
    for l in range(1, kern.m + 1):
        n = dom.exponents[l - 1]
        lev = next(v for v in kern.levels if v.k == n)
        coeff = lev.weights @ (lev.phi.T @ wq)
        idx = {int(v): i for i, v in enumerate(lev.vertices)}
        dn = spline_flux(dom.seq, l)
        part = np.zeros(2**K)
        span = 2 ** (K - l)
        for j, z in enumerate(dom.node_ids[l]):
            part[j * span:(j + 1) * span] = coeff[idx[int(z)]] * dn
        flux += part
        contribs.append(float(np.max(np.abs(part))))
        bounds.append(2.0**l / 3.0**n * fnorm)
    return FluxBoundReport(list(range(1, kern.m + 1)), contribs, bounds, flux)


def default_level(seq: DyadicSequence, m: int, max_level: int = 10) -> int:
    """Mesh level that resolves ``G^m``: three levels below the ``n_m``-cells, at least ``n_(m+1)``."""
    s = seq if seq.depth > m or not seq.is_patterned else seq.extended(m + 1)
    if s.depth <= m:
        raise ValueError(f"G^{m} needs at least {m + 1} exponents")
    return min(max(s.exponents[m - 1] + 3, s.exponents[m]), max_level)


def solve_dirichlet(seq: DyadicSequence, forcing, m: int, level: int, depth: int | None = None) -> MeshFunction:
    """Solution of ``-Laplace u = F`` with zero boundary values via ``G^m``.

    ``forcing`` is an array over the mesh vertices or a callable of the planar
    coordinates ``(x, y)``.
    """
    kern = green_kernel(seq, m, level, depth)
    if level < kern.domain.exponents[m - 1] + 2:
        raise ValueError(f"quadrature level {level} must be at least n_m + 2 = {kern.domain.exponents[m - 1] + 2}")
    F = sample_forcing(kern.mesh, forcing)
    return MeshFunction(kern.mesh, kern.solve(F), "u")


def sample_forcing(mesh, forcing) -> np.ndarray:
    if callable(forcing):
        xy = mesh.xy
        return np.asarray(forcing(xy[:, 0], xy[:, 1]), dtype=float) * np.ones(mesh.n_vertices)
    F = np.asarray(forcing, dtype=float)
    if F.ndim == 0:
        return np.full(mesh.n_vertices, float(F))
    return F
