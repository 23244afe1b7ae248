"""Level-k graph approximations of the gasket and of the domains above a cut.

Vertices live on an integer lattice: at mesh level ``L`` the point ``(i, j)``
with ``0 <= j <= i <= 2**L`` sits at depth ``i / 2**L`` below the apex.  A cell
with address ``w`` over {0, 1, 2} has top vertex ``(i0, j0)`` and side
``s = 2**(L - |w|)``; its corners are ``(i0, j0)``, ``(i0 + s, j0)`` and
``(i0 + s, j0 + s)`` (``q0``, ``q1``, ``q2``).  Lattice coordinates make the
neighbour identification ``F_w F_i q_j = F_w F_j q_i`` automatic.

Vertices are ordered by the level at which they first appear and then
lexicographically by lattice position, so ``V_k`` is always a prefix of
``V_{k+1}`` and refining a level-k mesh reproduces the level-(k+1) ordering.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dyadic import DyadicSequence, tilde_F, tilde_tilde_F, words

MAX_LEVEL = 12
EXACT_MAX_LEVEL = 6
CG_RTOL = 1e-11
ENERGY_RATE = 5.0 / 3.0
LAPLACIAN_RATE = 5.0


class SolverError(RuntimeError):
    pass


def _trailing_zeros(a: np.ndarray, cap: int) -> np.ndarray:
    out = np.full(a.shape, cap, dtype=np.int64)
    nz = a != 0
    v = a[nz]
    out[nz] = np.log2(v & -v).astype(np.int64)
    return out


class GasketMesh:
    """Canonical level-``L`` graph of the gasket.  Immutable after construction."""

    def __init__(self, level: int):
        if level < 0:
            raise ValueError("level must be >= 0")
        if level > MAX_LEVEL:
            raise ValueError(f"level {level} exceeds the configured maximum {MAX_LEVEL}")
        self.level = L = level
        size = 2**L
        tops = [np.zeros((1, 2), dtype=np.int64)]
        for j in range(L):
            s = 2 ** (L - j - 1)
            t = tops[-1]
            tops.append(np.stack([t, t + (s, 0), t + (s, s)], axis=1).reshape(-1, 2))
        self._tops = tops

        t = tops[L]
        pts = np.concatenate([t, t + (1, 0), t + (1, 1)])
        keys = np.unique(pts[:, 0] * (size + 1) + pts[:, 1])
        i, j = keys // (size + 1), keys % (size + 1)
        tz = np.minimum(_trailing_zeros(i, L), _trailing_zeros(j, L))
        birth = np.where(i == 0, 0, L - np.minimum(tz, L))
        order = np.lexsort((j, i, birth))
        self.lattice = np.stack([i[order], j[order]], axis=1)
        self.birth = birth[order]
        # key -> vertex id through searchsorted on the sorted keys
        self._keys = keys
        self._key_to_vid = np.empty(len(keys), dtype=np.int64)
        self._key_to_vid[order] = np.arange(len(keys))

        self.cells = []
        self.mids = []
        for k in range(L + 1):
            s = 2 ** (L - k)
            tk = tops[k]
            self.cells.append(np.stack(
                [self._vid(tk), self._vid(tk + (s, 0)), self._vid(tk + (s, s))], axis=1))
            if k < L:
                h = s // 2
                self.mids.append(np.stack(
                    [self._vid(tk + (h, 0)), self._vid(tk + (h, h)), self._vid(tk + (s, h))], axis=1))

    def _vid(self, pts: np.ndarray) -> np.ndarray:
        keys = pts[:, 0] * (2**self.level + 1) + pts[:, 1]
        pos = np.searchsorted(self._keys, keys)
        if np.any(pos >= len(self._keys)) or np.any(self._keys[np.minimum(pos, len(self._keys) - 1)] != keys):
            raise KeyError("lattice point is not a gasket vertex")
        return self._key_to_vid[pos]

    # -- sizes and geometry ---------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.birth)

    @property
    def n_cells(self) -> int:
        return 3**self.level

    @property
    def edges(self) -> np.ndarray:
        c = self.cells[self.level]
        return np.concatenate([c[:, [0, 1]], c[:, [0, 2]], c[:, [1, 2]]])

    @property
    def n_edges(self) -> int:
        return 3 ** (self.level + 1)

    @property
    def depth(self) -> np.ndarray:
        return self.lattice[:, 0] / 2**self.level

    @property
    def xy(self) -> np.ndarray:
        """Planar embedding: ``q1 = (0, 0)``, ``q2 = (1, 0)``, ``q0 = (1/2, sqrt(3)/2)``."""
        n = 2**self.level
        i, j = self.lattice[:, 0], self.lattice[:, 1]
        return np.stack([0.5 + (j - i / 2) / n, (1 - i / n) * math.sqrt(3) / 2], axis=1)

    def level_vertices(self, k: int) -> int:
        """Number of vertices of ``V_k`` (they are the first ones in the ordering)."""
        return 3 * (3**k + 1) // 2

    def neighbors(self) -> list[np.ndarray]:
        e = self.edges
        adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])),
                            shape=(self.n_vertices,) * 2).tocsr()
        adj = adj + adj.T
        return [adj.indices[adj.indptr[v]:adj.indptr[v + 1]] for v in range(self.n_vertices)]

    def reflection(self) -> np.ndarray:
        """Vertex permutation of the reflection in the vertical axis through the apex."""
        pts = self.lattice.copy()
        pts[:, 1] = pts[:, 0] - pts[:, 1]
        return self._vid(pts)

    # -- addressing ------------------------------------------------------------

    @staticmethod
    def cell_index(address) -> int:
        idx = 0
        for c in address:
            idx = 3 * idx + int(c)
        return idx

    def cell_range(self, address) -> tuple[int, int]:
        """Half-open range of level-``L`` cell indices inside the cell ``F_address``."""
        n = len(address)
        if n > self.level:
            raise ValueError(f"address of length {n} is finer than mesh level {self.level}")
        span = 3 ** (self.level - n)
        start = self.cell_index(address) * span
        return start, start + span

    def cell_mask(self, addresses) -> np.ndarray:
        mask = np.zeros(self.n_cells, dtype=bool)
        for a in addresses:
            lo, hi = self.cell_range(a)
            mask[lo:hi] = True
        return mask

    def vertex(self, address, corner: int = 0) -> int:
        """Vertex id of ``F_address q_corner``."""
        return int(self.cells[len(address)][self.cell_index(address), corner])

    def cell_vertex_mask(self, cell_mask: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_vertices, dtype=bool)
        out[self.cells[self.level][cell_mask].ravel()] = True
        return out

    # -- piecewise harmonic interpolation ------------------------------------------

    def fill_cells(self, values: np.ndarray, k: int, cell_idx) -> np.ndarray:
        """Extend corner values of the given level-``k`` cells harmonically down to level ``L``.

        Works in place on ``values`` (length ``n_vertices``) and returns it.
        """
        idx = np.asarray(cell_idx, dtype=np.int64)
        for lev in range(k, self.level):
            c = self.cells[lev][idx]
            m = self.mids[lev][idx]
            t, l, r = values[c[:, 0]], values[c[:, 1]], values[c[:, 2]]
            values[m[:, 0]] = (2 * t + 2 * l + r) / 5
            values[m[:, 1]] = (2 * t + 2 * r + l) / 5
            values[m[:, 2]] = (2 * l + 2 * r + t) / 5
            idx = (3 * idx[:, None] + np.arange(3)).ravel()
        return values

    def extend_from(self, coarse_values: np.ndarray, k: int | None = None) -> np.ndarray:
        """Harmonic extension of values given on ``V_k`` to all of ``V_L``."""
        coarse_values = np.asarray(coarse_values, dtype=float)
        if k is None:
            k = {self.level_vertices(j): j for j in range(self.level + 1)}.get(len(coarse_values))
            if k is None:
                raise ValueError("length of coarse values does not match any V_k")
        values = np.full(self.n_vertices, np.nan)
        values[: len(coarse_values)] = coarse_values
        return self.fill_cells(values, k, np.arange(3**k))

    # -- forms ---------------------------------------------------------------------

    def energy(self, f, g=None, cell_mask=None) -> float:
        """Renormalized graph energy ``(5/3)^L sum (f(u)-f(v))(g(u)-g(v))`` over cell edges.

        Object arrays of fractions give an exact rational result.
        """
        exact = getattr(f, "dtype", None) == object
        if not exact:
            f = np.asarray(f, dtype=float)
            g = f if g is None else np.asarray(g, dtype=float)
        elif g is None:
            g = f
        c = self.cells[self.level]
        if cell_mask is not None:
            c = c[cell_mask]
        total = Fraction(0) if exact else 0.0
        for a, b in ((0, 1), (0, 2), (1, 2)):
            total += np.sum((f[c[:, a]] - f[c[:, b]]) * (g[c[:, a]] - g[c[:, b]]))
        if exact:
            return Fraction(5, 3) ** self.level * total
        return float(ENERGY_RATE**self.level * total)

    def integrate(self, f, cell_mask=None) -> float:
        """Cell-average quadrature for the standard self-similar measure."""
        f = np.asarray(f, dtype=float)
        c = self.cells[self.level]
        if cell_mask is not None:
            c = c[cell_mask]
        return float(f[c].sum() / 3.0 / 3**self.level)

    def vertex_weights(self, cell_mask=None) -> np.ndarray:
        """Lumped measure of each vertex: a third of each adjacent cell's mass."""
        c = self.cells[self.level]
        if cell_mask is not None:
            c = c[cell_mask]
        return np.bincount(c.ravel(), minlength=self.n_vertices) / 3.0 / 3**self.level

    def graph_laplacian(self, cell_mask=None) -> sp.csr_matrix:
        """Combinatorial Laplacian ``D - A`` of the edges inside ``cell_mask``."""
        c = self.cells[self.level]
        if cell_mask is not None:
            c = c[cell_mask]
        e = np.concatenate([c[:, [0, 1]], c[:, [0, 2]], c[:, [1, 2]]])
        n = self.n_vertices
        rows = np.concatenate([e[:, 0], e[:, 1], e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0], e[:, 0], e[:, 1]])
        vals = np.concatenate([-np.ones(2 * len(e)), np.ones(2 * len(e))])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def laplacian(self, f, cell_mask=None) -> np.ndarray:
        """Discrete Laplacian ``(3/2) 5^L sum_{q~p} (f(q) - f(p))`` (edges in ``cell_mask``)."""
        f = np.nan_to_num(np.asarray(f, dtype=float))
        return -1.5 * LAPLACIAN_RATE**self.level * (self.graph_laplacian(cell_mask) @ f)

    # -- export ------------------------------------------------------------------

    def to_dict(self) -> dict:
        xy = self.xy
        return {
            "level": self.level,
            "vertices": [{"id": int(v), "x": float(xy[v, 0]), "y": float(xy[v, 1])}
                         for v in range(self.n_vertices)],
            "edges": self.edges.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@lru_cache(maxsize=8)
def build_mesh(level: int) -> GasketMesh:
    return GasketMesh(level)


@dataclass
class MeshFunction:
    """Real values on the canonical vertices of a mesh; ``nan`` marks points off the domain."""

    mesh: GasketMesh
    values: np.ndarray
    name: str = "value"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise ValueError("value count must equal the vertex count")

    def __add__(self, other):
        return MeshFunction(self.mesh, self.values + _vals(other), self.name)

    def __sub__(self, other):
        return MeshFunction(self.mesh, self.values - _vals(other), self.name)

    def __mul__(self, c: float):
        return MeshFunction(self.mesh, self.values * c, self.name)

    __rmul__ = __mul__

    @property
    def support(self) -> np.ndarray:
        return np.isfinite(self.values)

    def to_csv(self, fh=None) -> str | None:
        """Write ``vertex_id,x,y,value`` rows for every defined vertex."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["vertex_id", "x", "y", self.name])
        xy = self.mesh.xy
        for v in np.flatnonzero(self.support):
            writer.writerow([int(v), f"{xy[v, 0]:.12g}", f"{xy[v, 1]:.12g}", repr(float(self.values[v]))])
        return out.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text: str, mesh: GasketMesh) -> "MeshFunction":
        rows = list(csv.reader(io.StringIO(text)))
        values = np.full(mesh.n_vertices, np.nan)
        for row in rows[1:]:
            values[int(row[0])] = float(row[3])
        return cls(mesh, values, rows[0][3])


def _vals(other):
    return other.values if isinstance(other, MeshFunction) else other


class Domain:
    """Graph version of the truncated domain ``Omega_x^(m)`` at mesh level ``L``.

    The domain is the union of one ``n_1``-cell, two ``n_2``-cells, ..., and
    ``2^(m-1)`` ``n_m``-cells.  Its boundary is the apex plus the ``2^m`` corner
    points ``p_w = tilde_F_w(q0)`` with ``|w| = m``, which stand in for the
    dyadic pieces of the cut.  ``node_ids[j]`` lists ``p_w`` for ``|w| = j`` in
    lexicographic word order (``node_ids[0]`` is the apex).
    """

    def __init__(self, seq: DyadicSequence, level: int, depth: int | None = None):
        if depth is None:
            depth = sum(1 for n in seq.exponents if n <= level)
            if depth == 0:
                raise ValueError(f"mesh level {level} is coarser than n_1 = {seq.exponents[0]}")
        if depth > seq.depth:
            if not seq.is_patterned:
                raise ValueError(f"depth {depth} exceeds the truncation {seq.depth}")
            seq = seq.extended(depth)
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if seq.exponents[depth - 1] > level:
            raise ValueError(f"mesh level {level} is coarser than n_{depth} = {seq.exponents[depth - 1]}")
        self.seq = seq
        self.depth = depth
        self.mesh = mesh = build_mesh(level)
        self.exponents = seq.exponents[:depth]

        self.node_ids = [np.array([mesh.vertex((), 0)])]
        for j in range(1, depth + 1):
            self.node_ids.append(np.array([mesh.vertex(tilde_F(seq, w), 0) for w in words(j)]))
        self.big_cells = []
        for j in range(1, depth + 1):
            addrs = [tilde_tilde_F(seq, w + (1,)) for w in words(j - 1)]
            self.big_cells.append(np.array([mesh.cell_index(a) for a in addrs], dtype=np.int64))
        self.cell_mask = self.upper_cells(depth)
        self.vertex_mask = mesh.cell_vertex_mask(self.cell_mask)
        self.corners = self.node_ids[depth]
        self.apex = int(self.node_ids[0][0])
        self.boundary = np.concatenate([self.node_ids[0], self.corners])
        self.interior = self.vertex_mask.copy()
        self.interior[self.boundary] = False

    @property
    def level(self) -> int:
        return self.mesh.level

    def big_cell_level(self, j: int) -> int:
        return self.exponents[j - 1]

    def upper_cells(self, m: int) -> np.ndarray:
        """Level-``L`` cell mask of ``Omega_x^(m)`` (the cells ``B_m^+``)."""
        mask = np.zeros(self.mesh.n_cells, dtype=bool)
        for j in range(1, m + 1):
            span = 3 ** (self.level - self.exponents[j - 1])
            for c in self.big_cells[j - 1]:
                mask[c * span:(c + 1) * span] = True
        return mask

    def strip_cells(self, m: int) -> np.ndarray:
        """Level-``L`` cell mask of the ``2^m`` cells ``tilde_F_w(SG)``, ``|w| = m`` (the strip ``S_m``)."""
        return self.mesh.cell_mask(tilde_F(self.seq, w) for w in words(m))

    def lower_cells(self, m: int) -> np.ndarray:
        """Cells of order ``n_m`` below the strip (``B_m^-``)."""
        return ~(self.upper_cells(m) | self.strip_cells(m))

    def fill_nodes(self, nodes) -> np.ndarray:
        """Piecewise harmonic function on the domain from its values at the apex and corner tree.

        ``nodes[j]`` holds the values at ``p_w`` for ``|w| = j``, ``j = 0..depth``.
        The function is harmonic on every big cell of the domain and ``nan`` elsewhere.
        """
        mesh = self.mesh
        values = np.full(mesh.n_vertices, np.nan)
        for j in range(1, self.depth + 1):
            top = np.asarray(nodes[j - 1], dtype=float)
            bottom = np.asarray(nodes[j], dtype=float)
            k = self.big_cell_level(j)
            c = mesh.cells[k][self.big_cells[j - 1]]
            values[c[:, 0]] = top
            values[c[:, 1]] = bottom[0::2]
            values[c[:, 2]] = bottom[1::2]
            mesh.fill_cells(values, k, self.big_cells[j - 1])
        return values


def solve_dirichlet_graph(mesh: GasketMesh, cell_mask, boundary_ids, boundary_values,
                          forcing=None, method: str = "direct") -> np.ndarray:
    """Minimize the graph energy on ``cell_mask`` with Dirichlet data on ``boundary_ids``.

    Solves ``(3/2) 5^L sum_{q~p} (u(q) - u(p)) = -F(p)`` at free vertices that
    have all their edges inside the mask; free vertices with missing edges get
    the natural (Neumann) condition with their lumped share of the forcing.
    ``method`` is ``"direct"``, ``"cg"`` (Jacobi preconditioned, relative
    residual 1e-11) or ``"exact"`` (rational elimination, ``L <= 6``).
    Returns values on all vertices, ``nan`` outside the mask.
    """
    cell_mask = np.ones(mesh.n_cells, dtype=bool) if cell_mask is None else np.asarray(cell_mask)
    active = mesh.cell_vertex_mask(cell_mask)
    boundary_ids = np.asarray(boundary_ids, dtype=np.int64)
    if len(boundary_ids) == 0:
        raise SolverError("empty boundary: the Dirichlet problem is singular")
    if not np.all(active[boundary_ids]):
        raise ValueError("boundary vertices must lie in the masked cells")
    is_b = np.zeros(mesh.n_vertices, dtype=bool)
    is_b[boundary_ids] = True
    free = np.flatnonzero(active & ~is_b)

    if method == "exact":
        return _solve_exact(mesh, cell_mask, boundary_ids, boundary_values, forcing, free)

    bvals = np.asarray(boundary_values, dtype=float)
    u = np.full(mesh.n_vertices, np.nan)
    u[boundary_ids] = bvals
    if len(free) == 0:
        return u
    K = mesh.graph_laplacian(cell_mask)
    KFF = K[free][:, free].tocsc()
    ub = np.zeros(mesh.n_vertices)
    ub[boundary_ids] = bvals
    rhs = -(K @ ub)[free]
    if forcing is not None:
        weights = mesh.vertex_weights(cell_mask)
        F = np.asarray(forcing, dtype=float)
        rhs = rhs + (weights[free] / ENERGY_RATE**mesh.level) * F[free]
    if method == "direct":
        sol = spla.spsolve(KFF, rhs)
        if not np.all(np.isfinite(sol)):
            raise SolverError("singular system: a component of the mask has no boundary vertex")
    elif method == "cg":
        diag = KFF.diagonal()
        pre = spla.LinearOperator(KFF.shape, matvec=lambda r: r / diag)
        sol, info = spla.cg(KFF, rhs, rtol=CG_RTOL, atol=0.0, maxiter=50 * len(free), M=pre)
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge (info={info})")
    else:
        raise ValueError(f"unknown method {method!r}")
    u[free] = sol
    return u


def _solve_exact(mesh, cell_mask, boundary_ids, boundary_values, forcing, free):
    """Sparse rational Gaussian elimination, finest vertices first (bounded fill-in)."""
    if mesh.level > EXACT_MAX_LEVEL:
        raise ValueError(f"exact mode is limited to levels <= {EXACT_MAX_LEVEL}")
    bval = {int(v): Fraction(val) for v, val in zip(boundary_ids, boundary_values)}
    c = mesh.cells[mesh.level][cell_mask]
    adj: dict[int, dict[int, int]] = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        for p, q in zip(c[:, a].tolist(), c[:, b].tolist()):
            adj.setdefault(p, {}).setdefault(q, 0)
            adj[p][q] += 1
            adj.setdefault(q, {}).setdefault(p, 0)
            adj[q][p] += 1
    counts = np.bincount(c.ravel(), minlength=mesh.n_vertices)
    free_set = set(int(v) for v in free)
    scale = Fraction(1, 3 * 15**mesh.level)  # lumped weight / (5/3)^L per adjacent cell
    rows: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    for p in free_set:
        row = {p: Fraction(sum(adj[p].values()))}
        b = Fraction(0)
        for q, w in adj[p].items():
            if q in free_set:
                row[q] = row.get(q, Fraction(0)) - w
            else:
                b += w * bval[q]
        if forcing is not None:
            b += scale * int(counts[p]) * Fraction(forcing[p])
        rows[p], rhs[p] = row, b
    order = sorted(free_set, key=lambda v: (-int(mesh.birth[v]), v))
    eliminated = []
    for p in order:
        row = rows.pop(p)
        piv = row[p]
        for q in list(row):
            if q == p or q not in rows:
                continue
            rq = rows[q]
            f = rq.pop(p) / piv
            for r, w in row.items():
                if r != p:
                    rq[r] = rq.get(r, Fraction(0)) - f * w
            rhs[q] -= f * rhs[p]
        eliminated.append((p, row))
    sol: dict[int, Fraction] = {}
    for p, row in reversed(eliminated):
        acc = rhs[p] - sum(w * sol[q] for q, w in row.items() if q != p)
        sol[p] = acc / row[p]
    out = np.full(mesh.n_vertices, None, dtype=object)
    for v, val in bval.items():
        out[v] = val
    for v, val in sol.items():
        out[v] = val
    return out
