"""Harmonic functions on the domain above the cut, built from their Haar spectra.

A harmonic function on ``Omega_x^(K)`` is stored as its *node tree*: the value
at the apex and the values at the points ``p_w = tilde_F_w(q0)``, ``|w| <= K``.
The function is harmonic on each big cell, so the tree plus the 1/5-2/5 rule
determines it at every mesh level.

* ``h0`` (1 at the apex, 0 on the cut) has the value ``P(j) = prod_{l<j} m0(y_l)`` at every depth-``j`` node.
* ``h1`` (0 at the apex, +1 / -1 on the left / right half of the cut) is
  ``(0, d, -d)`` on the top cell with ``d = m1 - m2`` and ``+-(1 + (d - 1) h0^y)`` below.
* ``h_w`` is ``2^{m/2} h1^{y_m}`` transplanted into the cell under ``p_w`` and 0 elsewhere.

For a patterned sequence these are the exact restrictions to ``Omega_x^(K)``.
For a finite sequence the cut sits just above the last cell, so the depth-``K``
corners carry the boundary trace exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicSequence, parse_word, shift_normalized, word_index, words
from .mesh import Domain, MeshFunction
from .ratios import RATE, m0_levels

TAIL_TERMS = 80


def _word_str(w) -> str:
    return "".join(map(str, w))


@dataclass
class HaarSpectrum:
    """Boundary data ``f = b + sum c_w psi_w`` on the cut plus the apex value ``a``."""

    a: float = 0.0
    b: float = 0.0
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {parse_word(w): float(c) for w, c in self.coeffs.items()}

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.coeffs), default=-1)

    def __add__(self, other: "HaarSpectrum") -> "HaarSpectrum":
        coeffs = dict(self.coeffs)
        for w, c in other.coeffs.items():
            coeffs[w] = coeffs.get(w, 0.0) + c
        return HaarSpectrum(self.a + other.a, self.b + other.b, coeffs)

    def scaled(self, s: float) -> "HaarSpectrum":
        return HaarSpectrum(s * self.a, s * self.b, {w: s * c for w, c in self.coeffs.items()})

    def boundary_values(self, depth: int) -> np.ndarray:
        """Trace ``b + sum c_w psi_w`` on the ``2^depth`` dyadic pieces."""
        out = np.full(2**depth, float(self.b))
        for w, c in self.coeffs.items():
            out += c * psi_on_pieces(w, depth)
        return out

    @classmethod
    def from_boundary(cls, values, a: float = 0.0) -> "HaarSpectrum":
        """Project piecewise-constant boundary values (``2^K`` pieces) onto ``{1, psi_w : |w| < K}``."""
        values = np.asarray(values, dtype=float)
        depth = int(round(math.log2(len(values))))
        if 2**depth != len(values):
            raise ValueError("boundary data needs 2^K values")
        coeffs = {}
        for m in range(depth):
            for w in words(m):
                coeffs[w] = float(np.dot(values, psi_on_pieces(w, depth)) / 2**depth)
        return cls(a, float(values.mean()), coeffs)

    @classmethod
    def random(cls, rng: np.random.Generator, n_terms: int, max_length: int) -> "HaarSpectrum":
        pool = [w for m in range(max_length + 1) for w in words(m)]
        pick = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False)
        coeffs = {pool[i]: float(rng.normal()) for i in sorted(pick)}
        return cls(float(rng.normal()), float(rng.normal()), coeffs)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b,
                "coeffs": [{"word": _word_str(w), "c": c} for w, c in sorted(self.coeffs.items())]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "HaarSpectrum":
        return cls(float(d.get("a", 0.0)), float(d.get("b", 0.0)),
                   {e["word"]: float(e["c"]) for e in d.get("coeffs", [])})

    @classmethod
    def from_json(cls, text: str) -> "HaarSpectrum":
        return cls.from_dict(json.loads(text))


def psi_on_pieces(word, depth: int) -> np.ndarray:
    """Values of the Haar function ``psi_w`` on the pieces ``S_tau``, ``|tau| = depth``."""
    w = parse_word(word)
    m = len(w)
    if m >= depth:
        raise ValueError(f"psi_w with |w| = {m} is not constant on depth-{depth} pieces")
    out = np.zeros(2**depth)
    span = 2 ** (depth - m)
    start = word_index(w) * span
    out[start:start + span // 2] = 2 ** (m / 2)
    out[start + span // 2:start + span] = -(2 ** (m / 2))
    return out


# -- node trees -----------------------------------------------------------------

def _levels(seq: DyadicSequence, depth: int) -> list:
    if depth > seq.depth:
        seq = seq.extended(depth)
    return m0_levels(seq)


def h0_nodes(levels, depth: int) -> list[np.ndarray]:
    nodes, p = [], 1.0
    for j in range(depth + 1):
        nodes.append(np.full(2**j, p))
        if j < depth:
            p *= levels[j]
    return nodes


def h1_nodes(levels, depth: int) -> list[np.ndarray]:
    t = levels[0]
    d = (1 - t) / (2 * t + 1)
    nodes = [np.zeros(1)]
    q = 1.0
    for j in range(1, depth + 1):
        left = 1 + (d - 1) * q
        half = 2 ** (j - 1)
        nodes.append(np.concatenate([np.full(half, left), np.full(half, -left)]))
        if j < depth:
            q *= levels[j]
    return nodes


def h_omega_nodes(levels, word, depth: int) -> list[np.ndarray]:
    w = parse_word(word)
    m = len(w)
    if m >= depth:
        raise ValueError(f"word of length {m} needs domain depth > {m}")
    sub = h1_nodes(levels[m:], depth - m)
    scale = 2 ** (m / 2)
    nodes = [np.zeros(2**j) for j in range(depth + 1)]
    base = word_index(w)
    for j in range(m, depth + 1):
        span = 2 ** (j - m)
        nodes[j][base * span:(base + 1) * span] = scale * sub[j - m]
    return nodes


def spectrum_nodes(levels, spectrum: HaarSpectrum, depth: int) -> list[np.ndarray]:
    h0 = h0_nodes(levels, depth)
    nodes = [spectrum.a * v + spectrum.b * (1 - v) for v in h0]
    for w, c in spectrum.coeffs.items():
        for j, v in enumerate(h_omega_nodes(levels, w, depth)):
            nodes[j] += c * v
    return nodes


def _domain(seq, level, depth):
    return Domain(seq, level, depth)


def eval_h0(seq: DyadicSequence, level: int, depth: int | None = None) -> MeshFunction:
    dom = _domain(seq, level, depth)
    vals = dom.fill_nodes(h0_nodes(_levels(dom.seq, dom.depth), dom.depth))
    return MeshFunction(dom.mesh, vals, "h0")


def eval_h1(seq: DyadicSequence, level: int, depth: int | None = None) -> MeshFunction:
    dom = _domain(seq, level, depth)
    vals = dom.fill_nodes(h1_nodes(_levels(dom.seq, dom.depth), dom.depth))
    return MeshFunction(dom.mesh, vals, "h1")


def eval_h_omega(seq: DyadicSequence, word, level: int, depth: int | None = None) -> MeshFunction:
    dom = _domain(seq, level, depth)
    vals = dom.fill_nodes(h_omega_nodes(_levels(dom.seq, dom.depth), word, dom.depth))
    return MeshFunction(dom.mesh, vals, "h_" + (_word_str(parse_word(word)) or "empty"))


def synthesize(seq: DyadicSequence, spectrum: HaarSpectrum, level: int,
               depth: int | None = None) -> MeshFunction:
    """``a h0 + b (1 - h0) + sum c_w h_w`` on the truncated domain at mesh level ``level``."""
    dom = _domain(seq, level, depth)
    if spectrum.max_length >= dom.depth:
        raise ValueError(f"spectrum uses words of length {spectrum.max_length}; domain depth is {dom.depth}")
    vals = dom.fill_nodes(spectrum_nodes(_levels(dom.seq, dom.depth), spectrum, dom.depth))
    return MeshFunction(dom.mesh, vals, "h")


# -- closed-form energies --------------------------------------------------------------

def _with_tail(seq: DyadicSequence) -> DyadicSequence:
    return seq.extended(seq.depth + TAIL_TERMS) if seq.is_patterned else seq


def energy_h0_with_error(seq: DyadicSequence) -> tuple[float, float]:
    """``(1 - m0)^2 sum_j 2^{2-j} (5/3)^{2 n_1 - n_j}`` and a bound on the omitted tail.

    Consecutive terms shrink at least by the factor ``3/10``, so the tail after
    the last summed term is at most ``3/7`` of that term.  A finite sequence
    has no tail.
    """
    s = _with_tail(seq)
    t = m0_levels(s)[0]
    n1 = s.exponents[0]
    terms = [2.0 ** (2 - j) * RATE ** (2 * n1 - n) for j, n in enumerate(s.exponents, start=1)]
    total = (1 - t) ** 2 * math.fsum(terms)
    tail = (1 - t) ** 2 * terms[-1] * 3 / 7 if seq.is_patterned else 0.0
    return total, tail


def energy_h0(seq: DyadicSequence) -> float:
    return energy_h0_with_error(seq)[0]


def energy_h1(seq: DyadicSequence) -> float:
    t = m0_levels(_with_tail(seq))[0]
    r = RATE ** seq.exponents[0]
    top = 6 * ((1 - t) / (2 * t + 1)) ** 2 * r
    if seq.depth < 2 and not seq.is_patterned:
        return top
    return top + 2 * (3 * t / (2 * t + 1)) ** 2 * r * energy_h0(shift_normalized(seq, 1))


def energy_h_omega(seq: DyadicSequence, word) -> float:
    w = parse_word(word)
    m = len(w)
    if m == 0:
        return energy_h1(seq)
    if m >= seq.depth and not seq.is_patterned:
        raise ValueError(f"word of length {m} is too deep for a sequence of length {seq.depth}")
    seq = seq if m < seq.depth else seq.extended(m + 1)
    return 2**m * RATE ** seq.exponents[m - 1] * energy_h1(shift_normalized(seq, m))


@dataclass(frozen=True)
class EnergyReport:
    exact_energy: float
    haar_estimate: float
    l2_estimate: float

    @property
    def ratio(self) -> float:
        return self.exact_energy / self.haar_estimate if self.haar_estimate else float("nan")

    def to_dict(self) -> dict:
        return {"exact_energy": self.exact_energy, "haar_estimate": self.haar_estimate,
                "l2_estimate": self.l2_estimate}


def _exponent(seq: DyadicSequence, k: int) -> int:
    """``n_k`` (1-based), extending a patterned sequence on demand."""
    if k > seq.depth:
        seq = seq.extended(k)
    return seq.exponents[k - 1]


def energy_report(seq: DyadicSequence, spectrum: HaarSpectrum) -> EnergyReport:
    """Energy of the synthesized function via orthogonality, with the two comparison sums."""
    ab = spectrum.a - spectrum.b
    exact = ab * ab * energy_h0(seq)
    n1 = seq.exponents[0]
    est = RATE**n1 * ab * ab
    l2 = (1 / 3) ** n1 * (spectrum.a**2 + spectrum.b**2)
    for w, c in spectrum.coeffs.items():
        m = len(w)
        exact += c * c * energy_h_omega(seq, w)
        nm1 = _exponent(seq, m + 1)
        est += 2**m * RATE**nm1 * c * c
        l2 += 2**m * (1 / 3) ** nm1 * c * c
    return EnergyReport(exact, est, l2)


def graph_energy_on_domain(f: MeshFunction, dom: Domain, g: MeshFunction | None = None) -> float:
    return dom.mesh.energy(f.values, None if g is None else g.values, cell_mask=dom.cell_mask)
