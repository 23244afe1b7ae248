"""The ratio ``m0(x)`` and the multipliers derived from it.

``m0(x)`` is the common value at the two bottom corners of the top cell of the
harmonic function that is 1 at the apex and 0 on the cut.  It satisfies

    m0(x) = 1 / (1 + 2 (5/3)^(n_2 - n_1) (1 - m0(R x)))

and is evaluated bottom-up.  A finite sequence seeds the recursion with
``m0 = 0`` for the one-exponent tail (the limit of an infinitely large next
gap); a patterned sequence seeds it with the attracting fixed point of the
periodic part, which gives machine-precision values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import DyadicSequence, shift_normalized

RATE = 5.0 / 3.0
RATE_Q = Fraction(5, 3)
M0_MAX = 0.3


def _step(gap: int, t):
    """One level of the recursion: ``t -> 1 / (1 + 2 (5/3)^gap (1 - t))``."""
    if isinstance(t, Fraction):
        return 1 / (1 + 2 * RATE_Q**gap * (1 - t))
    return 1.0 / (1.0 + 2.0 * RATE**gap * (1.0 - t))


def periodic_fixed_point(cycle: tuple[int, ...]) -> float:
    """Attracting fixed point of the composed recursion over one period of gaps.

    Each step is the Moebius map with matrix ``[[0, 1], [-2 r^g, 1 + 2 r^g]]``;
    a fixed point of ``(a t + b) / (c t + d)`` solves ``c t^2 + (d - a) t - b = 0``.
    """
    mat = np.eye(2)
    for g in cycle:
        q = 2.0 * RATE**g
        mat = mat @ np.array([[0.0, 1.0], [-q, 1.0 + q]])
    mat /= np.abs(mat).max()
    a, b, c, d = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    qa, qb, qc = c, d - a, -b
    disc = math.sqrt(max(qb * qb - 4 * qa * qc, 0.0))
    # roots via the cancellation-free pair
    if qb >= 0:
        r1 = (-qb - disc) / (2 * qa)
        r2 = (2 * qc) / (-qb - disc)
    else:
        r1 = (2 * qc) / (-qb + disc)
        r2 = (-qb + disc) / (2 * qa)
    roots = [r for r in (r1, r2) if -1e-12 <= r <= M0_MAX + 1e-12]
    if not roots:
        raise ArithmeticError(f"no admissible fixed point for gap cycle {cycle}")
    t = min(roots, key=lambda r: abs(r - 0.15))
    # polish with a few passes of the contraction itself
    for _ in range(4):
        for g in reversed(cycle):
            t = _step(g, t)
    return float(min(max(t, 0.0), M0_MAX))


def m0_levels(seq: DyadicSequence, exact: bool = False) -> list:
    """``[m0(y_0), m0(y_1), ..., m0(y_{K-1})]`` with ``y_0 = x``.

    With ``exact=True`` a finite sequence is evaluated in rational arithmetic.
    """
    gaps = seq.gaps
    if seq.is_patterned:
        if exact:
            raise ValueError("exact rational evaluation needs a finite sequence")
        t = periodic_fixed_point(seq.tail)
    else:
        t = Fraction(0) if exact else 0.0
    levels = [t]
    for g in reversed(gaps):
        t = _step(g, t)
        levels.append(t)
    return levels[::-1]


@dataclass(frozen=True)
class RatioTriple:
    m0: float
    m1: float
    m2: float

    @classmethod
    def from_m0(cls, m0: float) -> "RatioTriple":
        return cls(m0, (1 - m0 * m0) / (2 * m0 + 1), (m0 - m0 * m0) / (2 * m0 + 1))

    @property
    def total(self) -> float:
        return self.m0 + self.m1 + self.m2


@dataclass(frozen=True)
class RatioTable:
    """Per-level ratios ``m0(y_j)`` with the last-iterate error surrogate of each."""

    sequence: DyadicSequence
    m0_per_level: tuple[float, ...]
    est_error: tuple[float, ...] = field(default=())

    @property
    def depth(self) -> int:
        return len(self.m0_per_level)

    def to_dict(self) -> dict:
        return {
            "exponents": list(self.sequence.exponents),
            "patterned": self.sequence.is_patterned,
            "levels": [
                {"level": j, "m0": v, "est_error": e,
                 **{k: getattr(RatioTriple.from_m0(v), k) for k in ("m1", "m2")}}
                for j, (v, e) in enumerate(zip(self.m0_per_level, self.est_error))
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _check_depth(seq: DyadicSequence):
    if not seq.is_patterned and seq.depth < 2:
        raise ValueError("m0 needs at least two exponents (or a patterned tail)")


def m0(seq: DyadicSequence) -> tuple[float, float]:
    """Value of ``m0(x)`` and the error surrogate ``|m0^(K) - m0^(K-1)|``."""
    _check_depth(seq)
    value = m0_levels(seq)[0]
    if seq.is_patterned:
        return value, 0.0
    coarser = m0_levels(seq.truncated(seq.depth - 1))[0]
    return value, abs(value - coarser)


def m0_exact(seq: DyadicSequence) -> Fraction:
    """``m0`` of a finite sequence as an exact fraction."""
    _check_depth(seq)
    return m0_levels(seq, exact=True)[0]


def ratio_table(seq: DyadicSequence) -> RatioTable:
    levels = m0_levels(seq)
    errors = []
    for j in range(len(levels)):
        if seq.is_patterned:
            errors.append(0.0)
            continue
        y = shift_normalized(seq, j)
        if y.depth < 2:
            errors.append(0.0)
        else:
            errors.append(m0(y)[1])
    return RatioTable(seq, tuple(float(v) for v in levels), tuple(errors))


def ratio_triple(seq: DyadicSequence) -> RatioTriple:
    return RatioTriple.from_m0(m0(seq)[0])


def shift_residual(seq: DyadicSequence) -> float:
    """Residual of ``(1 - m0(y)) m0(x) = (1/2) (5/3)^(n1 - n2) (1 - m0(x))``."""
    if seq.depth < 2 and not seq.is_patterned:
        raise ValueError("need at least two exponents")
    if seq.depth < 2:
        seq = seq.extended(2)
    levels = m0_levels(seq)
    mx, my = levels[0], levels[1]
    n1, n2 = seq.exponents[:2]
    return abs((1 - my) * mx - 0.5 * RATE ** (n1 - n2) * (1 - mx))


def dtn_multiplier(seq: DyadicSequence, m: int) -> float:
    """Haar multiplier ``6 2^m (5/3)^(n_{m+1}) (1 - m0(y_m)) / (2 m0(y_m) + 1)`` at level ``m``."""
    if m < 0:
        raise ValueError("level must be >= 0")
    if m >= seq.depth:
        if not seq.is_patterned:
            raise ValueError(f"level {m} needs exponent n_{m + 1}; truncation is {seq.depth}")
        seq = seq.extended(m + 1)
    t = m0_levels(seq)[m]
    return 6.0 * 2.0**m * RATE ** seq.exponents[m] * (1 - t) / (2 * t + 1)


def m0_sweep(xs, depth: int = 40) -> np.ndarray:
    """``m0`` over an array of cut depths (used for the graph of ``m0``)."""
    from .dyadic import expansion_from_value

    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        seq = expansion_from_value(float(x), depth)
        out[i] = m0_levels(seq)[0] if (seq.depth >= 2 or seq.is_patterned) else 0.0
    return out
