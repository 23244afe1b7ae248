"""Dyadic exponent sequences, shift dynamics and cell addressing.

A cut depth ``x`` in (0, 1] is written ``x = sum_k 2**-n_k`` with strictly
increasing positive exponents.  Everything downstream depends only on the
exponents, so a :class:`DyadicSequence` is the canonical representation of
``x``; a float is accepted only as a convenience constructor.

A sequence is either *finite* (the stored exponents are all that is known, and
the cut is treated as the limit of ``x_[K]`` from above) or *patterned* (the
gaps ``n_{k+1} - n_k`` past the stored prefix repeat a fixed cycle forever).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

DEFAULT_DEPTH = 16
BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class DyadicSequence:
    """Truncated exponent sequence ``n_1 < n_2 < ... < n_K``.

    ``tail`` is the cycle of gaps that continues after the last stored
    exponent, or ``None`` when nothing beyond the truncation is known.
    """

    exponents: tuple[int, ...]
    tail: tuple[int, ...] | None = None

    def __post_init__(self):
        exps = tuple(int(n) for n in self.exponents)
        if not exps:
            raise ValueError("a dyadic sequence needs at least one exponent")
        if exps[0] < 1 or any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError(f"exponents must be positive and strictly increasing: {exps}")
        object.__setattr__(self, "exponents", exps)
        if self.tail is not None:
            tail = tuple(int(g) for g in self.tail)
            if not tail or min(tail) < 1:
                raise ValueError("tail gaps must be a non-empty cycle of positive integers")
            object.__setattr__(self, "tail", tail)

    # -- construction -------------------------------------------------------

    @classmethod
    def arithmetic(cls, first: int, step: int, depth: int = DEFAULT_DEPTH) -> "DyadicSequence":
        """``n_k = first + (k-1) * step``; ``arithmetic(1, 1)`` is x = 1."""
        return cls((first,), (step,)).extended(depth)

    @classmethod
    def periodic(cls, gaps: Sequence[int], depth: int = DEFAULT_DEPTH) -> "DyadicSequence":
        """Exponents are the running sums of ``gaps`` repeated forever (``n_1 = gaps[0]``)."""
        gaps = tuple(gaps)
        return cls((gaps[0],), gaps[1:] + gaps[:1]).extended(depth)

    @classmethod
    def from_value(cls, x: float, depth: int = DEFAULT_DEPTH) -> "DyadicSequence":
        return expansion_from_value(x, depth)

    # -- basic views --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.exponents)

    def __getitem__(self, k):
        return self.exponents[k]

    @property
    def depth(self) -> int:
        return len(self.exponents)

    @property
    def is_patterned(self) -> bool:
        return self.tail is not None

    @property
    def gaps(self) -> tuple[int, ...]:
        e = self.exponents
        return tuple(b - a for a, b in zip(e, e[1:]))

    def partial_sum(self, m: int | None = None) -> Fraction:
        """``x_[m]`` as an exact fraction (defaults to the whole truncation)."""
        m = self.depth if m is None else m
        return sum((Fraction(1, 2**n) for n in self.exponents[:m]), Fraction(0))

    def value(self) -> float:
        return float(self.partial_sum())

    def extended(self, depth: int) -> "DyadicSequence":
        """Return a sequence with ``depth`` exponents.

        Patterned sequences can be lengthened indefinitely; shortening a
        patterned sequence forgets the pattern (the cycle phase is tied to the
        stored prefix).  Finite sequences can only be shortened.
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if depth <= self.depth:
            if depth == self.depth:
                return self
            return DyadicSequence(self.exponents[:depth])
        if self.tail is None:
            raise ValueError(
                f"cannot extend a finite sequence of length {self.depth} to {depth}")
        exps = list(self.exponents)
        p = len(self.tail)
        for i in range(depth - self.depth):
            exps.append(exps[-1] + self.tail[i % p])
        shift = (depth - self.depth) % p
        return DyadicSequence(tuple(exps), self.tail[shift:] + self.tail[:shift])

    def truncated(self, depth: int | None = None) -> "DyadicSequence":
        """Finite copy with the first ``depth`` exponents."""
        depth = self.depth if depth is None else depth
        return DyadicSequence(self.exponents[:depth])

    def shifted(self, times: int = 1) -> "DyadicSequence":
        return shift_normalized(self, times)

    def tail_gap_cycle(self) -> tuple[int, ...] | None:
        return self.tail

    def to_json(self) -> str:
        return json.dumps(list(self.exponents))

    def __str__(self) -> str:
        body = ",".join(map(str, self.exponents))
        if self.tail is not None:
            body += " +(" + ",".join(map(str, self.tail)) + ")*"
        return "{" + body + "}"


def expansion_from_value(x: float, depth: int = DEFAULT_DEPTH) -> DyadicSequence:
    """Greedy binary expansion of ``x`` with strictly increasing exponents.

    The expansion stops early when it terminates exactly.  ``x = 1`` has no
    terminating expansion with positive exponents; it yields the patterned
    sequence ``n_k = k``.
    """
    if not 0 < x <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if x == 1:
        return DyadicSequence.arithmetic(1, 1, depth)
    rem = Fraction(x)
    exps: list[int] = []
    n = 0
    while rem > 0 and len(exps) < depth:
        n += 1
        if Fraction(1, 2**n) <= rem:
            exps.append(n)
            rem -= Fraction(1, 2**n)
    return DyadicSequence(tuple(exps))


def shift_normalized(seq: DyadicSequence, times: int = 1) -> DyadicSequence:
    """Sequence of ``y_m = 2**n_m R^m x``: drop the first ``times`` exponents and renormalize."""
    if times < 0:
        raise ValueError("times must be >= 0")
    if times == 0:
        return seq
    need = times + 1
    if seq.depth < need:
        if not seq.is_patterned:
            raise ValueError(f"sequence of length {seq.depth} is too short to shift {times} times")
        seq = seq.extended(need)
    base = seq.exponents[times - 1]
    return DyadicSequence(tuple(n - base for n in seq.exponents[times:]), seq.tail)


# -- words and addresses -------------------------------------------------------

def parse_word(word) -> tuple[int, ...]:
    """Accept ``"12"``, ``"1,2"``, ``(1, 2)`` or ``""`` and return a tuple over {1, 2}."""
    if isinstance(word, str):
        letters = tuple(int(c) for c in word.replace(",", "").strip())
    else:
        letters = tuple(int(c) for c in word)
    if any(c not in (1, 2) for c in letters):
        raise ValueError(f"words use the alphabet {{1, 2}}: {word!r}")
    return letters


def words(length: int) -> Iterator[tuple[int, ...]]:
    """All words of a given length in lexicographic order (the corner ordering used everywhere)."""
    return product((1, 2), repeat=length)


def word_index(word: Sequence[int]) -> int:
    idx = 0
    for c in word:
        idx = 2 * idx + (c - 1)
    return idx


def format_address(address: Sequence[int]) -> str:
    return ",".join(str(c) for c in address)


def tilde_F(seq: DyadicSequence, word) -> tuple[int, ...]:
    """Address of the cell ``F_0^{n_1-1} F_{w_1} F_0^{n_2-n_1-1} F_{w_2} ...`` of length ``n_m``."""
    word = parse_word(word)
    if len(word) > seq.depth:
        if not seq.is_patterned:
            raise ValueError(f"word of length {len(word)} is deeper than the truncation {seq.depth}")
        seq = seq.extended(len(word))
    address: list[int] = []
    prev = 0
    for n, letter in zip(seq.exponents, word):
        address.extend([0] * (n - prev - 1))
        address.append(letter)
        prev = n
    return tuple(address)


def tilde_tilde_F(seq: DyadicSequence, word) -> tuple[int, ...]:
    """Address of the ``n_m``-cell sitting directly above ``tilde_F(word)``.

    Only the first ``m - 1`` letters matter: the result is
    ``tilde_F(word[:-1])`` followed by ``n_m - n_{m-1}`` zeros.
    """
    word = parse_word(word)
    m = len(word)
    if m == 0:
        raise ValueError("the empty word has no cell above it")
    if m > seq.depth:
        if not seq.is_patterned:
            raise ValueError(f"word of length {m} is deeper than the truncation {seq.depth}")
        seq = seq.extended(m)
    prefix = tilde_F(seq, word[:-1])
    prev = seq.exponents[m - 2] if m >= 2 else 0
    return prefix + (0,) * (seq.exponents[m - 1] - prev)


# -- combinatorics of the exponent set ---------------------------------------------

def _runs(exps: Sequence[int]) -> list[int]:
    runs = [1]
    for a, b in zip(exps, exps[1:]):
        if b == a + 1:
            runs[-1] += 1
        else:
            runs.append(1)
    return runs


def nonconsecutive_bound(seq: DyadicSequence) -> int | None:
    """Smallest ``N >= 2`` such that no ``N`` consecutive integers occur among the exponents.

    For a patterned sequence the answer is exact (``None`` when the cycle is all
    ones).  For a finite prefix the last run may continue past the truncation;
    if it is longer than every completed run the bound is undecidable and
    ``None`` is returned.
    """
    if seq.is_patterned:
        p = len(seq.tail)
        if all(g == 1 for g in seq.tail):
            return None
        # two full cycles past the prefix capture every run shape
        probe = seq.extended(seq.depth + 2 * p + 1)
        return max(_runs(probe.exponents)) + 1
    runs = _runs(seq.exponents)
    completed = max(runs[:-1], default=0)
    if runs[-1] > completed:
        return None
    return max(completed, 1) + 1


def hausdorff_dimension(N: int, tol: float = BISECTION_TOL) -> float:
    """Positive root of ``2 - 2**s - 2**(-N s) = 0``: the dimension of the bound-``N`` set."""
    if N < 2:
        raise ValueError("N must be >= 2")

    def f(s):
        return 2.0 - 2.0**s - 2.0 ** (-N * s)

    # f(0) = 0 and f' (0) = (N - 1) ln 2 > 0, f(1) < 0
    lo, hi = 1e-9, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def parse_x_spec(spec: str, depth: int = DEFAULT_DEPTH) -> DyadicSequence:
    """Parse ``0.65625``, ``1,3,5``, ``arith:a,d`` or ``periodic:p1,...,pr``."""
    spec = spec.strip()
    if spec.startswith("arith:"):
        a, d = (int(v) for v in spec[6:].split(","))
        return DyadicSequence.arithmetic(a, d, depth)
    if spec.startswith("periodic:"):
        return DyadicSequence.periodic([int(v) for v in spec[9:].split(",")], depth)
    if spec.startswith("[") or ("," in spec and "." not in spec):
        return DyadicSequence(tuple(int(v) for v in spec.strip("[]").split(",") if v.strip()))
    return expansion_from_value(float(spec), depth)
