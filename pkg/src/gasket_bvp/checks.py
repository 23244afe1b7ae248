"""Verification groups shared by ``gasket-bvp verify`` and the test-suite.

Every check compares the library against an independent computation (the
brute-force graph solver, exact rational arithmetic, or a closed form evaluated
a different way) and returns :class:`CheckResult` rows.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicSequence, hausdorff_dimension, nonconsecutive_bound, words
from .extension import (ONE_MINUS_H0, added_energy, basis_bound_constant, extend, extend_basis,
                        finite_domain, glue, obstruction_experiment, trace)
from .flux import weighted_coefficient_sum, finite_difference_flux, gauss_green_check, normal_derivative
from .greens import (default_level, g_domain, g_standard, green_kernel, g_modified_residuals, modified_spline,
                     solution_flux)
from .harmonics import (HaarSpectrum, energy_h0, energy_h1, energy_h_omega, energy_report,
                        eval_h0, eval_h1, eval_h_omega, synthesize)
from .mesh import Domain, MeshFunction, build_mesh, solve_dirichlet_graph
from .ratios import (RATE, shift_residual, dtn_multiplier, m0, m0_levels, ratio_triple)

MACHINE_FLOOR = 1e-15
MAX_LEVEL = 10


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float | None = None
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        thr = "" if self.threshold is None else f" (limit {self.threshold:.3g})"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{tag}] {self.name}: {self.measured:.6g}{thr}{extra}"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured,
                "threshold": self.threshold, "detail": self.detail}


def _le(name, value, limit, detail=""):
    return CheckResult(name, bool(value <= limit), float(value), limit, detail)


def _ge(name, value, limit, detail=""):
    return CheckResult(name, bool(value >= limit), float(value), limit, detail)


# -- random inputs ------------------------------------------------------------------------

def random_sequence(rng, min_depth=2, max_depth=20, max_gap=6, max_last=None, first_max=3):
    depth = int(rng.integers(min_depth, max_depth + 1))
    exps = [int(rng.integers(1, first_max + 1))]
    while len(exps) < depth:
        n = exps[-1] + int(rng.integers(1, max_gap + 1))
        if max_last is not None and n > max_last:
            break
        exps.append(n)
    return DyadicSequence(tuple(exps))


def random_bounded_sequence(rng, N, max_last=8, max_runs=4):
    """Finite sequence whose runs of consecutive exponents are shorter than ``N``.

    The final run has length 1 so the bound is decidable at the truncation.
    """
    while True:
        exps = []
        n = int(rng.integers(0, 2))
        for _ in range(int(rng.integers(1, max_runs + 1))):
            n += int(rng.integers(2, 4)) if exps else int(rng.integers(1, 3))
            run = int(rng.integers(1, N))
            exps.extend(range(n, n + run))
            n = exps[-1]
        exps.append(n + int(rng.integers(2, 4)))
        if len(exps) >= 2 and exps[-1] <= max_last:
            seq = DyadicSequence(tuple(exps))
            if nonconsecutive_bound(seq) is not None and nonconsecutive_bound(seq) <= N:
                return seq


def random_word(rng, max_length):
    m = int(rng.integers(0, max_length + 1))
    return tuple(int(c) for c in rng.integers(1, 3, size=m))


def random_domain_function(dom: Domain, rng, zero_boundary=False) -> MeshFunction:
    """Random node tree, harmonically filled, plus noise at the interior vertices."""
    nodes = [rng.normal(size=2**j) for j in range(dom.depth + 1)]
    vals = dom.fill_nodes(nodes)
    inner = np.flatnonzero(dom.interior)
    vals[inner] += 0.3 * rng.normal(size=len(inner))
    if zero_boundary:
        vals[dom.boundary] = 0.0
    return MeshFunction(dom.mesh, vals, "v")


X_ONE = DyadicSequence.arithmetic(1, 1, 24)
X_ODD = DyadicSequence.arithmetic(1, 2, 24)


# -- ratios ------------------------------------------------------------------------------------

def check_ratio_identities(trials=1000, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst_range = 0.0
    worst_sum = 0.0
    worst_shift = 0.0
    for _ in range(trials):
        seq = random_sequence(rng)
        value, err = m0(seq)
        worst_range = max(worst_range, -value, value - 0.3)
        tr = ratio_triple(seq)
        worst_sum = max(worst_sum, abs(tr.total - 1.0))
        res = shift_residual(seq)
        worst_shift = max(worst_shift, res / max(10 * err, MACHINE_FLOOR))
    dt = time.perf_counter() - t0
    return [
        _le("m0 lies in [0, 0.3] (worst excess)", worst_range, 0.0, f"{trials} sequences"),
        _le("m0 + m1 + m2 = 1", worst_sum, 1e-12),
        _le("shift relation residual / (10 x truncation error)", worst_shift, 1.0, "error floored at 1e-15"),
        _le("ratio identities runtime [s]", dt, 1.0),
    ]


def check_golden_values() -> list[CheckResult]:
    x = X_ONE
    tr = ratio_triple(x)
    golden = [
        ("m0(1) = 3/10", tr.m0, Fraction(3, 10)),
        ("m1(1) = 91/160", tr.m1, Fraction(91, 160)),
        ("m2(1) = 21/160", tr.m2, Fraction(21, 160)),
        ("E(h0) = 7/3 at x = 1", energy_h0(x), Fraction(7, 3)),
        ("E(h1) = 35/8 at x = 1", energy_h1(x), Fraction(35, 8)),
        ("E(h_1) = 175/12 at x = 1", energy_h_omega(x, (1,)), Fraction(175, 12)),
        ("E(h_2) = 175/12 at x = 1", energy_h_omega(x, (2,)), Fraction(175, 12)),
        ("DtN multiplier m=0 = 35/8 at x = 1", dtn_multiplier(x, 0), Fraction(35, 8)),
        ("DtN multiplier m=1 = 175/12 at x = 1", dtn_multiplier(x, 1), Fraction(175, 12)),
    ]
    return [_le(name, abs(v - float(ref)), 1e-10) for name, v, ref in golden]


def check_hausdorff() -> list[CheckResult]:
    phi = (1 + math.sqrt(5)) / 2
    dims = [hausdorff_dimension(N) for N in range(2, 61)]
    # 1 - dim(N) is about 2^-N, so steps drop below the bisection tolerance near N = 35
    steps = np.diff(dims[:29])
    return [
        _le("dim(N=2) = log2 golden ratio", abs(dims[0] - math.log2(phi)), 1e-10),
        _ge("dimension strictly increasing in N (min step)", float(steps.min()), 1e-12, "N = 2..30"),
        _ge("dimension nondecreasing in N (min step)", float(np.diff(dims).min()), 0.0, "N = 2..60"),
        _ge("dim(N=50) > 0.999", dims[48], 0.999),
    ]


# -- harmonic functions and energies ------------------------------------------------------------

def check_oracle_equivalence(trials=20, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(trials):
        seq = random_sequence(rng, 3, 4, max_gap=2, max_last=6)
        if seq.depth < 3:
            seq = DyadicSequence(seq.exponents[:1] + (seq[0] + 1, seq[0] + 2))
        level = seq.exponents[-1] + 4
        spec = HaarSpectrum.random(rng, 4, seq.depth - 1)
        h = synthesize(seq, spec, level)
        dom = Domain(seq, level)
        u = solve_dirichlet_graph(dom.mesh, dom.cell_mask, dom.boundary, h.values[dom.boundary])
        worst = max(worst, float(np.nanmax(np.abs(u - h.values))))
    dt = time.perf_counter() - t0
    return [_le("synthesized vs brute-force Dirichlet solve (sup norm)", worst, 1e-7,
                f"{trials} random (sequence, 4-term spectrum)"),
            _le("oracle equivalence runtime [s]", dt, 60.0)]


def _energy_cases(rng):
    # patterned cuts have no last exponent; the sparser one needs one more level
    # before the depth-2 words see enough of the domain below them
    cases = [("x=1", X_ONE, MAX_LEVEL), ("n_m=2m-1", X_ODD, MAX_LEVEL + 1)]
    for i in range(3):
        seq = random_sequence(rng, 3, 4, max_gap=2, max_last=5)
        if seq.depth < 3:
            seq = DyadicSequence((seq[0], seq[0] + 1, seq[0] + 2))
        cases.append((f"random {seq}", seq, seq.exponents[-1] + 5))
    return cases


def check_energy_consistency(seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst_drop = 0.0
    worst_gap = 0.0
    worst_cross = 0.0
    for label, seq, top in _energy_cases(rng):
        fns = {
            "h0": (lambda L: eval_h0(seq, L), energy_h0(seq), 0),
            "h1": (lambda L: eval_h1(seq, L), energy_h1(seq), 1),
            "h_1": (lambda L: eval_h_omega(seq, (1,), L), energy_h_omega(seq, (1,)), 2),
            "h_2": (lambda L: eval_h_omega(seq, (2,), L), energy_h_omega(seq, (2,)), 2),
            "h_12": (lambda L: eval_h_omega(seq, (1, 2), L), energy_h_omega(seq, (1, 2)), 3),
        }
        finals = {}
        for name, (make, closed, need) in fns.items():
            prev = None
            for L in range(seq.exponents[0], top + 1):
                dom_depth = sum(1 for n in seq.exponents if n <= L) if not seq.is_patterned else \
                    sum(1 for n in seq.extended(L + 1).exponents if n <= L)
                if dom_depth < max(need, 1):
                    continue
                f = make(L)
                dom = Domain(seq, L)
                e = dom.mesh.energy(np.nan_to_num(f.values), cell_mask=dom.cell_mask)
                if prev is not None:
                    worst_drop = max(worst_drop, (prev - e) / closed)
                prev = e
            finals[name] = f
            worst_gap = max(worst_gap, abs(prev - closed) / closed)
        dom = Domain(seq, top)
        names = list(finals)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                fa = np.nan_to_num(finals[a].values)
                fb = np.nan_to_num(finals[b].values)
                ea = dom.mesh.energy(fa, cell_mask=dom.cell_mask)
                eb = dom.mesh.energy(fb, cell_mask=dom.cell_mask)
                cross = dom.mesh.energy(fa, fb, cell_mask=dom.cell_mask)
                worst_cross = max(worst_cross, abs(cross) / math.sqrt(ea * eb))
    return [
        _le("graph energies nondecreasing in level (worst relative drop)", worst_drop, 1e-12),
        _le("graph energy vs closed form at top level (relative)", worst_gap, 0.01,
            "top level n_K + 5; patterned x: 10 (x=1), 11 (n_m=2m-1)"),
        _le("cross energies h0, h1, h_w (relative)", worst_cross, 1e-8),
    ]


def check_energy_report(trials=500, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    x1 = energy_report(X_ONE, HaarSpectrum(1.0, 0.0))
    ratios = []
    for _ in range(trials):
        seq = random_sequence(rng, 4, 12)
        spec = HaarSpectrum.random(rng, 5, seq.depth - 1)
        ratios.append(energy_report(seq, spec).ratio)
    ratios = np.array(ratios)
    return [
        _le("x=1 (a=1,b=0): exact 7/3, estimate 5/3", abs(x1.exact_energy - 7 / 3) + abs(x1.haar_estimate - 5 / 3), 1e-10),
        _ge("exact / estimate lower bracket", float(ratios.min()), 0.1, f"{trials} spectra"),
        _le("exact / estimate upper bracket", float(ratios.max()), 6.0, f"{trials} spectra"),
    ]


# -- normal derivatives -------------------------------------------------------------------------

def check_dtn(trials=20, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst_gg = 0.0
    worst_mult = 0.0
    worst_fd = 0.0
    worst_fd_closed = 0.0
    for _ in range(trials):
        seq = random_sequence(rng, 3, 5, max_gap=2, max_last=6)
        if seq.depth < 3:
            seq = DyadicSequence((seq[0], seq[0] + 1, seq[0] + 2))
        level = min(seq.exponents[-1] + 4, MAX_LEVEL)
        dom = Domain(seq, level)
        spec = HaarSpectrum.random(rng, 3, seq.depth - 1)
        v = random_domain_function(dom, rng)
        worst_gg = max(worst_gg, gauss_green_check(seq, spec, v, level))
        for m in range(seq.depth):
            w = random_word(rng, m)
            w = w + (1,) * (m - len(w))
            e = energy_h_omega(seq, w)
            worst_mult = max(worst_mult, abs(dtn_multiplier(seq, m) - e) / e)
        for w in [ONE_MINUS_H0, ()] + [random_word(rng, seq.depth - 2) for _ in range(2)]:
            if w == ONE_MINUS_H0:
                f, lo, closed = eval_h0(seq, level), 0, None
            else:
                f, lo = eval_h_omega(seq, w, level), len(w) + 1
                closed = dtn_multiplier(seq, len(w))
            vals = [finite_difference_flux(f, dom, m) for m in range(max(lo, 1), dom.depth + 1)]
            for a, b in zip(vals, vals[1:]):
                fine = np.repeat(a, len(b) // len(a))
                worst_fd = max(worst_fd, float(np.max(np.abs(fine - b))))
            if closed is not None:
                from .harmonics import psi_on_pieces
                exp = closed * psi_on_pieces(w, dom.depth)
                worst_fd_closed = max(worst_fd_closed, float(np.max(np.abs(vals[-1] - exp))) / closed)
    x1 = normal_derivative(X_ONE, HaarSpectrum(0.0, 0.0, {(): 1.0}))
    return [
        _le("Gauss-Green residual, random (spectrum, v)", worst_gg, 1e-5, f"{trials} cases at L = n_K + 4"),
        _le("DtN multiplier vs E(h_w) (relative)", worst_mult, 1e-9),
        _le("finite-difference flux level independence", worst_fd, 1e-9, "h0 and h_w, levels >= |w| + 1"),
        _le("finite-difference flux vs multiplier psi_w (relative)", worst_fd_closed, 1e-9),
        _le("x=1, c_empty=1: flux coefficient 35/8", abs(x1.coeffs[()] - 35 / 8), 1e-10),
        _le("weighted coefficient sum for x=1, c_empty=1 is 25/9",
            abs(weighted_coefficient_sum(X_ONE, HaarSpectrum(0, 0, {(): 1.0}))[0] - 25 / 9), 1e-12),
    ]


# -- glue and trace -----------------------------------------------------------------------------

def check_glue(seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    seq = DyadicSequence((1, 3, 4, 6))
    level = 9
    dom = finite_domain(seq, level)
    mesh = dom.mesh
    const = MeshFunction(mesh, np.full(mesh.n_vertices, 2.5))
    g0 = glue(const, const, dom)
    worst_const = abs(g0.energy_total) + max(abs(s["coarse_strip"]) for s in g0.strip)

    up = eval_h0(seq, level)
    low = MeshFunction(mesh, np.zeros(mesh.n_vertices))
    g = glue(up, low, dom)
    partition = max(abs(s["B_plus"] + s["S_plus"] + s["S_minus"] + s["B_minus"] - g.energy_total)
                    for s in g.strip) / g.energy_total
    strips = [s["coarse_strip"] for s in g.strip]
    decreasing = all(b < a for a, b in zip(strips, strips[1:]))

    worst_trace = 0.0
    trace_ratios = []
    for _ in range(20):
        spec = HaarSpectrum.random(rng, 4, dom.depth - 1)
        h = synthesize(seq, spec, level)
        tr = trace(h, dom)
        worst_trace = max(worst_trace, abs(tr.a - spec.a), abs(tr.b - spec.b),
                          max(abs(tr.coeffs.get(w, 0.0) - c) for w, c in spec.coeffs.items()))
        e = mesh.energy(np.nan_to_num(h.values), cell_mask=dom.cell_mask)
        trace_ratios.append(energy_report(seq, tr).haar_estimate / e)
    return [
        _le("constants glue to zero energy and zero strips", worst_const, 1e-12),
        _le("strip partition B+ + S+ + S- + B- = E_total (relative)", partition, 1e-12),
        CheckResult("coarse strip energy strictly decreasing in m (h0 over zero)", decreasing,
                    float(strips[-1]), None, "strips " + ", ".join(f"{s:.4g}" for s in strips)),
        _le("trace of synthesized function recovers its spectrum", worst_trace, 1e-8),
        _le("estimate(trace) / E(upper) stays bounded", float(max(trace_ratios)), 10.0,
            f"min {min(trace_ratios):.3g}"),
    ]


# -- extension ---------------------------------------------------------------------------------------

def check_extension(trials=100, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    out = []
    e_empty = added_energy(X_ODD.truncated(4), (), exact=True)
    out.append(CheckResult("N=2, n1=1: added energy of T(h_empty) = 8 (5/3)^2 exactly",
                           e_empty == 8 * Fraction(5, 3) ** 2, float(e_empty), None, f"rational {e_empty}"))
    s3 = DyadicSequence((3, 5, 7))
    e_h0 = added_energy(s3, ONE_MINUS_H0, exact=True)
    out.append(CheckResult("n1=3: added energy of T(1-h0) = 8 (5/3)^(n1+1) exactly",
                           e_h0 == 8 * Fraction(5, 3) ** 4, float(e_h0), None, f"rational {e_h0}"))

    for N in (2, 3):
        ratios = []
        for _ in range(trials // 2):
            seq = random_bounded_sequence(rng, N)
            w = random_word(rng, seq.depth - 1)
            level = seq.exponents[-1] + 1
            ext = extend_basis(seq, w, level)
            m = len(w)
            ratios.append(ext.energy_total / (2**m * RATE ** seq.exponents[m]))
        # the bound is attained when m0 vanishes on the last level; allow rounding only
        C = basis_bound_constant(N) * (1 + 1e-12)
        out.append(_le(f"extension energy bracket, N={N}: max E(T h_w) / (2^m (5/3)^n_(m+1))", max(ratios), C,
                       f"min {min(ratios):.4g} over {trials // 2} (sequence, word)"))
        out.append(_ge(f"extension energy bracket, N={N}: lower end positive", min(ratios), 8 * RATE))

    seq = X_ODD.truncated(4)
    level = seq.exponents[-1] + 1
    ws = [(), (1,), (2,), (1, 2), (2, 1, 1)]
    fs = [extend_basis(seq, w, level).function.values for w in ws]
    fs.append(extend_basis(seq, ONE_MINUS_H0, level).function.values)
    mesh = build_mesh(level)
    en = [mesh.energy(f) for f in fs]
    worst_cross = max(abs(mesh.energy(fs[i], fs[j])) / math.sqrt(en[i] * en[j])
                      for i in range(len(fs)) for j in range(i + 1, len(fs)))
    out.append(_le("extended basis cross energies (relative)", worst_cross, 1e-8))

    bound = 1 + 8 * RATE / 0.98
    norm_ratios, worst_tr = [], 0.0
    for _ in range(20):
        spec = HaarSpectrum.random(rng, 4, seq.depth - 1)
        ext = extend(seq, spec, level)
        norm_ratios.append(ext.energy_total / ext.energy_upper)
        tr = trace(ext.function, ext.domain)
        worst_tr = max(worst_tr, max(abs(tr.coeffs.get(w, 0.0) - c) for w, c in spec.coeffs.items()),
                       abs(tr.b - spec.b), abs(tr.a - spec.a))
        up = synthesize(seq, spec, level, ext.domain.depth).values
        dmask = ext.domain.vertex_mask
        worst_tr = max(worst_tr, float(np.max(np.abs(ext.function.values[dmask] - up[dmask]))))
    out.append(_le("N=2: E(Tu) / E(u) over random 4-term spectra", max(norm_ratios), bound))
    out.append(_le("trace(extend(u)) = u and restriction is exact", worst_tr, 1e-12))

    rows = obstruction_experiment(range(2, 8))
    ratios = {r.N: rows[i + 1].e_min / r.e_min for i, r in enumerate(rows[:-1])}
    for N in range(3, 7):
        out.append(CheckResult(f"obstruction E_min({N + 1}) / E_min({N}) in [1.4, 2.0]",
                               1.4 <= ratios[N] <= 2.0, ratios[N], None))
    out.append(_ge("E_min(2) >= E_upper(h1)", rows[0].e_min - rows[0].energy_upper, 0.0))
    out.append(_le("minimal extension is harmonic below the cut", max(r.residual for r in rows), 1e-8))
    out.append(_le("extension runtime [s]", time.perf_counter() - t0, 120.0))
    return out


# -- Green's function -----------------------------------------------------------------------------

def check_green(x: DyadicSequence | None = None, m: int | None = None, trials=10, seed=0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    out = []
    cases = [(X_ONE, 3), (X_ODD, 2), (DyadicSequence((2, 3, 5, 6)), 3)]
    if x is not None:
        cases = [(x, m or 3)]
    worst_rep = 0.0
    worst_spline = 0.0
    for seq, mm in cases:
        level = default_level(seq, mm, MAX_LEVEL)
        kern = green_kernel(seq, mm, level)
        dom = kern.domain
        inside = np.flatnonzero(dom.vertex_mask)
        for _ in range(trials):
            v = random_domain_function(dom, rng, zero_boundary=True).values
            interp = kern.interpolant(v)
            for t in rng.choice(inside, 3):
                lhs = dom.mesh.energy(kern.slice(int(t)), v, cell_mask=dom.cell_mask)
                worst_rep = max(worst_rep, abs(lhs - interp[t]))
        levels = m0_levels(dom.seq)
        for l in range(1, mm + 1):
            w = random_word(rng, l)
            w = w + (1,) * (l - len(w))
            phi = modified_spline(dom.seq, w, level)
            from .dyadic import word_index
            i = word_index(w)
            z = dom.node_ids[l][i]
            above = dom.node_ids[l - 1][i // 2]
            sib = dom.node_ids[l][i ^ 1]
            t = levels[l - 1]
            v = random_domain_function(dom, rng, zero_boundary=True).values
            lhs = dom.mesh.energy(np.nan_to_num(phi.values), v, cell_mask=dom.cell_mask)
            rhs = RATE ** dom.exponents[l - 1] * ((1 + t) / t * v[z] - v[above] - v[sib])
            worst_spline = max(worst_spline, abs(lhs - rhs))
    out.append(_le("kernel reproducing identity residual", worst_rep, 1e-7,
                   ", ".join(f"{s.exponents[:3]}.. m={mm}" for s, mm in cases)))
    out.append(_le("modified spline energy identity residual", worst_spline, 1e-7))

    worst_gmod = 0.0
    for _ in range(50):
        seq = random_sequence(rng, 3, 12)
        for l in range(1, seq.depth):
            worst_gmod = max(worst_gmod, *g_modified_residuals(seq, l))
    out.append(_le("modified g weight identities", worst_gmod, 1e-10))
    gd = abs(g_domain(X_ONE, 1, True) - 117 / 800) + abs(g_domain(X_ONE, 1, False) - 27 / 800)
    m1 = build_mesh(1)
    gs = abs(g_standard(3, 3, 1, m1) - 9 / 50) + abs(g_standard(3, 4, 1, m1) - 3 / 50)
    out.append(_le("g weights: 117/800, 27/800, 9/50, 3/50", gd + gs, 1e-12))

    if x is None:
        seq, mm = X_ONE, 4
        level = X_ONE.exponents[mm - 1] + 3
        kern = green_kernel(seq, mm, level)
        dom = kern.domain
        F = np.ones(dom.mesh.n_vertices)
        u = kern.solve(F)
        ref = solve_dirichlet_graph(dom.mesh, dom.cell_mask, dom.boundary,
                                    np.zeros(len(dom.boundary)), forcing=F)
        rel = float(np.nanmax(np.abs(u - ref)) / np.nanmax(np.abs(ref)))
        out.append(_le("G^m F vs brute-force solve, F=1, x=1, m=4 (relative sup)", rel, 0.02))
        out.append(_ge("u >= 0 for F = 1", float(np.nanmin(u)), -1e-14))
        fr = solution_flux(kern, F)
        c = fr.contributions
        decay = [b / a for a, b in zip(c, c[1:])]
        ratio = [a / b for a, b in zip(c, fr.bounds)]
        out.append(CheckResult("Green flux: per-level flux contributions decay", all(d < 1 for d in decay),
                               max(decay), None, "ratios " + ", ".join(f"{d:.3f}" for d in decay)))
        out.append(_le("Green flux: contribution / (2^l 3^-n_l |F|) stays bounded", max(ratio) / ratio[0], 2.0,
                       "C = " + f"{max(ratio):.4g}"))
    out.append(_le("Green's function checks runtime [s]", time.perf_counter() - t0, 120.0))
    return out


GROUPS = {
    "ratios": lambda a: check_ratio_identities(a.trials, a.seed) + check_golden_values() + check_hausdorff(),
    "energies": lambda a: (check_oracle_equivalence(20, a.seed) + check_energy_consistency(a.seed)
                           + check_energy_report(seed=a.seed)),
    "dtn": lambda a: check_dtn(seed=a.seed),
    "glue": lambda a: check_glue(a.seed),
    "extension": lambda a: check_extension(seed=a.seed),
    "green": lambda a: check_green(a.x, a.m, seed=a.seed),
}
