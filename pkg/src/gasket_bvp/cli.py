"""Command line front end: ``gasket-bvp {ratios,mesh,solve,obstruction,verify}``.

Exit codes: 0 success (all checks pass), 1 a check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class UsageError(Exception):
    pass


def _set_threads(n):
    if n is None:
        n = os.environ.get("GASKET_BVP_THREADS")
    if n is None:
        return
    n = int(n)
    if n < 1:
        raise UsageError("--threads must be >= 1")
    for var in THREAD_VARS:
        os.environ[var] = str(n)


def _sequence(args):
    from .dyadic import parse_x_spec

    spec = args.seq if getattr(args, "seq", None) else getattr(args, "x", None)
    if spec is None:
        raise UsageError("give the cut with --x or --seq")
    try:
        seq = parse_x_spec(spec, args.depth or 24)
    except ValueError as exc:
        raise UsageError(f"bad x-spec {spec!r}: {exc}") from exc
    if args.depth:
        if args.depth > seq.depth and not seq.is_patterned:
            raise UsageError(f"depth {args.depth} exceeds the {seq.depth} given exponents")
        if args.depth < seq.depth:
            seq = seq.truncated(args.depth)
        elif args.depth > seq.depth:
            seq = seq.extended(args.depth)
    return seq


def _write(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)
        print(f"wrote {path}", file=sys.stderr)


def _load_spectrum(path):
    from .harmonics import HaarSpectrum

    try:
        return HaarSpectrum.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read spectrum {path}: {exc}") from exc


# -- commands ---------------------------------------------------------------------------

def cmd_ratios(args) -> int:
    import csv
    import io

    import numpy as np

    from .ratios import m0_sweep, ratio_table

    if args.sweep:
        try:
            a, b, n = args.sweep.split(":")
            xs = np.linspace(float(a), float(b), int(n))
        except ValueError as exc:
            raise UsageError("--sweep expects a:b:n") from exc
        if xs.min() <= 0 or xs.max() > 1:
            raise UsageError("sweep range must lie in (0, 1]")
        vals = m0_sweep(xs, args.depth or 40)
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "m0"])
        for x, v in zip(xs, vals):
            w.writerow([repr(float(x)), repr(float(v))])
        _write(out.getvalue(), args.out)
        if args.plot:
            from .plotting import plot_m0_sweep
            plot_m0_sweep(xs, vals, args.plot)
        return 0

    seq = _sequence(args)
    table = ratio_table(seq)
    if args.json or (args.out and str(args.out).endswith(".json")):
        _write(table.to_json(indent=2), args.out)
        return 0
    lines = [f"sequence {seq}", f"m0 = {table.m0_per_level[0]!r}"]
    d = table.to_dict()["levels"][0]
    lines += [f"m1 = {d['m1']!r}", f"m2 = {d['m2']!r}", "",
              f"{'level':>5} {'m0(y_j)':>22} {'m1':>22} {'m2':>22} {'est_error':>10}"]
    for row in table.to_dict()["levels"]:
        lines.append(f"{row['level']:>5} {row['m0']:>22.16g} {row['m1']:>22.16g} "
                     f"{row['m2']:>22.16g} {row['est_error']:>10.2e}")
    _write("\n".join(lines), args.out)
    return 0


def cmd_mesh(args) -> int:
    from .mesh import MAX_LEVEL, build_mesh

    if not 0 <= args.level <= MAX_LEVEL:
        raise UsageError(f"level must lie in [0, {MAX_LEVEL}]")
    _write(build_mesh(args.level).to_json(), args.out)
    return 0


def _forcing(spec: str, mesh):
    import numpy as np

    from .mesh import MeshFunction

    if spec.startswith("const:"):
        return np.full(mesh.n_vertices, float(spec[6:]))
    if spec == "depth":
        return mesh.depth.astype(float)
    if spec.startswith("csv:"):
        return MeshFunction.from_csv(Path(spec[4:]).read_text(), mesh).values
    raise UsageError(f"unknown forcing {spec!r} (const:C, depth, csv:PATH)")


def cmd_solve(args) -> int:
    import numpy as np

    seq = _sequence(args)
    if args.kind == "harmonic":
        from .harmonics import synthesize
        from .mesh import Domain

        spec = _load_spectrum(args.spectrum)
        try:
            h = synthesize(seq, spec, args.level)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        _write(h.to_csv(), args.out)
        if args.plot:
            from .plotting import plot_mesh_function
            plot_mesh_function(h, args.plot, "harmonic extension", Domain(seq, args.level).cell_mask)
        return 0

    if args.kind == "dtn":
        from .flux import normal_derivative
        from .ratios import dtn_multiplier

        spec = _load_spectrum(args.spectrum)
        flux = normal_derivative(seq, spec)
        depth = max(spec.max_length + 1, 1)
        d = flux.to_dict()
        d["sequence"] = list(seq.exponents)
        d["multipliers"] = [{"m": m, "multiplier": dtn_multiplier(seq, m)} for m in range(depth)]
        _write(json.dumps(d, indent=2), args.out)
        if args.plot:
            from .plotting import plot_boundary_flux
            plot_boundary_flux(flux.values_on_pieces(max(depth, 1)), args.plot)
        return 0

    if args.kind == "green":
        from .greens import default_level, green_kernel

        m = args.m
        try:
            level = args.level or default_level(seq, m)
            kern = green_kernel(seq, m, level)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        F = _forcing(args.forcing, kern.mesh)
        from .mesh import MeshFunction
        u = MeshFunction(kern.mesh, kern.solve(F), "u")
        _write(u.to_csv(), args.out)
        bmax = float(np.max(np.abs(u.values[kern.domain.boundary])))
        print(f"max |u| = {np.nanmax(np.abs(u.values)):.6g}, max |u| on boundary = {bmax:.3g}, "
              f"level {level}, depth {kern.domain.depth}", file=sys.stderr)
        if args.plot:
            from .plotting import plot_mesh_function
            plot_mesh_function(u, args.plot, f"G^{m} F", kern.domain.cell_mask)
        return 0
    raise UsageError(f"unknown solve kind {args.kind}")


def cmd_obstruction(args) -> int:
    from .extension import growth_csv, obstruction_experiment

    try:
        rows = obstruction_experiment(range(args.min_n, args.max_n + 1), args.level_offset)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write(growth_csv(rows), args.out)
    if args.plot:
        from .plotting import plot_growth
        plot_growth([r.N for r in rows], [r.e_min for r in rows], args.plot)
    return 0


def cmd_verify(args) -> int:
    from .checks import GROUPS

    names = list(GROUPS) if args.all or not args.group else args.group
    unknown = [g for g in names if g not in GROUPS]
    if unknown:
        raise UsageError(f"unknown group(s) {unknown}; choose from {list(GROUPS)}")
    args.x = _sequence(args) if (args.x or args.seq) else None
    report = {}
    ok = True
    for g in names:
        print(f"== {g}")
        results = GROUPS[g](args)
        for r in results:
            print(r.line())
            ok &= r.passed
        report[g] = [r.to_dict() for r in results]
    print("ALL PASS" if ok else "SOME CHECKS FAILED")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2))
    return 0 if ok else 1


# -- parser ----------------------------------------------------------------------------------

def _add_x(p):
    p.add_argument("--x", help="cut depth: decimal, exponent list '1,3,5', 'arith:a,d' or 'periodic:p1,...,pr'")
    p.add_argument("--seq", help="explicit exponent list (same as --x 1,3,5)")
    p.add_argument("--depth", type=int, help="number of exponents to use")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gasket-bvp", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, help="BLAS threads (also GASKET_BVP_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("ratios", help="m0, m1, m2 and the per-level table")
    _add_x(r)
    r.add_argument("--sweep", help="a:b:n grid of x values; writes an (x, m0) CSV")
    r.add_argument("--json", action="store_true", help="print the table as JSON")
    r.add_argument("--out", help="output file (default stdout)")
    r.add_argument("--plot", help="PNG for the sweep")
    r.set_defaults(func=cmd_ratios)

    m = sub.add_parser("mesh", help="export the level-k graph as JSON")
    m.add_argument("--level", type=int, required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_mesh)

    s = sub.add_parser("solve", help="harmonic synthesis, Green's solve or Dirichlet-to-Neumann map")
    s.add_argument("kind", choices=["harmonic", "green", "dtn"])
    _add_x(s)
    s.add_argument("--spectrum", help="HaarSpectrum JSON (harmonic, dtn)")
    s.add_argument("--level", type=int, help="mesh level")
    s.add_argument("--forcing", default="const:1", help="const:C, depth or csv:PATH (green)")
    s.add_argument("--m", type=int, default=3, help="kernel truncation (green)")
    s.add_argument("--out", help="output file (default stdout)")
    s.add_argument("--plot", help="PNG figure")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("obstruction", help="minimal extension energies for x = 1/2 + ... + 2^-N")
    o.add_argument("--min-n", type=int, default=2)
    o.add_argument("--max-n", type=int, default=7)
    o.add_argument("--level-offset", type=int, default=0)
    o.add_argument("--out")
    o.add_argument("--plot")
    o.set_defaults(func=cmd_obstruction)

    v = sub.add_parser("verify", help="run verification groups")
    v.add_argument("--group", action="append", help="ratios, energies, dtn, glue, extension, green")
    v.add_argument("--all", action="store_true")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=1000)
    _add_x(v)
    v.add_argument("--m", type=int, help="kernel truncation for the green group")
    v.add_argument("--report", help="write a JSON report")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads(args.threads)
        needs_level = args.command == "solve" and args.kind == "harmonic"
        if needs_level and args.level is None:
            raise UsageError("solve harmonic needs --level")
        if args.command == "solve" and args.kind in ("harmonic", "dtn") and not args.spectrum:
            raise UsageError(f"solve {args.kind} needs --spectrum")
        return args.func(args)
    except UsageError as exc:
        print(f"gasket-bvp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
