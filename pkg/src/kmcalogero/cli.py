"""Command-line interface (`kmc`).

Exit codes: 0 success, 2 usage, 3 numerical (pole, tail, overflow), 4 I/O.
Every failure also prints a `code=<kind>` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dunkl, geometry, potential, roots
from .arith import SqrtOneTable
from .errors import KMCError, PoleProximity

MAX_LEVEL = 10_000
REF_POINTS = {"z1": (0.1, 0.7), "z2": (-0.2, 1.4)}
LADDER_R = [10_000, 20_000, 50_000, 100_000, 200_000, 500_000, 1_000_000]
CINF_R = [10_000, 50_000, 100_000, 500_000, 1_000_000]


_NAMED = {"id": geometry.IDENTITY, "s1": geometry.S1, "s2": geometry.S2, "s3": geometry.S3, "T": geometry.T, "S": geometry.S}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        print("code=usage", file=sys.stderr)
        raise SystemExit(2)


def fmt(x) -> str:
    """Shortest round-trip representation; ints stay ints."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# ---- argument helpers ------------------------------------------------------------


def parse_z(text: str) -> geometry.HalfPlanePoint:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--z expects X,Y, got {text!r}") from None
    if not y > 0:
        raise UsageError("Im z must be positive")
    return geometry.HalfPlanePoint(x, y)


def parse_int_list(text: str) -> list[int]:
    try:
        vals = [int(float(v)) for v in text.split(",") if v]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise UsageError("values must be positive integers")
    return vals


def parse_range(text: str, kind=float) -> tuple:
    parts = text.split(":")
    try:
        if kind is int and len(parts) == 2:
            return int(parts[0]), int(parts[1])
        if kind is float and len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise UsageError(f"malformed range {text!r}")


def parse_schemes(text: str) -> list[potential.Level]:
    try:
        return [potential.Level(s) for s in text.split(",") if s]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_table(args, R_needed: int) -> SqrtOneTable:
    path = args.sieve_cache
    if path and Path(path).exists():
        table = SqrtOneTable.load(path)
        if table.R_max >= R_needed:
            return table
    table = SqrtOneTable.build(R_needed)
    if path:
        table.save(path)
    return table


def write_rows(rows: list[dict], keys, out_format: str, stream) -> None:
    if out_format == "json":
        stream.write(json.dumps(rows, indent=1) + "\n")
    elif out_format == "csv":
        w = csv.DictWriter(stream, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for k, v in row.items()})
    else:
        cells = [[str(k) for k in keys]] + [
            [fmt(r[k]) if isinstance(r[k], (float, int, np.floating, np.integer)) else str(r[k]) for k in keys]
            for r in rows
        ]
        widths = [max(len(c[i]) for c in cells) for i in range(len(keys))]
        for c in cells:
            stream.write("  ".join(v.rjust(w) for v, w in zip(c, widths)).rstrip() + "\n")


# ---- commands --------------------------------------------------------------------


def cmd_roots(args) -> int:
    lo, hi = parse_range(args.levels, int)
    if not 0 <= lo <= hi <= MAX_LEVEL:
        raise UsageError(f"need 0 <= ell_min <= ell_max <= {MAX_LEVEL}")
    if args.format == "json":
        sys.stdout.write(roots.representations_to_json(lo, hi) + "\n")
    elif args.format == "csv":
        sys.stdout.write(roots.roots_to_csv(roots.enumerate_levels(lo, hi)))
    else:
        rows = [roots.root_row(a) for a in roots.enumerate_levels(lo, hi)]
        write_rows(rows, roots.ROW_KEYS, "text", sys.stdout)
    return 0


def _series(args, z, R, table):
    if args.reduce:
        z, _ = geometry.reduce_to_fundamental(z)
    return potential.PotentialSeries.compute(z, R, table, threads=args.threads, checkpoint=args.checkpoint)


def cmd_potential_eval(args) -> int:
    z = parse_z(args.z)
    level = parse_schemes(args.scheme)[0]
    scheme = potential.TruncationScheme(args.R, level, args.avg_window)
    table = load_table(args, args.R)
    if args.reduce:
        z, _ = geometry.reduce_to_fundamental(z)
    est = potential.u_truncated(
        z, scheme, table, threads=args.threads, checkpoint=args.checkpoint, partials_every=args.partials_every
    )
    row = {"x": z.x, "y": z.y, "R": args.R, "scheme": level.value, "value": est.value}
    write_rows([row], list(row), args.format, sys.stdout)
    if est.partials:
        write_rows([{"R": r, "value": v} for r, v in est.partials], ["R", "value"], args.format, sys.stdout)
    return 0


def cmd_potential_table(args) -> int:
    if args.paper_tables:
        return _reference_tables(args)
    if not args.z:
        raise UsageError("--z is required unless --paper-tables is given")
    Rs = parse_int_list(args.R)
    levels = parse_schemes(args.scheme)
    table = load_table(args, max(Rs))
    rows = []
    for ztext in args.z:
        z = parse_z(ztext)
        s = _series(args, z, max(Rs), table)
        for R in Rs:
            row = {"x": s.z.x, "y": s.z.y, "R": R}
            for lv in levels:
                row[lv.value] = s.value(potential.TruncationScheme(R, lv, args.avg_window))
            rows.append(row)
    write_rows(rows, ["x", "y", "R"] + [lv.value for lv in levels], args.format, sys.stdout)
    return 0


def _reference_tables(args) -> int:
    R_top = max(LADDER_R + CINF_R)
    table = load_table(args, R_top)
    series = {name: potential.PotentialSeries.compute(z, R_top, table, threads=args.threads) for name, z in REF_POINTS.items()}
    out = []
    for level, Rs in [
        (potential.Level.RAW, LADDER_R),
        (potential.Level.C0, LADDER_R),
        (potential.Level.C1, LADDER_R),
        (potential.Level.C2, LADDER_R),
        (potential.Level.CINF, CINF_R),
    ]:
        rows = []
        for name, s in series.items():
            row = {"level": level.value, "point": name}
            for R, v in zip(Rs, s.values(level, Rs)):
                row[str(R)] = float(v)
            rows.append(row)
        if args.format == "json":
            out.extend(rows)
        else:
            write_rows(rows, ["level", "point"] + [str(R) for R in Rs], args.format, sys.stdout)
            if args.format == "text":
                sys.stdout.write("\n")
    if args.format == "json":
        sys.stdout.write(json.dumps(out, indent=1) + "\n")
    return 0


def cmd_potential_grid(args) -> int:
    x0, x1, nx = parse_range(args.re)
    y0, y1, ny = parse_range(args.im)
    if nx < 1 or ny < 1 or y0 <= 0:
        raise UsageError("grid needs positive counts and Im z > 0")
    table = load_table(args, args.R)
    level = parse_schemes(args.scheme)[0]
    scheme = potential.TruncationScheme(args.R, level, args.avg_window)
    rows, masked = [], 0
    for y in np.linspace(y0, y1, ny):
        for x in np.linspace(x0, x1, nx):
            try:
                u = potential.PotentialSeries.compute((float(x), float(y)), args.R, table, threads=args.threads).value(scheme)
                rows.append({"x": float(x), "y": float(y), "U": u, "logU": math.log(u), "masked": 0})
            except PoleProximity:
                masked += 1
                rows.append({"x": float(x), "y": float(y), "U": math.nan, "logU": math.nan, "masked": 1})
    keys = ["x", "y", "U", "logU", "masked"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_rows(rows, keys, "csv", fh)
        print(f"rows={len(rows)} masked={masked}", file=sys.stderr)
    else:
        write_rows(rows, keys, args.format, sys.stdout)
    return 0


def _read_points(path) -> list[dunkl.PlanePoint]:
    pts = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                pts.append(dunkl.PlanePoint(float(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                if pts:  # tolerate a header row only
                    raise UsageError(f"bad point row {rec!r} in {path}") from None
    return pts


def cmd_dunkl_scan(args) -> int:
    if args.m < 0 or args.ell_max < 1:
        raise UsageError("need m >= 0 and ell-max >= 1")
    if args.points:
        pts = _read_points(args.points)
    else:
        rng = np.random.default_rng(args.seed)
        pts = [dunkl.PlanePoint(float(u), float(v)) for u, v in rng.uniform(-2.0, 2.0, size=(args.n_points, 2))]
    rows = []
    for pt in pts:
        for ell in range(1, args.ell_max + 1):
            c = dunkl.y_coefficient(args.m, ell, pt, args.K)
            ct = dunkl.trace_coefficient(args.m, ell, pt, args.K)
            rows.append({"u": pt.u, "v": pt.v, "ell": ell, "c": c.value, "tail_bound": float(c.tail_bound), "c_trace": ct.value})
    keys = ["u", "v", "ell", "c", "tail_bound", "c_trace"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_rows(rows, keys, "csv", fh)
    else:
        write_rows(rows, keys, args.format, sys.stdout)
    return 0


def cmd_sieve_build(args) -> int:
    out = args.out or args.sieve_cache
    if not out:
        raise UsageError("sieve build needs --out or --sieve-cache")
    table = SqrtOneTable.build(args.R)
    table.save(out)
    print(f"R_max={table.R_max} residues={table.total} path={out}")
    return 0


def cmd_sieve_verify(args) -> int:
    path = args.path or args.sieve_cache
    if not path:
        raise UsageError("sieve verify needs a path or --sieve-cache")
    table = SqrtOneTable.load(path)
    print(f"checksum OK R_max={table.R_max} residues={table.total}")
    return 0


def cmd_geometry_reduce(args) -> int:
    z = parse_z(args.z)
    w, g = geometry.reduce_to_fundamental(z)
    name = next((n for n, e in _NAMED.items() if g.projectively_equal(e)), "")
    row = {"x": w.x, "y": w.y, "a": g.a, "b": g.b, "c": g.c, "d": g.d, "det": g.det, "element": name}
    write_rows([row], list(row), args.format, sys.stdout)
    return 0


# ---- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["text", "csv", "json"], default="text")
    common.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    common.add_argument("--sieve-cache", default=os.environ.get("KMC_SIEVE_CACHE"), help="SQ1T cache file (env KMC_SIEVE_CACHE)")
    common.add_argument("--checkpoint", default=None, help="UCKP sidecar for resumable potential sums")

    p = _Parser(prog="kmc", description="AE3 roots, the automorphic Calogero potential and Dunkl plane checks.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("roots", parents=[common], help="list real roots by level")
    r.add_argument("--levels", required=True, help="ELL_MIN:ELL_MAX")
    r.set_defaults(func=cmd_roots)

    pot = sub.add_parser("potential", help="evaluate U(z)")
    psub = pot.add_subparsers(dest="action", required=True, parser_class=_Parser)

    def pot_common(sp):
        sp.add_argument("--scheme", default="cinf", help="raw,c0,c1,c2,cinf,avg (comma list for table)")
        sp.add_argument("--avg-window", type=float, default=1.0 / 3.0)
        sp.add_argument("--reduce", action="store_true", help="reduce z into the fundamental domain first")

    ev = psub.add_parser("eval", parents=[common])
    ev.add_argument("--z", required=True, help="X,Y")
    ev.add_argument("--R", type=int, required=True)
    ev.add_argument("--partials-every", type=int, default=None)
    pot_common(ev)
    ev.set_defaults(func=cmd_potential_eval)

    tb = psub.add_parser("table", parents=[common])
    tb.add_argument("--z", action="append", help="X,Y (repeatable)")
    tb.add_argument("--R", "--R-list", dest="R", default="10000,100000")
    tb.add_argument("--paper-tables", action="store_true", help="reproduce the reference ladder tables at z1, z2")
    pot_common(tb)
    tb.set_defaults(func=cmd_potential_table)

    gr = psub.add_parser("grid", parents=[common])
    gr.add_argument("--re", required=True, help="A:B:N")
    gr.add_argument("--im", required=True, help="C:D:M")
    gr.add_argument("--R", type=int, required=True)
    gr.add_argument("--out", default=None)
    pot_common(gr)
    gr.set_defaults(func=cmd_potential_grid)

    dk = sub.add_parser("dunkl", help="rank-2 plane coefficients")
    dsub = dk.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sc = dsub.add_parser("scan", parents=[common])
    sc.add_argument("--m", type=int, required=True)
    sc.add_argument("--ell-max", type=int, required=True)
    sc.add_argument("--points", default=None, help="CSV of u,v rows")
    sc.add_argument("--n-points", type=int, default=20)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--K", type=int, default=None, help="window half-width (default: automatic)")
    sc.add_argument("--out", default=None)
    sc.set_defaults(func=cmd_dunkl_scan)

    sv = sub.add_parser("sieve", help="square roots of 1 modulo r")
    ssub = sv.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sb = ssub.add_parser("build", parents=[common])
    sb.add_argument("--R", type=int, required=True)
    sb.add_argument("--out", default=None)
    sb.set_defaults(func=cmd_sieve_build)
    svf = ssub.add_parser("verify", parents=[common])
    svf.add_argument("path", nargs="?", default=None)
    svf.set_defaults(func=cmd_sieve_verify)

    ge = sub.add_parser("geometry", help="half-plane utilities")
    gsub = ge.add_subparsers(dest="action", required=True, parser_class=_Parser)
    rd = gsub.add_parser("reduce", parents=[common])
    rd.add_argument("--z", required=True, help="X,Y")
    rd.set_defaults(func=cmd_geometry_reduce)
    return p


_VALUE_FLAGS = ("--z", "--re", "--im", "--levels")


def _glue_negative_values(argv: list[str]) -> list[str]:
    # "--z -0.2,1.4" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in "0123456789.":
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"kmc: error: {exc}", file=sys.stderr)
        print("code=usage", file=sys.stderr)
        return 2
    except KMCError as exc:
        print(f"kmc: error: {exc}", file=sys.stderr)
        extra = f" mirror={exc.mirror}" if isinstance(exc, PoleProximity) and exc.mirror is not None else ""
        print(f"code={exc.code}{extra}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        print(f"kmc: error: {exc}", file=sys.stderr)
        print("code=usage" if isinstance(exc, ValueError) else "code=numerical", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 3
    except OSError as exc:
        print(f"kmc: error: {exc}", file=sys.stderr)
        print("code=io", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
