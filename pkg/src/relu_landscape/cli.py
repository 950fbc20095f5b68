"""Command-line runner: ``relu-landscape <command> [options]``.

Every command writes machine-readable files (JSON, plus CSV for tables) to
``--out`` (default ``$RELU_LANDSCAPE_OUT`` or the current directory) together
with ``manifest.json``; stdout carries a short human-readable summary.

Exit codes: 0 success, 2 usage error, 3 convergence failure, 4 domain error.
"""

import argparse
import csv
import json
import os
import sys
import time

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_DOMAIN = 0, 2, 3, 4
OUT_ENV = "RELU_LANDSCAPE_OUT"
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def parse_grid(text, integer=False):
    """``"start:end[:points]"`` with geometric spacing, or a single number."""
    import numpy as np

    parts = text.split(":")
    try:
        if len(parts) == 1:
            vals = [float(parts[0])]
        elif len(parts) in (2, 3):
            lo, hi = float(parts[0]), float(parts[1])
            n = int(parts[2]) if len(parts) == 3 else 8
            if lo <= 0 or hi <= 0 or n < 1:
                raise ValueError
            vals = list(np.geomspace(lo, hi, n))
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:end[:points]") from None
    if integer:
        vals = sorted({int(round(v)) for v in vals})
    return vals


class Runner:
    """Collects output files and writes the manifest."""

    def __init__(self, args):
        self.args = args
        self.out = args.out or os.environ.get(OUT_ENV) or "."
        os.makedirs(self.out, exist_ok=True)
        self.outputs = []

    def path(self, name):
        return os.path.join(self.out, name)

    def write_json(self, name, payload):
        payload = {"schema_version": SCHEMA_VERSION, **_jsonable(payload)}
        with open(self.path(name), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.outputs.append(self.path(name))

    def write_csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        self.outputs.append(self.path(name))

    def manifest(self, wall):
        try:
            from importlib.metadata import version

            ver = version("relu-landscape")
        except Exception:
            ver = "unknown"
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "out")}
        with open(self.path("manifest.json"), "w") as fh:
            json.dump({
                "command": self.args.command, "parameters": params,
                "seed": params.get("seed"), "version": ver,
                "wall_time_s": round(wall, 3), "outputs": self.outputs,
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _family(args):
    from .families import FamilyId

    return FamilyId(args.type, args.p, args.m)


def _embedded(pt):
    from .symmetry import embed

    W = embed(pt)
    return getattr(W, "W", W)


# --- commands ----------------------------------------------------------------------


def cmd_solve(args, run):
    from .solver import classify_type, solve_family

    fam = _family(args)
    pt = solve_family(fam, args.d, tol=args.tol)
    labels = pt.descriptor.labels()
    payload = {
        "family": fam.as_dict(), "d": args.d, "xi": list(pt.xi), "labels": labels,
        "residual": pt.info["residual"], "iterations": pt.info["iterations"],
        "tolerance": pt.info["tol"], "classified_type": classify_type(pt),
    }
    run.write_json("solve.json", payload)
    print(f"{fam.label} at d={args.d}: residual {pt.info['residual']:.2e}")
    for name, v in zip(labels, pt.xi):
        print(f"  {name:>6} = {v:.16g}")


def cmd_fps(args, run):
    from .errors import StructureError
    from .fps import direct_coeffs, fit_coeffs_from_path, reference_expansion
    from .solver import continue_family

    fam = _family(args)
    payload = {"family": fam.as_dict(), "method": args.method}
    if args.method == "direct":
        try:
            dc = direct_coeffs(fam)
        except StructureError:
            dc = None
        if dc is not None:
            payload["direct"] = [
                {"coordinate": i, "order": j, "value": float(v)} for (i, j), v in zip(dc.slots, dc.values)
            ]
            payload["residual"] = dc.residual
            payload["info"] = dc.info
            exp = dc.expansion()
        else:
            payload["note"] = "no coefficient system for this family; extracted in extended precision"
            exp = reference_expansion(fam, J=args.order)
    else:
        path = continue_family(fam, 1e6, 1e2, samples_per_decade=20)
        exp = fit_coeffs_from_path(path, J=args.order)
    payload["expansion"] = exp.to_json()
    run.write_json("fps.json", payload)
    print(f"{fam.label}: series in d^(-1/{exp.kappa}), source {exp.source}")
    if "info" in payload and "theta" in payload["info"]:
        print(f"  theta = {payload['info']['theta']:.16g}")
    for entry in payload.get("direct", []):
        print(f"  xi[{entry['coordinate']}] order {entry['order']}: {entry['value']:.16g}")


def cmd_spectrum(args, run):
    from .spectrum import IRREPS, adapted_spectrum, full_spectrum
    from .solver import solve_family

    fam = _family(args)
    irreps = IRREPS if args.irrep == "all" else (args.irrep,)
    reports, rows = [], []
    for d in parse_grid(args.d, integer=True):
        pt = solve_family(fam, d)
        W = _embedded(pt)
        if args.method == "dense":
            rep = full_spectrum(W, pt.descriptor)
            rep.groups = {k: v for k, v in rep.groups.items() if k in irreps}
        else:
            rep = adapted_spectrum(W, pt.descriptor, irreps=irreps, trivial_from=pt)
        js = rep.to_json()
        reports.append(js)
        for g in js["groups"]:
            for e in g["eigenvalues"]:
                rows.append([d, g["irrep"], e["value"], e["multiplicity"]])
        print(f"{fam.label} d={d} ({rep.method}): min eigenvalue {rep.minimum():.6g}")
        for irrep in irreps:
            if irrep in rep.groups:
                vals = ", ".join(f"{v:.5g}" for v in rep.eigenvalues(irrep))
                print(f"  {irrep}: {vals}")
    run.write_json("spectrum.json", {"family": fam.as_dict(), "reports": reports})
    run.write_csv("spectrum.csv", ["d", "irrep", "value", "multiplicity"], rows)


def _table_rows(label, report):
    keys, rows = report.to_csv_rows()
    return ["family"] + keys, [[label] + r for r in rows]


def cmd_table1(args, run):
    from .families import FamilyId
    from .spectrum import table_report

    grid = parse_grid(args.d_grid, integer=True)
    header, rows, payload = None, [], {}
    for fam in (FamilyId("II", 1, 0), FamilyId("II", 1, 1)):
        rep = table_report(fam, "asymptotic-fit", grid=grid)
        header, r = _table_rows(fam.label, rep)
        rows.extend(r)
        payload[fam.label] = rep.rows
        print(f"{fam.label} (k = d + {fam.m}):")
        for row in rep.rows:
            slope = f"{row['slope']:.4f} d + " if row["slope"] else ""
            flag = "  [flagged]" if row["flagged"] else ""
            print(f"  {row['irrep']}: {slope}{row['constant']:.4f}{flag}")
    run.write_json("table1.json", {"grid": grid, "families": payload})
    run.write_csv("table1.csv", header, rows)


def cmd_table2(args, run):
    from .families import FamilyId
    from .spectrum import table_report

    header, rows, payload = None, [], {}
    for fam in (FamilyId("I", 1, 1), FamilyId("I", 1, 2)):
        rep = table_report(fam, "exact-d", d=args.d)
        header, r = _table_rows(fam.label, rep)
        rows.extend(r)
        payload[fam.label] = rep.rows
        for irrep in ("t", "s"):
            vals = ", ".join(f"{x['value']:.5f}" for x in rep.rows_for(irrep))
            print(f"{fam.label} d={args.d} {irrep}: {vals}")
    run.write_json("table2.json", {"d": args.d, "families": payload})
    run.write_csv("table2.csv", header, rows)


def cmd_xavier(args, run):
    from .extras import xavier_mc

    est = xavier_mc(args.d, args.samples, args.seed)
    run.write_json("xavier.json", est.as_dict())
    print(
        f"d={args.d}: E(output difference)^2 = {est.estimate:.5f} +- {est.stderr:.5f}, "
        f"bounds [{est.lo:.5f}, {est.hi:.5f}], within: {est.within_bounds}"
    )


def cmd_fossil(args, run):
    from .extras import global_min_complex

    cx = global_min_complex(args.k, args.d, samples=args.samples, seed=args.seed)
    run.write_json("fossil.json", cx.as_dict())
    print(f"k={args.k}, d={args.d}: {len(cx.vertices)} vertices, {len(cx.edges)} edges, connected: {cx.connected}")
    if cx.samples:
        print(f"  max loss over {cx.samples} sampled points: {cx.max_sampled_loss:.3e}")


def cmd_interlace(args, run):
    from .spectrum import interlacing_constants

    grid = parse_grid(args.d_grid, integer=True)
    (hi, lo), samples = interlacing_constants(grid)
    rows = [list(r) for r in samples]
    payload = {"grid": grid, "samples": rows, "constants": {"lambda_max": hi, "lambda_min": lo}}
    run.write_json("interlace.json", payload)
    run.write_csv("interlace.csv", ["d", "lambda_min", "lambda_max", "verdict"], rows)
    print(f"fitted constants: {hi:.4f}, {lo:.4f}")


# --- argument parsing --------------------------------------------------------------


def _family_args(p):
    p.add_argument("--type", required=True, choices=["I", "II"])
    p.add_argument("--p", required=True, type=int, choices=[0, 1])
    p.add_argument("--m", required=True, type=int, choices=[0, 1, 2])


def build_parser():
    parser = argparse.ArgumentParser(prog="relu-landscape", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    parser.add_argument("--threads", type=int, default=None, help="cap on BLAS worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="critical point of a family at d")
    _family_args(p)
    p.add_argument("--d", required=True, type=float)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("fps", help="series coefficients of a family")
    _family_args(p)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--method", choices=["direct", "fit"], default="direct")
    p.set_defaults(func=cmd_fps)

    p = sub.add_parser("spectrum", help="Hessian spectrum by isotypic component")
    _family_args(p)
    p.add_argument("--d", required=True, help="integer d or grid start:end[:points]")
    p.add_argument("--method", choices=["dense", "adapted"], default="adapted")
    p.add_argument("--irrep", choices=["all", "t", "s", "x", "y"], default="all")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("table1", help="fitted trivial/standard branches of the type II families")
    p.add_argument("--d-grid", default="100:1000:8")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("table2", help="exact trivial/standard spectra of the type I families")
    p.add_argument("--d", type=int, default=10)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("xavier", help="Monte-Carlo check of the random-initialization bounds")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_xavier)

    p = sub.add_parser("fossil", help="zero-loss complex for small k, d")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fossil)

    p = sub.add_parser("interlace", help="2x2 interlacing block along the type II k=d+2 family")
    p.add_argument("--d-grid", default="100:1000:8")
    p.set_defaults(func=cmd_interlace)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from .errors import ConvergenceError, DomainError, StructureError, UnknownFamilyError

    start = time.perf_counter()
    try:
        run = Runner(args)
        args.func(args, run)
    except (UsageError, UnknownFamilyError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    run.manifest(time.perf_counter() - start)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
