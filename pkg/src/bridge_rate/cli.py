"""Command-line entry point.

Every run echoes its configuration into the output metadata ('#'-prefixed
lines in CSV, a "meta" object in JSON), so a result file identifies the
exact command, law, and seed that produced it.  Data sections are byte
identical across runs of the same config and seed; wallclock readings stay
in the metadata.

Exit codes: 0 success, 2 invalid configuration, 3 size-cap or solver
failure.  Errors print one machine-parsable ``CODE: message`` line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (QuadratureFailure, SizeCap, SolverFailure,
                     ValidationError)
from .lattice_law import load_law
from .local_limit import QuadratureSpec, rho, tau
from .fm_distance import EmpiricalMeasure, fm_empirical, w1_empirical
from .path_sim import (PathSample, RngStream, bridge_matrix,
                       conditioned_matrix, empirical_matrix, walk_matrix,
                       wrap_paths)
from .rate_lab import (convergence_table, gc_baseline, gc_equivalence_check,
                       inequality_spotchecks, tau_delta_for)
from .rn_weighting import deconditioning_sides, functional_battery
from .walk_pmf import exact_pmf

SEED_ENV = "BRIDGE_RATE_SEED"

_SAMPLE_KINDS = {
    "walk": "walk",
    "conditioned": "conditioned_walk",
    "bridge": "brownian_bridge",
    "empirical": "empirical_process",
}


def _parse_n_grid(spec: str) -> list[int]:
    """Comma list ("16,64,256") or geometric range ("64:1024:geom")."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3 or parts[2] != "geom":
            raise ValidationError(f"bad n-grid {spec!r}; use start:stop:geom")
        start, stop = int(parts[0]), int(parts[1])
        if start < 1 or stop < start:
            raise ValidationError(f"bad n-grid range {spec!r}")
        out = []
        n = start
        while n <= stop:
            out.append(n)
            n *= 2
        return out
    try:
        return [int(x) for x in spec.split(",") if x]
    except ValueError:
        raise ValidationError(f"bad n list {spec!r}")


def _meta_lines(args: argparse.Namespace, wallclock: float | None = None,
                **extra) -> list[str]:
    skip = {"func", "out"}
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}
    meta = {"version": __version__, **echo, **extra}
    if wallclock is not None:
        meta["wallclock_s"] = round(wallclock, 3)
    return [f"# {k}={v}" for k, v in meta.items()]


def _write_csv(path: str, meta: list[str], header: list[str],
               rows: list[list]) -> None:
    with open(path, "w") as fh:
        for line in meta:
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in row) + "\n")


def _write_json(path: str, meta: dict, result: dict) -> None:
    with open(path, "w") as fh:
        json.dump({"meta": meta, "result": result}, fh, indent=2)
        fh.write("\n")


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    return int(env) if env else 0


def _functional(name: str):
    battery = {f.name: f for f in functional_battery()}
    aliases = {f"F{i+1}": f for i, f in enumerate(functional_battery())}
    if name in battery:
        return battery[name]
    if name.upper() in aliases:
        return aliases[name.upper()]
    raise ValidationError(
        f"unknown functional {name!r}; choose from "
        f"{', '.join(list(aliases) + list(battery))}")


# ---------------------------------------------------------------------------
# subcommand implementations

def _cmd_pmf(args) -> int:
    law = load_law(args.law)
    start = time.perf_counter()
    pmf = exact_pmf(law, args.n, args.t)
    rows = [[float(v), float(p)] for v, p in zip(pmf.values, pmf.probs)]
    _write_csv(args.out, _meta_lines(args, time.perf_counter() - start),
               ["value", "prob"], rows)
    return 0


def _cmd_rho(args) -> int:
    law = load_law(args.law)
    ns = _parse_n_grid(args.n_grid)
    start = time.perf_counter()
    rows = [[n, rho(law, n)] for n in ns]
    _write_csv(args.out, _meta_lines(args, time.perf_counter() - start),
               ["n", "rho"], rows)
    return 0


def _cmd_tau(args) -> int:
    law = load_law(args.law)
    ns = _parse_n_grid(args.n_grid)
    delta = args.delta if args.delta is not None else tau_delta_for(law)
    quad = QuadratureSpec(abs_tol=args.abs_tol, max_depth=args.max_depth)
    start = time.perf_counter()
    rows = [[n, tau(law, n, delta, args.s, quad)] for n in ns]
    _write_csv(args.out, _meta_lines(args, time.perf_counter() - start,
                                     delta=delta),
               ["n", "tau"], rows)
    return 0


def _cmd_sample(args) -> int:
    if args.kind not in _SAMPLE_KINDS:
        raise ValidationError(f"unknown kind {args.kind!r}; choose from "
                              f"{', '.join(_SAMPLE_KINDS)}")
    kind = _SAMPLE_KINDS[args.kind]
    rng = RngStream(_seed(args))
    start = time.perf_counter()
    if kind == "walk":
        law = load_law(args.law)
        matrix = walk_matrix(law, args.n, args.count, rng)
    elif kind == "conditioned_walk":
        law = load_law(args.law)
        matrix = conditioned_matrix(law, args.n, args.count, rng)
    elif kind == "brownian_bridge":
        matrix = bridge_matrix(args.n, args.count, rng)
    else:
        matrix = empirical_matrix(args.n, args.count, rng)
    grid_n = matrix.shape[1] - 1
    rows = []
    for sid in range(matrix.shape[0]):
        for k in range(grid_n + 1):
            rows.append([sid, k, k / grid_n, float(matrix[sid, k])])
    _write_csv(args.out, _meta_lines(args, time.perf_counter() - start,
                                     path_kind=kind, grid_n=grid_n,
                                     seed_used=_seed(args)),
               ["sample_id", "k", "t", "value"], rows)
    return 0


def _cmd_lemma1(args) -> int:
    law = load_law(args.law)
    F = _functional(args.functional)
    lhs, rhs = deconditioning_sides(law, args.n, args.t, F)
    print(f"conditioned_side={lhs!r}")
    print(f"weighted_side={rhs!r}")
    print(f"residual={abs(lhs - rhs)!r}")
    if args.out:
        _write_json(args.out,
                    {"version": __version__, "law": law.name, "n": args.n,
                     "t": args.t, "functional": F.name},
                    {"conditioned_side": lhs, "weighted_side": rhs,
                     "residual": abs(lhs - rhs)})
    return 0


def _read_paths_csv(path: str) -> list[PathSample]:
    by_id: dict[int, list[tuple[int, float]]] = {}
    kind = "walk"
    with open(path) as fh:
        header: list[str] | None = None
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# path_kind="):
                    kind = line.split("=", 1)[1]
                continue
            if header is None:
                header = line.split(",")
                expected = ["sample_id", "k", "t", "value"]
                if header != expected:
                    raise ValidationError(
                        f"{path}: expected columns {expected}, got {header}")
                continue
            sid_s, k_s, _t, v_s = line.split(",")
            by_id.setdefault(int(sid_s), []).append((int(k_s), float(v_s)))
    if not by_id:
        raise ValidationError(f"{path}: no path rows")
    paths = []
    for sid in sorted(by_id):
        pts = sorted(by_id[sid])
        values = np.asarray([v for _, v in pts])
        paths.append(PathSample(grid_n=len(pts) - 1, values=values, kind=kind))
    return paths


def _cmd_distance(args) -> int:
    mu = EmpiricalMeasure(_read_paths_csv(args.a))
    nu = EmpiricalMeasure(_read_paths_csv(args.b))
    start = time.perf_counter()
    if args.metric == "fm":
        est = fm_empirical(mu, nu)
    elif args.metric == "w1":
        est = w1_empirical(mu, nu)
    else:
        raise ValidationError(f"unknown metric {args.metric!r}")
    _write_json(args.out,
                {"version": __version__, "a": args.a, "b": args.b,
                 "metric": args.metric,
                 "wallclock_s": round(time.perf_counter() - start, 3)},
                {"value": est.value, "kind": est.kind,
                 "solver_status": est.solver_status,
                 "half_width": est.half_width, "sizes": list(est.sizes)})
    return 0


def _cmd_rate(args) -> int:
    law = load_law(args.law)
    ns = _parse_n_grid(args.n)
    rng = RngStream(_seed(args))
    start = time.perf_counter()
    rows = convergence_table(law, ns, args.samples, args.grid_bridge, rng,
                             reps=args.reps, tau_delta=args.delta,
                             threads=args.threads)
    wall = [round(r.wallclock_s, 3) for r in rows]
    _write_csv(args.out,
               _meta_lines(args, time.perf_counter() - start,
                           seed_used=_seed(args), row_wallclock_s=wall),
               ["n", "fm_value", "fm_half_width", "rho_value", "tau_value"],
               [[r.n, r.fm_value, r.fm_half_width, r.rho_value, r.tau_value]
                for r in rows])
    return 0


def _cmd_gc_check(args) -> int:
    rng = RngStream(_seed(args))
    start = time.perf_counter()
    cross = gc_equivalence_check(args.n, args.samples, rng, reps=args.reps)
    base = gc_baseline(args.n, args.samples, rng, reps=args.reps)
    slack = 2.0 * (cross.half_width + base.half_width)
    _write_json(args.out,
                {"version": __version__, "n": args.n, "samples": args.samples,
                 "reps": args.reps, "seed_used": _seed(args),
                 "wallclock_s": round(time.perf_counter() - start, 3)},
                {"cross_value": cross.value,
                 "cross_half_width": cross.half_width,
                 "baseline_value": base.value,
                 "baseline_half_width": base.half_width,
                 "indistinguishable": cross.value <= base.value + slack})
    return 0


def _cmd_spotcheck(args) -> int:
    law = load_law(args.law)
    ns = _parse_n_grid(args.n)
    rng = RngStream(_seed(args))
    start = time.perf_counter()
    rows = inequality_spotchecks(law, ns, args.samples, rng)
    _write_json(args.out,
                {"version": __version__, "law": law.name,
                 "samples": args.samples, "seed_used": _seed(args),
                 "wallclock_s": round(time.perf_counter() - start, 3)},
                {"rows": [{"n": r.n, "lhs": r.lhs, "lhs_stderr": r.lhs_stderr,
                           "rhs": r.rhs, "rhs_stderr": r.rhs_stderr,
                           "passed": r.passed} for r in rows],
                 "all_passed": all(r.passed for r in rows)})
    return 0


def _cmd_report(args) -> int:
    from .report import render_report
    written = render_report(args.input, args.outdir)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge-rate",
        description="Conditioned-walk / Brownian-bridge rate laboratory")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for row-parallel experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="exact pmf of the rescaled partial sum")
    p.add_argument("--law", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--out", default="pmf.csv")
    p.set_defaults(func=_cmd_pmf)

    p = sub.add_parser("rho", help="return-probability error over an n grid")
    p.add_argument("--law", required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--out", default="rho.csv")
    p.set_defaults(func=_cmd_rho)

    p = sub.add_parser("tau", help="characteristic-function error integral")
    p.add_argument("--law", required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--delta", type=float, default=None,
                   help="integration-range exponent (default per law)")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--abs-tol", type=float, default=1e-8)
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--out", default="tau.csv")
    p.set_defaults(func=_cmd_tau)

    p = sub.add_parser("sample", help="draw paths and write them long-form")
    p.add_argument("--kind", required=True,
                   help="walk | conditioned | bridge | empirical")
    p.add_argument("--law", default="rademacher")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="paths.csv")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("lemma1", help="both sides of the de-conditioning "
                                      "identity plus their residual")
    p.add_argument("--law", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--functional", default="F2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_lemma1)

    p = sub.add_parser("distance", help="distance between two path files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--metric", default="fm")
    p.add_argument("--out", default="dist.json")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("rate", help="distance-decay table over n")
    p.add_argument("--law", required=True)
    p.add_argument("--n", required=True, help="comma list or start:stop:geom")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--grid-bridge", type=int, default=256)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--out", default="rate.csv")
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("gc-check", help="empirical process vs conditioned "
                                        "Poisson walk distance check")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--out", default="gc.json")
    p.set_defaults(func=_cmd_gc_check)

    p = sub.add_parser("spotcheck", help="tail-vs-head sup-norm inequality "
                                         "checks on conditioned samples")
    p.add_argument("--law", default="rademacher")
    p.add_argument("--n", required=True, help="comma list or start:stop:geom")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", default="spotcheck.json")
    p.set_defaults(func=_cmd_spotcheck)

    p = sub.add_parser("report", help="render figures for a result CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except (SizeCap, SolverFailure, QuadratureFailure) as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
