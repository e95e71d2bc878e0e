"""Command-line front-end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .cce import load_model, solve_cce
from .experiment import ExperimentConfig, default_threads, empirical_coverage, parse_alpha_grid, run_experiment
from .linalg import read_matrix, read_vector, simplex_point, write_matrix
from .robust import BoxUncertainty, box_counterpart, box_from_realizations, frobenius_counterpart, solve_robust
from .sampling import SeededRng
from .solver import SolverConfig, SolverError, solve

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_solver_flags(p):
    p.add_argument("--exact-max-n", type=int, default=16, help="largest n solved by enumeration")
    p.add_argument("--starts", type=int, default=None, help="multistart count (default 3n + 50)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def _solver_cfg(args) -> SolverConfig:
    try:
        return SolverConfig(exact_max_n=args.exact_max_n, num_starts=args.starts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_matrix(path):
    try:
        return read_matrix(path)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None


def _load_realizations(directory):
    files = sorted(glob.glob(os.path.join(directory, "*.txt")))
    if not files:
        raise DataError(f"no *.txt matrices in {directory}")
    return np.stack([_load_matrix(f) for f in files])


def _solution_dict(sol) -> dict:
    return {"value": sol.value, "x": [float(v) for v in sol.x], "status": sol.status.value,
            "support": list(sol.support), "starts": sol.starts}


def _print_solution(sol, as_json, extra=None):
    if as_json:
        d = _solution_dict(sol)
        d.update(extra or {})
        print(json.dumps(d))
        return
    for k, v in (extra or {}).items():
        print(f"{k}: {v!r}")
    print(f"value: {sol.value!r}")
    print(f"status: {sol.status.value}")
    print("x: " + " ".join(repr(float(v)) for v in sol.x))


def cmd_solve(args) -> int:
    Q = _load_matrix(args.matrix)
    sol = solve(Q, _solver_cfg(args), SeededRng(args.seed, 0))
    _print_solution(sol, args.json)
    return EXIT_OK


def cmd_cce(args) -> int:
    if (args.alpha is None) == (args.alpha_grid is None):
        raise UsageError("give exactly one of --alpha or --alpha-grid")
    try:
        alphas = [args.alpha] if args.alpha is not None else list(parse_alpha_grid(args.alpha_grid))
        if not all(0 < a < 1 for a in alphas):
            raise ValueError("alpha must lie in (0, 1)")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        model = load_model(args.model)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"invalid model: {exc}") from None
    reals = _load_realizations(args.realizations) if args.realizations else None
    if reals is not None and reals.shape[1] != model.n:
        raise DataError("realization dimension does not match the model")
    cfg = _solver_cfg(args)
    rows = []
    for k, a in enumerate(alphas):
        sol, t = solve_cce(model, a, cfg, SeededRng(args.seed, k))
        cov = empirical_coverage(sol.x, t, reals) if reals is not None else None
        rows.append((a, sol, t, cov))
    if args.json:
        out = []
        for a, sol, t, cov in rows:
            d = _solution_dict(sol)
            d.update(alpha=a, t=t, coverage=cov)
            out.append(d)
        print(json.dumps(out if args.alpha_grid else out[0]))
    else:
        print("alpha,t,status,coverage")
        for a, sol, t, cov in rows:
            print(f"{a!r},{t!r},{sol.status.value},{'' if cov is None else repr(cov)}")
    return EXIT_OK


def cmd_robust(args) -> int:
    Q_nom = _load_matrix(args.nominal)
    if args.frobenius is not None:
        if args.realizations:
            raise UsageError("--frobenius and --realizations are exclusive")
        try:
            counterpart = frobenius_counterpart(Q_nom, args.frobenius)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif args.realizations:
        if not 0.0 < args.rho <= 1.0:
            raise UsageError(f"--rho must lie in (0, 1], got {args.rho}")
        reals = _load_realizations(args.realizations)
        try:
            lower, upper = box_from_realizations(reals)
            box = BoxUncertainty(np.minimum(lower, Q_nom), np.maximum(upper, Q_nom), Q_nom, args.rho)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        counterpart = box_counterpart(box)
    else:
        raise UsageError("give --frobenius RHO or --realizations DIR")
    if args.write_counterpart:
        write_matrix(args.write_counterpart, counterpart)
    sol = solve_robust(counterpart, _solver_cfg(args), SeededRng(args.seed, 0))
    _print_solution(sol, args.json)
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    d = {}
    if args.config:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config: {exc}") from None
    try:
        cfg = ExperimentConfig.from_dict(d)
    except (TypeError, ValueError, KeyError) as exc:
        raise DataError(f"invalid config: {exc}") from None
    changes = {}
    if args.out:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "exact_max_n", None) is not None:
        changes["solver"] = replace(cfg.solver, exact_max_n=args.exact_max_n)
    return replace(cfg, **changes)


def cmd_generate(args) -> int:
    from .experiment import generate_suite

    cfg = _experiment_config(args)
    if not cfg.output_dir:
        raise UsageError("--out is required")
    generate_suite(replace(cfg, write_matrices=True))
    print(f"wrote {cfg.num_nominal} nominal, {cfg.num_realizations} GOE and "
          f"{cfg.num_nominal * cfg.num_realizations} realization matrices to {cfg.output_dir}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    if not cfg.output_dir:
        raise UsageError("--out is required")
    threads = args.threads if args.threads is not None else default_threads()
    if threads < 1:
        raise UsageError("--threads must be positive")
    report = run_experiment(cfg, threads=threads, figures=args.figures)
    s = report.summary
    print(f"crossover alpha (nominal): {s['crossover_alpha_nominal']}")
    print(f"crossover alpha (empirical): {s['crossover_alpha_empirical']}")
    print(f"mean |coverage - alpha|: {s['coverage']['mean_abs_deviation']}")
    print(f"solver status: {s['solver_status']}")
    if s["excluded_cells"]:
        print(f"excluded cells: {len(s['excluded_cells'])}", file=sys.stderr)
    return EXIT_OK


def cmd_coverage(args) -> int:
    try:
        x = simplex_point(read_vector(args.x))
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    reals = _load_realizations(args.realizations)
    if reals.shape[1] != x.size:
        raise DataError("point and realization dimensions differ")
    cov = empirical_coverage(x, args.t, reals)
    print(json.dumps({"coverage": cov, "count": int(reals.shape[0])}) if args.json else repr(cov))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stqpcc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="minimize x'Qx over the simplex")
    p.add_argument("--matrix", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cce", help="solve the chance-constrained epigraphic problem")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-grid", help="LO:HI:STEP")
    p.add_argument("--realizations", help="directory of realized matrices for coverage")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_cce)

    p = sub.add_parser("robust", help="solve a robust counterpart")
    p.add_argument("--nominal", required=True)
    p.add_argument("--frobenius", type=float, help="Frobenius-ball radius")
    p.add_argument("--realizations", help="directory of realizations spanning the box")
    p.add_argument("--rho", type=float, default=0.8, help="box scale in (0, 1]")
    p.add_argument("--write-counterpart", help="also save the counterpart matrix")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_robust)

    for name, func, text in (("generate", cmd_generate, "write the random instance suite"),
                             ("experiment", cmd_experiment, "run the full Monte Carlo comparison")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed (default: config, else 0)")
        p.add_argument("--exact-max-n", type=int, default=None)
        if name == "experiment":
            p.add_argument("--threads", type=int, default=None,
                           help="worker processes (default: STQP_THREADS or CPU count)")
            p.add_argument("--figures", action="store_true", help="also write SVG charts")
        p.set_defaults(func=func)

    p = sub.add_parser("coverage", help="empirical probability that x'Qx <= t")
    p.add_argument("--x", required=True, help="file with the point's coordinates")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--realizations", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"stqpcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"stqpcc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"stqpcc: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
