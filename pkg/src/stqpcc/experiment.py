"""Monte Carlo comparison of chance-constrained and robust StQP solutions.

The pipeline draws uniform nominal matrices and GOE perturbations, solves the
chance-constrained equivalent for every (instance, alpha) cell, solves every
realized instance, then builds the box-robust counterpart per instance. All
randomness is addressed by ``(master_seed, stream_id)`` so each solve can run
in any worker and in any order; results are reduced by cell index.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .cce import cce_matrix, convexity_threshold
from .linalg import eig_extremes, simplex_point, write_matrix
from .robust import BoxUncertainty, box_counterpart, box_from_realizations
from .sampling import SeededRng, sample_goe, sample_uniform_symmetric, stream_id
from .solver import SolverConfig, Status, solve

log = logging.getLogger(__name__)

# item ids inside an instance's stream block (instance block = stream_id(i + 1, .))
_NOMINAL_ITEM = 1 << 31
_ROBUST_ITEM = 1 << 30
_CCE_ITEM = (1 << 31) + 1


def alpha_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    if not (0 < lo <= hi < 1 and step > 0):
        raise ValueError(f"bad alpha grid {lo}:{hi}:{step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 12) for k in range(count))


DEFAULT_ALPHAS = alpha_range(0.55, 0.99, 0.01)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 30
    num_nominal: int = 10
    num_realizations: int = 100
    beta: float = 3.0
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHAS
    rho: float = 0.8
    master_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_dir: str | None = None
    write_matrices: bool = True

    def __post_init__(self):
        grid = tuple(float(a) for a in self.alpha_grid)
        object.__setattr__(self, "alpha_grid", grid)
        if not grid or any(not 0 < a < 1 for a in grid):
            raise ValueError("alpha values must lie in (0, 1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("alpha grid must be strictly increasing")
        if min(self.n, self.num_nominal, self.num_realizations) < 1:
            raise ValueError("dimensions and counts must be at least 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "solver" in d:
            d["solver"] = SolverConfig(**d["solver"])
        grid = d.get("alpha_grid")
        if isinstance(grid, str):
            d["alpha_grid"] = parse_alpha_grid(grid)
        elif isinstance(grid, dict):
            d["alpha_grid"] = alpha_range(grid["lo"], grid["hi"], grid["step"])
        elif grid is not None:
            d["alpha_grid"] = tuple(grid)
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha_grid"] = list(self.alpha_grid)
        return d


def parse_alpha_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"alpha grid must look like LO:HI:STEP, got {text!r}")
    return alpha_range(*(float(p) for p in parts))


@dataclass(eq=False)
class Suite:
    nominals: np.ndarray       # (N, n, n)
    goes: np.ndarray           # (R, n, n)
    realizations: np.ndarray   # (N, R, n, n)


def generate_suite(cfg: ExperimentConfig) -> Suite:
    """Nominal matrices on streams ``0..N-1``, GOE draws on ``N..N+R-1``."""
    N, R, n = cfg.num_nominal, cfg.num_realizations, cfg.n
    nominals = np.stack([sample_uniform_symmetric(n, SeededRng(cfg.master_seed, i)) for i in range(N)])
    goes = np.stack([sample_goe(n, SeededRng(cfg.master_seed, N + j)) for j in range(R)])
    realizations = nominals[:, None, :, :] + cfg.beta * goes[None, :, :, :]
    suite = Suite(nominals, goes, realizations)
    if cfg.output_dir and cfg.write_matrices:
        write_suite(suite, cfg.output_dir)
    return suite


def write_suite(suite: Suite, out_dir) -> None:
    mdir = os.path.join(out_dir, "matrices")
    os.makedirs(mdir, exist_ok=True)
    for i, Q in enumerate(suite.nominals):
        write_matrix(os.path.join(mdir, f"nominal_{i:02d}.txt"), Q)
    for j, G in enumerate(suite.goes):
        write_matrix(os.path.join(mdir, f"goe_{j:03d}.txt"), G)
    for i, block in enumerate(suite.realizations):
        rdir = os.path.join(out_dir, "realizations", f"i{i:02d}")
        os.makedirs(rdir, exist_ok=True)
        for j, Q in enumerate(block):
            write_matrix(os.path.join(rdir, f"r{j:03d}.txt"), Q)


def empirical_coverage(x, t: float, realizations) -> float:
    """Fraction of realizations with ``x'Qx <= t``."""
    mats = np.asarray(realizations, dtype=float)
    if mats.ndim != 3 or mats.shape[0] == 0:
        raise ValueError("need a nonempty stack of matrices")
    x = simplex_point(x)
    vals = np.einsum("k,jkl,l->j", x, mats, x)
    return float(np.mean(vals <= t))


# ---------------------------------------------------------------- solving

@dataclass(frozen=True)
class SolveRecord:
    x: np.ndarray | None
    value: float
    status: str
    starts: int
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _solve_task(task) -> SolveRecord:
    Q, solver_cfg, seed, stream = task
    try:
        sol = solve(Q, solver_cfg, SeededRng(seed, stream))
    except Exception as exc:  # recorded and excluded, never fatal for the sweep
        return SolveRecord(None, math.nan, "Failed", 0, f"{type(exc).__name__}: {exc}")
    return SolveRecord(np.array(sol.x), sol.value, sol.status.value, sol.starts)


def _run_tasks(tasks, threads: int) -> list[SolveRecord]:
    if threads <= 1 or len(tasks) < 2:
        return [_solve_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_solve_task, tasks, chunksize=max(1, len(tasks) // (8 * threads))))


def default_threads() -> int:
    env = os.environ.get("STQP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(eq=False)
class CceCell:
    i: int
    alpha: float
    record: SolveRecord
    coverage: float = math.nan
    value_nom: float = math.nan
    emp_values: np.ndarray | None = None   # x' Q_ij x for every j

    @property
    def t(self) -> float:
        return self.record.value


@dataclass(eq=False)
class ExperimentReport:
    config: ExperimentConfig
    nominal: list[SolveRecord]
    realized: list[list[SolveRecord]]
    cells: list[CceCell]
    aggregates: list[dict]
    robust: list[SolveRecord] = field(default_factory=list)
    robust_nom_values: list[float] = field(default_factory=list)
    robust_emp_values: list[np.ndarray] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _mean(values) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return float(np.mean(vals)) if vals else math.nan


def run_cce_sweep(cfg: ExperimentConfig, suite: Suite, threads: int = 1) -> ExperimentReport:
    N, R = cfg.num_nominal, cfg.num_realizations
    seed, scfg = cfg.master_seed, cfg.solver
    tasks = [(suite.nominals[i], scfg, seed, stream_id(i + 1, _NOMINAL_ITEM)) for i in range(N)]
    tasks += [(suite.realizations[i, j], scfg, seed, stream_id(i + 1, j))
              for i in range(N) for j in range(R)]
    tasks += [(cce_matrix(suite.nominals[i], cfg.beta, a), scfg, seed, stream_id(i + 1, _CCE_ITEM + k))
              for i in range(N) for k, a in enumerate(cfg.alpha_grid)]
    records = _run_tasks(tasks, threads)
    nominal = records[:N]
    realized = [records[N + i * R: N + (i + 1) * R] for i in range(N)]
    cce_records = records[N + N * R:]

    cells = []
    A = len(cfg.alpha_grid)
    for i in range(N):
        for k, a in enumerate(cfg.alpha_grid):
            rec = cce_records[i * A + k]
            cell = CceCell(i, a, rec)
            if rec.ok:
                x = rec.x
                cell.value_nom = float(x @ suite.nominals[i] @ x)
                cell.emp_values = np.einsum("k,jkl,l->j", x, suite.realizations[i], x)
                cell.coverage = float(np.mean(cell.emp_values <= rec.value))
            else:
                warnings.warn(f"cce cell (i={i}, alpha={a}) failed: {rec.error}; excluded")
            cells.append(cell)

    report = ExperimentReport(cfg, nominal, realized, cells, [])
    report.aggregates = _cce_aggregates(report)
    return report


def _cce_aggregates(report: ExperimentReport) -> list[dict]:
    cfg = report.config
    l_nom = _mean(r.value for r in report.nominal)
    l_emp = _mean(r.value for row in report.realized for r in row)
    rows = []
    A = len(cfg.alpha_grid)
    for k, a in enumerate(cfg.alpha_grid):
        cells = [report.cells[i * A + k] for i in range(cfg.num_nominal)]
        good = [c for c in cells if c.record.ok]
        l_nom_cce = _mean(c.value_nom for c in good)
        # streamed accumulation over every (i, j) pair
        total, count = 0.0, 0
        for c in good:
            for v in c.emp_values:
                total += float(v)
                count += 1
        l_emp_cce = total / count if count else math.nan
        rows.append({
            "alpha": a, "l_nom": l_nom, "l_emp": l_emp,
            "l_nom_cce": l_nom_cce, "l_emp_cce": l_emp_cce,
            "abs_err_nom_cce": abs(l_nom_cce - l_nom),
            "abs_err_emp_cce": abs(l_emp_cce - l_emp),
        })
    return rows


def crossover(alphas, cce_err, rob_err) -> float | None:
    """Largest alpha at which the chance-constrained error is below the robust one."""
    best = None
    for a, c, r in zip(alphas, cce_err, rob_err):
        if c < r:
            best = a
    return best


def run_robust_comparison(cfg: ExperimentConfig, suite: Suite, report: ExperimentReport,
                          threads: int = 1) -> ExperimentReport:
    N = cfg.num_nominal
    tasks = []
    for i in range(N):
        lower, upper = box_from_realizations(suite.realizations[i])
        box = BoxUncertainty(lower, upper, suite.nominals[i], cfg.rho)
        tasks.append((box_counterpart(box), cfg.solver, cfg.master_seed, stream_id(i + 1, _ROBUST_ITEM)))
    report.robust = _run_tasks(tasks, threads)
    report.robust_nom_values = []
    report.robust_emp_values = []
    for i, rec in enumerate(report.robust):
        if rec.ok:
            report.robust_nom_values.append(float(rec.x @ suite.nominals[i] @ rec.x))
            report.robust_emp_values.append(np.einsum("k,jkl,l->j", rec.x, suite.realizations[i], rec.x))
        else:
            warnings.warn(f"robust solve for instance {i} failed: {rec.error}; excluded")
            report.robust_nom_values.append(math.nan)
            report.robust_emp_values.append(np.full(cfg.num_realizations, math.nan))
    l_nom_rob = _mean(report.robust_nom_values)
    emp = [float(v) for vals in report.robust_emp_values for v in vals]
    l_emp_rob = _mean(emp)
    for row in report.aggregates:
        row["l_nom_rob"] = l_nom_rob
        row["l_emp_rob"] = l_emp_rob
        row["abs_err_nom_rob"] = abs(l_nom_rob - row["l_nom"])
        row["abs_err_emp_rob"] = abs(l_emp_rob - row["l_emp"])
    report.summary = _summarize(report, suite)
    return report


def _summarize(report: ExperimentReport, suite: Suite) -> dict:
    cfg = report.config
    aggs = report.aggregates
    alphas = [r["alpha"] for r in aggs]
    tally: dict[str, int] = {}
    for rec in (report.nominal + [r for row in report.realized for r in row]
                + [c.record for c in report.cells] + report.robust):
        tally[rec.status] = tally.get(rec.status, 0) + 1

    per_alpha = []
    for k, a in enumerate(cfg.alpha_grid):
        covs = [report.cells[i * len(alphas) + k].coverage for i in range(cfg.num_nominal)]
        covs = [c for c in covs if not math.isnan(c)]
        per_alpha.append({"alpha": a, "mean": float(np.mean(covs)) if covs else None,
                          "min": min(covs) if covs else None, "max": max(covs) if covs else None})
    deviations = [abs(c.coverage - c.alpha) for c in report.cells if not math.isnan(c.coverage)]

    # optimal values must lower-bound every evaluation; heuristic misses are logged
    violations, improvements = 0, 0
    for c in report.cells:
        if c.emp_values is None:
            continue
        for j, rec in enumerate(report.realized[c.i]):
            if not rec.ok:
                continue
            gap = c.emp_values[j] - rec.value
            if rec.status == Status.GLOBAL_EXACT.value and gap < -1e-6:
                violations += 1
            elif rec.status == Status.HEURISTIC_BEST.value and gap < -1e-9:
                improvements += 1

    nom_eigs = [eig_extremes(Q) for Q in suite.nominals]
    excluded = [{"i": c.i, "alpha": c.alpha, "error": c.record.error} for c in report.cells if not c.record.ok]
    return {
        "crossover_alpha_nominal": crossover(alphas, [r["abs_err_nom_cce"] for r in aggs],
                                             [r["abs_err_nom_rob"] for r in aggs]),
        "crossover_alpha_empirical": crossover(alphas, [r["abs_err_emp_cce"] for r in aggs],
                                               [r["abs_err_emp_rob"] for r in aggs]),
        "coverage": {
            "per_alpha": per_alpha,
            "mean_abs_deviation": float(np.mean(deviations)) if deviations else None,
        },
        "convexity_threshold": [convexity_threshold(Q, cfg.beta) for Q in suite.nominals],
        "nominal_lambda_min": [e[0] for e in nom_eigs],
        "nominal_lambda_max": [e[1] for e in nom_eigs],
        "solver_status": dict(sorted(tally.items())),
        "excluded_cells": excluded,
        "dominance_violations": violations,
        "solver_improvement_events": improvements,
    }


def run_experiment(cfg: ExperimentConfig, threads: int = 1, figures: bool = False) -> ExperimentReport:
    suite = generate_suite(cfg)
    log.info("suite generated: %d nominal x %d realizations, n = %d",
             cfg.num_nominal, cfg.num_realizations, cfg.n)
    report = run_cce_sweep(cfg, suite, threads)
    report = run_robust_comparison(cfg, suite, report, threads)
    if cfg.output_dir:
        write_outputs(report, cfg.output_dir, figures=figures)
    return report


# ---------------------------------------------------------------- output

SWEEP_COLUMNS = ["i", "alpha", "t_cce", "coverage", "solver_status", "starts", "value_nom_at_xcce"]
AGGREGATE_COLUMNS = ["alpha", "l_nom", "l_emp", "l_nom_cce", "l_emp_cce", "l_nom_rob", "l_emp_rob",
                     "abs_err_nom_cce", "abs_err_emp_cce", "abs_err_nom_rob", "abs_err_emp_rob"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_outputs(report: ExperimentReport, out_dir, figures: bool = False) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "cce_sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for c in report.cells:
            w.writerow([c.i, _fmt(c.alpha), _fmt(c.t), _fmt(c.coverage), c.record.status,
                        c.record.starts, _fmt(c.value_nom)])
    with open(os.path.join(out_dir, "aggregates.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for row in report.aggregates:
            w.writerow([_fmt(row.get(k, math.nan)) for k in AGGREGATE_COLUMNS])
    cfg = report.config.to_dict()
    cfg.pop("output_dir", None)
    payload = {"config": cfg, **report.summary}
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if figures:
        write_figures(report, out_dir)


def write_figures(report: ExperimentReport, out_dir) -> list[str]:
    """SVG line charts of the four absolute-error curves."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "stqpcc"
    aggs = report.aggregates
    alphas = [r["alpha"] for r in aggs]
    specs = [
        ("fig1_abs_err_nom_cce.svg", "abs_err_nom_cce", None, "nominal"),
        ("fig2_abs_err_emp_cce.svg", "abs_err_emp_cce", None, "empirical"),
        ("fig3_abs_err_nom_cce_rob.svg", "abs_err_nom_cce", "abs_err_nom_rob", "nominal"),
        ("fig4_abs_err_emp_cce_rob.svg", "abs_err_emp_cce", "abs_err_emp_rob", "empirical"),
    ]
    paths = []
    for name, cce_key, rob_key, label in specs:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(alphas, [r[cce_key] for r in aggs], "-", label="chance-constrained")
        if rob_key:
            ax.plot(alphas, [r[rob_key] for r in aggs], "-.", label="robust (box)")
            ax.legend()
        ax.set_xlabel("alpha")
        ax.set_ylabel(f"absolute error ({label})")
        fig.tight_layout()
        path = os.path.join(out_dir, name)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def small_config(**overrides) -> ExperimentConfig:
    """Certified small variant: n = 10, 5 nominals, 30 realizations, all solves enumerated."""
    base = ExperimentConfig(n=10, num_nominal=5, num_realizations=30,
                            solver=SolverConfig(exact_max_n=10))
    return replace(base, **overrides)
