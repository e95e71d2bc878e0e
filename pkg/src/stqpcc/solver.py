"""Minimization of a quadratic form over the standard simplex.

Three routes, picked by :func:`solve`:

* forms concave along the simplex attain their minimum at a vertex, so the
  smallest diagonal entry is the answer;
* up to ``exact_max_n`` coordinates every support set is enumerated and its
  KKT system solved, which certifies the global minimum;
* above that, discrete replicator dynamics are run from many interior starts
  and the best end point (after a KKT polish on its support) is returned.
"""
from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import is_concave_on_simplex, simplex_point, simplex_tangent_basis, sym_matrix
from .sampling import SeededRng


class Status(str, enum.Enum):
    GLOBAL_EXACT = "GlobalExact"
    HEURISTIC_BEST = "HeuristicBest"
    CLOSED_FORM_CONCAVE = "ClosedFormConcave"
    CLOSED_FORM_CONVEX_STATIONARY = "ClosedFormConvexStationary"


class SolverError(RuntimeError):
    pass


# 2^22 supports is the most enumeration will ever attempt, whatever the config says
ENUMERATION_HARD_CAP = 22


@dataclass(frozen=True)
class SolverConfig:
    support_tol: float = 1e-8
    rd_tol: float = 1e-12
    rd_max_iter: int = 200_000
    num_starts: int | None = None  # None means 3n + 50
    exact_max_n: int = 16
    time_limit: float = 60.0

    def __post_init__(self):
        for name in ("support_tol", "rd_tol", "rd_max_iter", "exact_max_n", "time_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.num_starts is not None and self.num_starts < 1:
            raise ValueError("num_starts must be positive")

    def starts_for(self, n: int) -> int:
        return self.num_starts if self.num_starts is not None else 3 * n + 50


@dataclass(frozen=True)
class StqpSolution:
    x: np.ndarray
    value: float
    status: Status
    support: tuple[int, ...]
    iterations: int = 0
    starts: int = 0
    iteration_cap_hit: bool = False
    trajectory: tuple[float, ...] = field(default=(), repr=False, compare=False)


def _support(x: np.ndarray, tol: float) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(x > tol))


def _evaluate(Q: np.ndarray, x: np.ndarray) -> float:
    return float(x @ Q @ x)


def solve_concave(Q) -> StqpSolution:
    """Best vertex. Exact when the form is concave on the simplex, an upper bound otherwise."""
    Q = sym_matrix(Q)
    n = Q.shape[0]
    i = int(np.argmin(np.diag(Q)))  # argmin returns the first index on ties
    x = np.zeros(n)
    x[i] = 1.0
    return StqpSolution(simplex_point(x), float(Q[i, i]), Status.CLOSED_FORM_CONCAVE, (i,))


def payoff_matrix(Q: np.ndarray) -> np.ndarray:
    """Entrywise positive matrix whose maximization over the simplex minimizes ``Q``."""
    gamma = float(np.max(Q)) + 1.0
    return gamma - Q


def _replicator_batch(Qp, X, tol, max_iter, deadline=None, snap=None, snap_every=100, snap_max_gap=400):
    """Iterate ``x <- x * (Qp x) / (x' Qp x)`` on every row of ``X`` until each row settles.

    ``snap`` optionally maps a row to a certified limit point (or None); rows
    it accepts are finished early. Snaps are tried at iteration ``snap_every``
    and then at doubling intervals capped at ``snap_max_gap``.
    """
    X = np.array(X, dtype=float)
    K = X.shape[0]
    iters = np.zeros(K, dtype=np.int64)
    done = np.zeros(K, dtype=bool)
    active = np.arange(K)
    Xa = X
    it = 0
    next_snap = snap_every
    while active.size and it < max_iter:
        Y = Xa @ Qp
        f = np.einsum("ij,ij->i", Xa, Y)
        Xn = Xa * Y / f[:, None]
        step = np.max(np.abs(Xn - Xa), axis=1)
        Xa = Xn
        it += 1
        settled = step < tol
        if snap is not None and it == next_snap:
            next_snap += min(it, snap_max_gap)
            for r in np.flatnonzero(~settled):
                y = snap(Xa[r])
                if y is not None:
                    Xa[r] = y
                    settled[r] = True
        if settled.any():
            idx = active[settled]
            X[idx] = Xa[settled]
            iters[idx] = it
            done[idx] = True
            keep = ~settled
            active = active[keep]
            Xa = Xa[keep]
        if deadline is not None and it % 256 == 0 and time.monotonic() > deadline:
            break
    if active.size:
        X[active] = Xa
        iters[active] = it
    X = np.maximum(X, 0.0)
    X /= X.sum(axis=1, keepdims=True)
    return X, iters, done


class _FaceSnapper:
    """Finish a replicator trajectory early once it has found its face.

    For a point ``x`` a few candidate faces are guessed: the coordinates that
    are not yet negligible, narrowed by how far each coordinate's fitness is
    from the average. A face is accepted only if its KKT point is feasible,
    every coordinate off the face has a nonnegative multiplier, and the form
    is positive definite along the face (a strict local minimizer). The
    certificate depends on the face alone, so it is cached.
    """

    GAP_TOLS = (1e-6, 1e-4, 1e-2)

    def __init__(self, Q, rel_tol=1e-6, kkt_tol=1e-12):
        self.Q = Q
        self.rel_tol = rel_tol
        self.kkt_tol = kkt_tol
        self.scale = max(1.0, float(np.max(np.abs(Q))))
        self.cache: dict[tuple[int, ...], np.ndarray | None] = {}
        self._walks: dict[tuple[int, ...], tuple[tuple[int, ...], ...]] = {}

    def certify(self, support):
        if support in self.cache:
            return self.cache[support]
        Q = self.Q
        y = _kkt_point(Q, support)
        if y is not None and np.any(y[list(support)] <= 0):
            y = None
        if y is not None:
            g = Q @ y
            v = float(y @ g)
            if np.any(g < v - self.kkt_tol * self.scale):
                y = None
        if y is not None and len(support) > 1:
            idx = np.array(support)
            P = simplex_tangent_basis(len(support))
            if np.linalg.eigvalsh(P.T @ Q[np.ix_(idx, idx)] @ P)[0] <= 1e-10:
                y = None
        self.cache[support] = y
        return y

    def _kkt_raw(self, support):
        """Unclamped KKT solution on a face (may have negative entries)."""
        s = len(support)
        idx = np.array(support)
        A = np.zeros((s + 1, s + 1))
        A[:s, :s] = 2.0 * self.Q[np.ix_(idx, idx)]
        A[:s, s] = 1.0
        A[s, :s] = 1.0
        rhs = np.zeros(s + 1)
        rhs[s] = 1.0
        try:
            return np.linalg.solve(A, rhs)[:s]
        except np.linalg.LinAlgError:
            return None

    def _candidates(self, x, alive, g, v):
        for tol in (None,) + self.GAP_TOLS:
            mask = alive if tol is None else alive & (g - v < tol * self.scale)
            yield tuple(int(i) for i in np.flatnonzero(mask))
        yield from self._walk(tuple(int(i) for i in np.flatnonzero(alive)))

    def _walk(self, start):
        """Active-set walk from a face: drop the most negative KKT coordinate,
        or add the most violated off-face coordinate. Memoized per start."""
        if start in self._walks:
            return self._walks[start]
        found = []
        support = set(start)
        seen = set()
        for _ in range(2 * self.Q.shape[0]):
            key = tuple(sorted(support))
            if not key or key in seen:
                break
            seen.add(key)
            ys = self._kkt_raw(key)
            if ys is None:
                break
            if ys.min() <= 0:
                if len(key) == 1:
                    break
                support.discard(key[int(np.argmin(ys))])
                continue
            found.append(key)
            y = np.zeros(self.Q.shape[0])
            y[list(key)] = ys
            gap = self.Q @ y - float(y @ self.Q @ y)
            gap[list(key)] = np.inf
            k = int(np.argmin(gap))
            if gap[k] >= -self.kkt_tol * self.scale:
                break
            support.add(k)
        self._walks[start] = tuple(found)
        return self._walks[start]

    def __call__(self, x):
        alive = x > self.rel_tol * x.max()
        g = self.Q @ x
        v = float(x @ g)
        tried = set()
        for support in self._candidates(x, alive, g, v):
            if not support or support in tried:
                continue
            tried.add(support)
            y = self.certify(support)
            if y is not None and float(y @ self.Q @ y) <= v + 1e-12:
                return y
        return None


def replicator_local(Q, x0, cfg: SolverConfig = SolverConfig(), record: bool = False) -> StqpSolution:
    """Local minimization by discrete replicator dynamics from an interior start.

    With ``record=True`` the objective value after every iteration is kept in
    ``trajectory`` (the values never increase).
    """
    Q = sym_matrix(Q)
    x = np.array(simplex_point(x0))
    if x.size != Q.shape[0]:
        raise ValueError("dimension mismatch between Q and x0")
    if np.any(x <= 0):
        raise ValueError("replicator dynamics need a strictly positive start")
    Qp = payoff_matrix(Q)
    if not record:
        X, iters, done = _replicator_batch(Qp, x[None, :], cfg.rd_tol, cfg.rd_max_iter,
                                           time.monotonic() + cfg.time_limit)
        x, n_iter, converged = X[0], int(iters[0]), bool(done[0])
        traj = ()
    else:
        values = [_evaluate(Q, x)]
        n_iter, converged = 0, False
        while n_iter < cfg.rd_max_iter:
            y = Qp @ x
            xn = x * y / (x @ y)
            n_iter += 1
            step = np.max(np.abs(xn - x))
            x = xn
            values.append(_evaluate(Q, x))
            if step < cfg.rd_tol:
                converged = True
                break
        x = np.maximum(x, 0.0)
        x /= x.sum()
        traj = tuple(values)
    x = simplex_point(x)
    return StqpSolution(x, _evaluate(Q, x), Status.HEURISTIC_BEST, _support(x, cfg.support_tol),
                        iterations=n_iter, starts=1, iteration_cap_hit=not converged,
                        trajectory=traj)


def _kkt_point(Q: np.ndarray, support: tuple[int, ...]) -> np.ndarray | None:
    """Stationary point of the form restricted to a face, or None if singular/infeasible."""
    n = Q.shape[0]
    s = len(support)
    idx = np.array(support)
    A = np.zeros((s + 1, s + 1))
    A[:s, :s] = 2.0 * Q[np.ix_(idx, idx)]
    A[:s, s] = 1.0
    A[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        return None
    xs = sol[:s]
    if not np.all(np.isfinite(xs)) or np.any(xs < -1e-10):
        return None
    x = np.zeros(n)
    x[idx] = np.maximum(xs, 0.0)
    total = x.sum()
    if total <= 0:
        return None
    return x / total


def _polish(Q, x, support_tol):
    support = _support(x, support_tol)
    if not support:
        return x
    y = _kkt_point(Q, support)
    if y is not None and _evaluate(Q, y) < _evaluate(Q, x):
        return y
    return x


def _starting_points(n: int, num_starts: int, rng: SeededRng) -> np.ndarray:
    bary = np.full(n, 1.0 / n)
    starts = [0.9 * bary + 0.1 * rng.dirichlet(n)]
    for i in range(n):
        v = 0.05 * bary
        v[i] += 0.95
        starts.append(v)
    extra = num_starts - len(starts)
    if extra > 0:
        starts.extend(rng.dirichlet(n, extra))
    X = np.array(starts[:max(num_starts, 1)])
    return X / X.sum(axis=1, keepdims=True)


def solve_multistart(Q, cfg: SolverConfig = SolverConfig(), rng: SeededRng | None = None) -> StqpSolution:
    Q = sym_matrix(Q)
    n = Q.shape[0]
    rng = rng if rng is not None else SeededRng(0, 0)
    X0 = _starting_points(n, cfg.starts_for(n), rng)
    X, iters, done = _replicator_batch(payoff_matrix(Q), X0, cfg.rd_tol, cfg.rd_max_iter,
                                       time.monotonic() + cfg.time_limit,
                                       snap=_FaceSnapper(Q), snap_every=25)
    best_x, best_val = None, np.inf
    for k in range(X.shape[0]):
        x = _polish(Q, X[k], cfg.support_tol)
        val = _evaluate(Q, x)
        if val < best_val:
            best_x, best_val = x, val
    vert = solve_concave(Q)
    if vert.value < best_val:
        best_x, best_val = np.array(vert.x), vert.value
    x = simplex_point(best_x)
    return StqpSolution(x, _evaluate(Q, x), Status.HEURISTIC_BEST, _support(x, cfg.support_tol),
                        iterations=int(iters.sum()), starts=int(X.shape[0]),
                        iteration_cap_hit=not bool(done.all()))


def solve_exact_enumeration(Q, cfg: SolverConfig = SolverConfig()) -> StqpSolution:
    """Global minimum by solving the KKT system on every nonempty support."""
    Q = sym_matrix(Q)
    n = Q.shape[0]
    cap = min(cfg.exact_max_n, ENUMERATION_HARD_CAP)
    if n > cap:
        raise SolverError(f"enumeration is capped at n = {cap}, got n = {n}")
    diag = np.diag(Q)
    best_i = int(np.argmin(diag))
    best_x = np.zeros(n)
    best_x[best_i] = 1.0
    best_val = float(diag[best_i])
    checked = n
    for s in range(2, n + 1):
        combos = np.array(list(itertools.combinations(range(n), s)))
        m = combos.shape[0]
        A = np.zeros((m, s + 1, s + 1))
        A[:, :s, :s] = 2.0 * Q[combos[:, :, None], combos[:, None, :]]
        A[:, :s, s] = 1.0
        A[:, s, :s] = 1.0
        rhs = np.zeros((m, s + 1))
        rhs[:, s] = 1.0
        try:
            sols = np.linalg.solve(A, rhs[..., None])[..., 0]
            ok = np.all(np.isfinite(sols), axis=1)
        except np.linalg.LinAlgError:
            sols = np.full((m, s + 1), np.nan)
            ok = np.zeros(m, dtype=bool)
            for r in range(m):
                try:
                    sols[r] = np.linalg.solve(A[r], rhs[r])
                    ok[r] = np.all(np.isfinite(sols[r]))
                except np.linalg.LinAlgError:
                    pass
        checked += m
        xs = sols[:, :s]
        ok &= np.all(xs >= -1e-10, axis=1)
        if not ok.any():
            continue
        xs = np.maximum(xs[ok], 0.0)
        totals = xs.sum(axis=1)
        good = totals > 0
        xs = xs[good] / totals[good, None]
        sub = combos[ok][good]
        if xs.shape[0] == 0:
            continue
        Qs = Q[sub[:, :, None], sub[:, None, :]]
        vals = np.einsum("ki,kij,kj->k", xs, Qs, xs)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_x = np.zeros(n)
            best_x[sub[k]] = xs[k]
    x = simplex_point(best_x)
    return StqpSolution(x, _evaluate(Q, x), Status.GLOBAL_EXACT, _support(x, cfg.support_tol),
                        starts=checked)


def solve(Q, cfg: SolverConfig = SolverConfig(), rng: SeededRng | None = None) -> StqpSolution:
    """Dispatch to the closed form, exact enumeration, or multistart heuristic."""
    Q = sym_matrix(Q)
    if is_concave_on_simplex(Q):
        return solve_concave(Q)
    if Q.shape[0] <= cfg.exact_max_n:
        return solve_exact_enumeration(Q, cfg)
    return solve_multistart(Q, cfg, rng)
