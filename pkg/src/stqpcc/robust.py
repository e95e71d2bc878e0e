"""Deterministic counterparts of robust StQPs.

Two uncertainty geometries reduce to a plain StQP:

* the symmetric Frobenius ball of radius ``rho`` shifts the nominal matrix by
  ``rho * I``;
* an entrywise box ``rho * (lower - nom) <= U <= rho * (upper - nom)`` is
  worst at its upper corner because ``x'Ux`` is entrywise nondecreasing in
  ``U`` for ``x >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import sym_matrix
from .sampling import SeededRng
from .solver import SolverConfig, StqpSolution, solve

_BOX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BoxUncertainty:
    Q_lower: np.ndarray
    Q_upper: np.ndarray
    Q_nom: np.ndarray
    rho: float

    def __post_init__(self):
        lo, up, nom = (sym_matrix(m, rtol=_BOX_TOL) for m in (self.Q_lower, self.Q_upper, self.Q_nom))
        if not (lo.shape == up.shape == nom.shape):
            raise ValueError("box bounds and nominal matrix differ in shape")
        if np.any(lo > nom + _BOX_TOL) or np.any(nom > up + _BOX_TOL):
            raise ValueError("nominal matrix must lie inside the box")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        object.__setattr__(self, "Q_lower", lo)
        object.__setattr__(self, "Q_upper", up)
        object.__setattr__(self, "Q_nom", nom)

    @property
    def U_lower(self) -> np.ndarray:
        return self.rho * (self.Q_lower - self.Q_nom)

    @property
    def U_upper(self) -> np.ndarray:
        return self.rho * (self.Q_upper - self.Q_nom)


def frobenius_counterpart(Q_nom, rho: float) -> np.ndarray:
    if rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    Q_nom = sym_matrix(Q_nom)
    return sym_matrix(Q_nom + rho * np.eye(Q_nom.shape[0]))


def box_from_realizations(realizations) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise min and max over a nonempty collection of matrices."""
    mats = [sym_matrix(m, rtol=_BOX_TOL) for m in realizations]
    if not mats:
        raise ValueError("need at least one realization")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise ValueError("realizations differ in shape")
    stack = np.stack(mats)
    return sym_matrix(stack.min(axis=0)), sym_matrix(stack.max(axis=0))


def box_counterpart(box: BoxUncertainty) -> np.ndarray:
    return sym_matrix((1.0 - box.rho) * box.Q_nom + box.rho * box.Q_upper)


def solve_robust(counterpart, cfg: SolverConfig = SolverConfig(), rng: SeededRng | None = None) -> StqpSolution:
    return solve(counterpart, cfg, rng)
