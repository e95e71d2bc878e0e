"""Chance-constrained epigraphic StQPs under location/scale uncertainty.

A model is a triple ``(M, S, F)``: for every simplex point ``x`` the random
form ``x' Q x`` has cdf ``F((t - x'Mx) / x'Sx)``. The smallest ``t`` with
probability at least ``alpha`` is then ``x'Mx + F^{-1}(alpha) x'Sx``, which is
itself a quadratic form, so minimizing it is another StQP.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .linalg import eig_extremes, quadratic_form, read_matrix, simplex_point, sym_matrix
from .sampling import SeededRng, sample_goe, sample_wishart
from .solver import SolverConfig, StqpSolution, solve
from .special import GammaParams, gamma_cdf, gamma_quantile, std_normal_cdf, std_normal_quantile


@dataclass(frozen=True)
class StdNormal:
    def cdf(self, z: float) -> float:
        return std_normal_cdf(z)

    def quantile(self, alpha: float) -> float:
        return std_normal_quantile(alpha)


@dataclass(frozen=True)
class GammaShape:
    """Unit-scale gamma law; the scale lives in the model's ``S``."""

    shape: float

    def cdf(self, z: float) -> float:
        return gamma_cdf(GammaParams(self.shape), z)

    def quantile(self, alpha: float) -> float:
        return gamma_quantile(GammaParams(self.shape), alpha)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class LocationScaleModel:
    M: np.ndarray
    S: np.ndarray
    F: StdNormal | GammaShape
    sampler: object = None

    def __post_init__(self):
        M = sym_matrix(self.M)
        S = sym_matrix(self.S)
        if M.shape != S.shape:
            raise ValueError("location and scale matrices differ in shape")
        # sufficient for x'Sx > 0 on the simplex; exact copositivity is NP-hard
        if not (eig_extremes(S)[0] > 0 or np.all(S > 0)):
            raise ValueError("scale matrix is neither positive definite nor entrywise positive")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "S", S)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def location(self, x) -> float:
        return quadratic_form(self.M, x)

    def scale(self, x) -> float:
        return quadratic_form(self.S, x)

    def cdf(self, x, t: float) -> float:
        """P[x'Qx <= t] under the model."""
        return self.F.cdf((t - self.location(x)) / self.scale(x))

    def sample(self, rng: SeededRng, size: int | None = None):
        if self.sampler is None:
            raise ValueError("model has no sampler attached")
        return self.sampler(rng, size)


def goe_model(Q_nom, beta: float) -> LocationScaleModel:
    """Nominal matrix plus ``beta`` times a GOE matrix."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    Q_nom = sym_matrix(Q_nom)
    n = Q_nom.shape[0]

    def sampler(rng, size=None):
        return Q_nom + beta * sample_goe(n, rng, size)

    return LocationScaleModel(Q_nom, math.sqrt(2.0) * beta * np.eye(n), StdNormal(), sampler)


def wishart_model(Sigma, p: int, eta: float) -> LocationScaleModel:
    """Wishart matrix with ``p`` degrees of freedom, shifted down by ``eta * I``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if p < 1:
        raise ValueError(f"degrees of freedom must be at least 1, got {p}")
    Sigma = sym_matrix(Sigma)
    if eig_extremes(Sigma)[0] <= 1e-10:
        raise ValueError("Sigma must be positive definite")
    n = Sigma.shape[0]

    def sampler(rng, size=None):
        return sample_wishart(Sigma, p, rng, size) - eta * np.eye(n)

    return LocationScaleModel(-eta * np.eye(n), 2.0 * Sigma, GammaShape(p / 2.0), sampler)


def deterministic_equivalent(model: LocationScaleModel, alpha: float) -> np.ndarray:
    alpha = _check_alpha(alpha)
    return sym_matrix(model.M + model.F.quantile(alpha) * model.S)


def value_at_risk(model: LocationScaleModel, x, alpha: float) -> float:
    alpha = _check_alpha(alpha)
    x = simplex_point(x)
    return model.location(x) + model.F.quantile(alpha) * model.scale(x)


def solve_cce(model: LocationScaleModel, alpha: float, cfg: SolverConfig = SolverConfig(),
              rng: SeededRng | None = None) -> tuple[StqpSolution, float]:
    """Minimal value-at-risk point and its level ``t``."""
    sol = solve(deterministic_equivalent(model, alpha), cfg, rng)
    return sol, sol.value


def cce_matrix(Q_nom, beta: float, alpha: float) -> np.ndarray:
    """``Q_nom + sqrt(2) beta Phi^{-1}(alpha) I``, the GOE deterministic equivalent."""
    return deterministic_equivalent(goe_model(Q_nom, beta), alpha)


def convexity_threshold(Q_nom, beta: float) -> float:
    """Smallest alpha from which the GOE equivalent is positive semidefinite."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    lam_min, _ = eig_extremes(Q_nom)
    if lam_min >= 0:
        return 0.5
    return std_normal_cdf(abs(lam_min) / (math.sqrt(2.0) * beta))


def load_model(path) -> LocationScaleModel:
    """Build a model from its JSON description.

    ``{"type": "goe", "q_nom": FILE, "beta": B}`` or
    ``{"type": "wishart", "sigma": FILE, "p": P, "eta": E}``; matrix paths are
    resolved relative to the JSON file.
    """
    path = os.fspath(path)
    with open(path) as fh:
        desc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))

    def matrix(key):
        if key not in desc:
            raise ValueError(f"{path}: missing '{key}'")
        return read_matrix(os.path.join(base, desc[key]))

    kind = desc.get("type")
    if kind == "goe":
        if "beta" not in desc:
            raise ValueError(f"{path}: missing 'beta'")
        return goe_model(matrix("q_nom"), float(desc["beta"]))
    if kind == "wishart":
        for key in ("p", "eta"):
            if key not in desc:
                raise ValueError(f"{path}: missing '{key}'")
        p = desc["p"]
        if int(p) != p:
            raise ValueError(f"{path}: 'p' must be an integer")
        return wishart_model(matrix("sigma"), int(p), float(desc["eta"]))
    raise ValueError(f"{path}: unknown model type {kind!r}")
