"""Seeded random streams and the random-matrix ensembles.

Every stream is a Philox counter-based generator keyed by the pair
``(master_seed, stream_id)``, so a work item can rebuild its own stream from
two integers regardless of which process or thread runs it. Normals come
from numpy's ziggurat sampler, which is a fixed transform of the Philox
output and therefore bit-reproducible.
"""
from __future__ import annotations

import numpy as np

from .linalg import sym_matrix

_U64 = (1 << 64) - 1


def stream_id(instance: int, item: int) -> int:
    """Stream id for item ``item`` of instance ``instance``."""
    return (int(instance) << 32) | int(item)


class SeededRng:
    """One independent random stream. Not meant to be shared between tasks."""

    def __init__(self, master_seed: int = 0, stream: int = 0):
        if not (0 <= master_seed <= _U64 and 0 <= stream <= _U64):
            raise ValueError("seed and stream id must be unsigned 64-bit integers")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream)
        key = (self.stream_id << 64) | self.master_seed
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"SeededRng(master_seed={self.master_seed}, stream={self.stream_id})"

    def spawn(self, stream: int) -> "SeededRng":
        return SeededRng(self.master_seed, stream)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def dirichlet(self, n: int, size=None):
        # flat Dirichlet via normalized exponentials
        shape = (n,) if size is None else (size, n)
        g = self.generator.standard_exponential(shape)
        return g / g.sum(axis=-1, keepdims=True)


def sample_std_normal(rng: SeededRng) -> float:
    return float(rng.standard_normal())


def _mirror_upper(u: np.ndarray) -> np.ndarray:
    upper = np.triu(u)
    return upper + np.swapaxes(np.triu(u, 1), -1, -2)


def sample_goe(n: int, rng: SeededRng, size: int | None = None) -> np.ndarray:
    """GOE matrix: N(0, 2) diagonal, N(0, 1) above the diagonal, mirrored.

    With ``size`` a stack of independent matrices is returned (not frozen).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    shape = (n, n) if size is None else (size, n, n)
    g = _mirror_upper(rng.standard_normal(shape))
    idx = np.arange(n)
    g[..., idx, idx] *= np.sqrt(2.0)
    if size is None:
        return sym_matrix(g)
    return g


def cholesky_lower(Sigma, min_pivot: float = 1e-12) -> np.ndarray:
    """Lower Cholesky factor; raises if any squared pivot is below ``min_pivot``."""
    Sigma = np.asarray(Sigma, dtype=float)
    try:
        L = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        raise ValueError("Sigma is not positive definite") from None
    if np.min(np.diag(L)) ** 2 < min_pivot:
        raise ValueError("Sigma is numerically singular")
    return L


def sample_wishart(Sigma, p: int, rng: SeededRng, size: int | None = None) -> np.ndarray:
    """Gram matrix ``Y Y'`` of ``p`` i.i.d. N(0, Sigma) columns."""
    Sigma = sym_matrix(Sigma)
    if p < 1:
        raise ValueError("degrees of freedom must be at least 1")
    lam_min = np.linalg.eigvalsh(Sigma)[0]
    if lam_min <= 1e-10:
        raise ValueError(f"Sigma is not positive definite (lambda_min = {lam_min:.3g})")
    L = cholesky_lower(Sigma)
    n = Sigma.shape[0]
    shape = (n, p) if size is None else (size, n, p)
    Y = L @ rng.standard_normal(shape)
    W = Y @ np.swapaxes(Y, -1, -2)
    W = 0.5 * (W + np.swapaxes(W, -1, -2))
    if size is None:
        return sym_matrix(W)
    return W


def sample_uniform_symmetric(n: int, rng: SeededRng) -> np.ndarray:
    """Upper triangle i.i.d. Uniform[0, 1], mirrored."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return sym_matrix(_mirror_upper(rng.uniform((n, n))))
