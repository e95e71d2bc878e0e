"""Dense symmetric matrices, simplex points and a few spectral helpers.

Matrices are plain read-only ``numpy`` arrays. ``sym_matrix`` and
``simplex_point`` validate and freeze their input; every other function in
the package accepts array-likes and routes them through these two.
"""
from __future__ import annotations

import enum
import os

import numpy as np

MAX_DIM = 512
SYMMETRY_RTOL = 1e-9
SIMPLEX_CLAMP = 1e-12
SIMPLEX_SUM_TOL = 1e-9


class Definiteness(str, enum.Enum):
    PSD = "PositiveSemiDefinite"
    NSD = "NegativeSemiDefinite"
    INDEFINITE = "Indefinite"


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def sym_matrix(a, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate a square symmetric matrix and return a frozen float copy.

    The upper triangle is authoritative: the result mirrors it into the
    lower triangle so the output is exactly symmetric.
    """
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside [1, {MAX_DIM}]")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > rtol * scale:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    upper = np.triu(a)
    return _freeze(upper + np.triu(a, 1).T)


def simplex_point(x) -> np.ndarray:
    """Validate a point of the standard simplex and return a frozen copy.

    Negative coordinates down to -1e-12 are clamped to zero and the result is
    renormalized; anything worse is rejected.
    """
    x = np.array(x, dtype=float).ravel()
    if x.size == 0 or x.size > MAX_DIM:
        raise ValueError(f"dimension {x.size} outside [1, {MAX_DIM}]")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    if np.any(x < -SIMPLEX_CLAMP):
        raise ValueError(f"negative coordinate {x.min():.3g} is not on the simplex")
    total = x.sum()
    if abs(total - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError(f"coordinates sum to {total!r}, not 1")
    x = np.maximum(x, 0.0)
    return _freeze(x / x.sum())


def barycenter(n: int) -> np.ndarray:
    return _freeze(np.full(n, 1.0 / n))


def vertex(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return _freeze(e)


def quadratic_form(Q, x) -> float:
    Q = np.asarray(Q, dtype=float)
    x = np.asarray(x, dtype=float)
    if Q.shape != (x.size, x.size):
        raise ValueError(f"dimension mismatch: Q is {Q.shape}, x has {x.size} entries")
    return float(x @ Q @ x)


def homogenize(A, c) -> np.ndarray:
    """Fold a linear term into the quadratic: ``x'Ax + 2c'x == x'Qx`` on the simplex."""
    A = sym_matrix(A)
    c = np.asarray(c, dtype=float).ravel()
    if c.size != A.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, c has {c.size} entries")
    return sym_matrix(A + c[:, None] + c[None, :])


def eigenvalues(Q) -> np.ndarray:
    """All eigenvalues in ascending order."""
    return np.linalg.eigvalsh(np.asarray(Q, dtype=float))


def eig_extremes(Q) -> tuple[float, float]:
    w = eigenvalues(Q)
    return float(w[0]), float(w[-1])


def frobenius_norm(Q) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(Q, dtype=float)))))


def classify_definiteness(Q, tol: float = 1e-9) -> Definiteness:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    lo, hi = eig_extremes(Q)
    if lo >= -tol:
        return Definiteness.PSD
    if hi <= tol:
        return Definiteness.NSD
    return Definiteness.INDEFINITE


def simplex_tangent_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the hyperplane ``{z : sum(z) == 0}``."""
    # Helmert contrasts, normalized
    P = np.zeros((n, n - 1))
    for k in range(1, n):
        P[:k, k - 1] = 1.0
        P[k, k - 1] = -k
        P[:, k - 1] /= np.sqrt(k * (k + 1))
    return P


def is_concave_on_simplex(Q, tol: float = 1e-9) -> bool:
    """True when the form is concave along the affine hull of the simplex."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if n == 1:
        return True
    P = simplex_tangent_basis(n)
    return eig_extremes(P.T @ Q @ P)[1] <= tol


def read_matrix(path) -> np.ndarray:
    """Read the plain-text matrix format: ``n`` on the first line, then n rows."""
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the integer dimension") from None
    if n < 1 or len(lines) != n + 1:
        raise ValueError(f"{path}: expected {n} rows after the header, got {len(lines) - 1}")
    try:
        rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if any(len(r) != n for r in rows):
        raise ValueError(f"{path}: every row must hold {n} values")
    return sym_matrix(rows)


def format_matrix(Q) -> str:
    Q = np.asarray(Q, dtype=float)
    out = [str(Q.shape[0])]
    out.extend(" ".join(f"{v:.17g}" for v in row) for row in Q)
    return "\n".join(out) + "\n"


def write_matrix(path, Q) -> None:
    with open(os.fspath(path), "w") as fh:
        fh.write(format_matrix(Q))


def read_vector(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(tok) for tok in fh.read().split()])
