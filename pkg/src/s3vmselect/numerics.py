"""Dense kernel evaluations and an SPD linear solver shared by all modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


class NotPositiveDefiniteError(ArithmeticError):
    """Symmetric factorization hit a non-positive pivot."""

    def __init__(self, pivot: int):
        super().__init__(f"matrix is not positive definite (failing pivot {pivot})")
        self.pivot = pivot


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, plus the bandwidth for the gaussian case."""

    kind: str
    width: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian"):
            raise ValueError(f"unknown kernel kind: {self.kind!r}")
        if self.kind == "gaussian":
            if self.width is None or not (float(self.width) > 0.0):
                raise ValueError("gaussian kernel requires width > 0")
        elif self.width is not None:
            raise ValueError("linear kernel takes no width")


def as_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def squared_distances(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """All pairwise squared Euclidean distances between rows of X and Y.

    Uses explicit coordinate differences rather than the Gram-expansion
    shortcut: the diagonal of squared_distances(X) is exactly zero and the
    result is exactly symmetric, which the kernel code relies on.
    """
    X = as_matrix(X)
    Y = X if Y is None else as_matrix(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kernel_matrix(X: np.ndarray, Y: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Kernel evaluations K[i, j] = k(X[i], Y[j])."""
    X = as_matrix(X)
    Y = as_matrix(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if kernel.kind == "linear":
        return X @ Y.T
    return np.exp(-squared_distances(X, Y) / (2.0 * kernel.width**2))


def gram(X: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """n x n kernel matrix of a sample against itself."""
    X = as_matrix(X)
    if X.shape[0] < 1:
        raise ValueError("gram needs at least one instance")
    return kernel_matrix(X, X, kernel)


def average_pairwise_distance(X: np.ndarray) -> float:
    """Mean Euclidean distance over all unordered instance pairs."""
    X = as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("average pairwise distance needs at least 2 instances")
    d = np.sqrt(squared_distances(X))
    mean = float(d[np.triu_indices(n, 1)].mean())
    if mean == 0.0:
        raise ValueError("all instances identical: average distance is zero")
    return mean


def _cholesky_lower(A: np.ndarray) -> np.ndarray:
    # Column-by-column factorization so the failing pivot is known exactly.
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if not (d > 0.0) or not math.isfinite(d):
            raise NotPositiveDefiniteError(j)
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_spd(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for symmetric positive-definite A.

    If the first factorization fails, a single jitter of 1e-10 * trace/n is
    added to the diagonal before giving up: graph Laplacian blocks can be
    positive definite only up to rounding.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"A must be square, got {A.shape}")
    B_in = np.asarray(B, dtype=float)
    B2 = B_in.reshape(-1, 1) if B_in.ndim == 1 else B_in
    if B2.ndim != 2 or B2.shape[0] != n:
        raise ValueError(f"B has incompatible shape {B_in.shape} for A {A.shape}")
    if not np.all(np.isfinite(B2)):
        raise ValueError("B contains non-finite entries")
    asym = float(np.abs(A - A.T).max()) if n else 0.0
    if asym > 1e-10 * max(1.0, float(np.abs(A).max())):
        raise ValueError(f"A is not symmetric (max asymmetry {asym:.3e})")
    try:
        L = _cholesky_lower(A)
    except NotPositiveDefiniteError:
        jitter = 1e-10 * float(np.trace(A)) / n
        L = _cholesky_lower(A + jitter * np.eye(n))
    Y = solve_triangular(L, B2, lower=True)
    X = solve_triangular(L.T, Y, lower=False)
    return X.reshape(B_in.shape)
