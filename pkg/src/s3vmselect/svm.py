"""Soft-margin kernel SVM trained on the labeled instances only."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import KernelSpec, as_matrix, gram, kernel_matrix

KKT_TOL = 1e-3
MAX_PAIR_UPDATES = 10_000_000
SUPPORT_EPS = 1e-12


@dataclass
class SvmModel:
    """Trained dual SVM: coefficients, bias and the data they refer to."""

    alphas: np.ndarray
    bias: float
    kernel: KernelSpec
    X: np.ndarray
    y: np.ndarray
    C: float
    support: np.ndarray = field(repr=False)  # indices with alpha > 0

    @property
    def support_X(self) -> np.ndarray:
        return self.X[self.support]

    @property
    def support_y(self) -> np.ndarray:
        return self.y[self.support]


def _validate_labels(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be a 1-D vector")
    if y.size == 0:
        raise ValueError("empty training set")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 or -1")
    return y.astype(float)


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: np.ndarray,
    alpha0: np.ndarray | None = None,
    tol: float = KKT_TOL,
    max_updates: int = MAX_PAIR_UPDATES,
) -> tuple[np.ndarray, float]:
    """Maximize the soft-margin dual by pairwise coordinate ascent.

    Minimizes 0.5 a'Qa - sum(a) with Q = (y y') * K subject to y'a = 0 and
    0 <= a_i <= C_i (per-instance upper bounds, needed by the transductive
    trainer).  The working pair is always the maximal violating pair; the
    loop stops once the violation drops below `tol`.  Fully deterministic.

    Returns (alpha, bias).
    """
    n = K.shape[0]
    yf = np.asarray(y, dtype=float)
    C = np.asarray(C, dtype=float)
    if alpha0 is None:
        alpha = np.zeros(n)
        G = -np.ones(n)
    else:
        alpha = np.clip(np.asarray(alpha0, dtype=float), 0.0, C)
        G = yf * (K @ (alpha * yf)) - 1.0

    for _ in range(max_updates):
        neg_yG = -yf * G
        up = ((yf > 0) & (alpha < C)) | ((yf < 0) & (alpha > 0))
        low = ((yf > 0) & (alpha > 0)) | ((yf < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmax(neg_yG[up_idx])]
        j = low_idx[np.argmin(neg_yG[low_idx])]
        violation = neg_yG[i] - neg_yG[j]
        if violation < tol:
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        t = violation / quad
        t = min(t, C[i] - alpha[i] if yf[i] > 0 else alpha[i])
        t = min(t, alpha[j] if yf[j] > 0 else C[j] - alpha[j])
        alpha[i] = min(max(alpha[i] + yf[i] * t, 0.0), C[i])
        alpha[j] = min(max(alpha[j] - yf[j] * t, 0.0), C[j])
        G += yf * t * (K[:, i] - K[:, j])

    neg_yG = -yf * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(neg_yG[free].mean())
    else:
        # All coefficients at a bound: take the midpoint of the KKT bracket.
        up = ((yf > 0) & (alpha < C)) | ((yf < 0) & (alpha > 0))
        low = ((yf > 0) & (alpha > 0)) | ((yf < 0) & (alpha < C))
        lo = neg_yG[up].max() if up.any() else neg_yG[low].min()
        hi = neg_yG[low].min() if low.any() else neg_yG[up].max()
        bias = float(0.5 * (lo + hi))
    return alpha, bias


def train_svc(X: np.ndarray, y: np.ndarray, kernel: KernelSpec, C: float) -> SvmModel:
    """Train a binary SVM on labeled data.

    Parameters
    ----------
    X : (n, d) feature rows
    y : length-n vector of +1/-1 labels, both classes required
    kernel : kernel specification
    C : soft-margin penalty, > 0
    """
    X = as_matrix(X)
    y = _validate_labels(y)
    if X.shape[0] != y.size:
        raise ValueError("X and y disagree on the number of instances")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("degenerate labels: need at least one instance per class")
    if not C > 0:
        raise ValueError("C must be positive")

    K = gram(X, kernel)
    alpha, bias = smo_solve(K, y, np.full(y.size, float(C)))
    support = np.flatnonzero(alpha > SUPPORT_EPS)
    if support.size == 0:
        raise ArithmeticError("training produced no support vectors")
    return SvmModel(alpha, bias, kernel, X, y, float(C), support)


def decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """f(x) = sum_i alpha_i y_i k(x_i, x) + b for each row of X."""
    X = as_matrix(X)
    if X.shape[1] != model.X.shape[1]:
        raise ValueError(
            f"feature dimension mismatch: model has {model.X.shape[1]}, got {X.shape[1]}"
        )
    sv = model.support
    coef = model.alphas[sv] * model.y[sv]
    return kernel_matrix(X, model.X[sv], model.kernel) @ coef + model.bias


def predict_labels(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Signs of the decision values; the toolkit-wide convention is sign(0) = +1."""
    return np.where(decision_values(model, X) >= 0.0, 1, -1)


def weight_norm_sq(model: SvmModel) -> float:
    """Squared RKHS norm of the decision function, sans bias."""
    sv = model.support
    coef = model.alphas[sv] * model.y[sv]
    return float(coef @ gram(model.X[sv], model.kernel) @ coef)


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Value of the maximized dual: sum(a) - 0.5 a'Qa."""
    v = alpha * np.asarray(y, dtype=float)
    return float(alpha.sum() - 0.5 * (v @ K @ v))
