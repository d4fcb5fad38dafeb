"""Transductive SVM via label-switching annealing.

Unlabeled instances get tentative labels from the supervised model, then a
growing penalty C_u pulls the boundary toward a labeling with low combined
hinge loss.  At each penalty stage the pair of opposite-labeled unlabeled
instances whose swap promises the largest objective drop is swapped and the
machine retrained; a swap is kept only if the retrained objective actually
decreased, so the per-stage objective trace is non-increasing by
construction.  The positive/negative balance of the unlabeled labeling is
fixed up front and preserved by every swap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .numerics import KernelSpec, gram
from .svm import SUPPORT_EPS, SvmModel, decision_values, smo_solve, train_svc, weight_norm_sq

INITIAL_CU_FACTOR = 1e-5
MAX_SWAPS_PER_STAGE = 10_000


@dataclass
class TsvmResult:
    model: SvmModel
    unlabeled_labels: np.ndarray
    objective_trace: list[tuple[float, float]]  # (C_u, objective) pairs


def _hinges(f: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - y * f)


def tsvm_objective(
    model: SvmModel, dataset: Dataset, labels_u: np.ndarray, C: float, C_u: float
) -> float:
    """Combined primal objective 0.5|w|^2 + C * labeled hinge + C_u * unlabeled hinge."""
    labels_u = np.asarray(labels_u, dtype=float)
    if labels_u.shape != (dataset.u,):
        raise ValueError(f"labels_u must have length {dataset.u}")
    obj = 0.5 * weight_norm_sq(model)
    obj += C * float(_hinges(decision_values(model, dataset.X_labeled), dataset.y_labeled.astype(float)).sum())
    if dataset.u:
        obj += C_u * float(_hinges(decision_values(model, dataset.X_unlabeled), labels_u).sum())
    return obj


def _objective_from_state(K, alpha, bias, y_all, C_vec) -> float:
    coef = alpha * y_all
    f = K @ coef + bias
    return float(0.5 * (coef @ K @ coef) + (C_vec * _hinges(f, y_all)).sum())


def _resolve_target_positives(pos_fraction, y_labeled: np.ndarray, u: int) -> int:
    if pos_fraction == "auto":
        frac = float((y_labeled > 0).mean())
        frac = min(max(frac, 1.0 / u), 1.0 - 1.0 / u)
    else:
        frac = float(pos_fraction)
        if not 0.0 < frac < 1.0:
            raise ValueError("pos_fraction must lie in (0, 1) or be 'auto'")
    return int(math.floor(frac * u + 0.5))


def train_tsvm(
    dataset: Dataset,
    kernel: KernelSpec,
    C: float,
    pos_fraction: float | str = "auto",
) -> TsvmResult:
    """Train on labeled plus unlabeled data; returns labels for the unlabeled.

    pos_fraction fixes the fraction of unlabeled instances labeled positive
    ('auto' copies the labeled positive proportion, clamped away from 0/1).
    """
    supervised = train_svc(dataset.X_labeled, dataset.y_labeled, kernel, C)
    u = dataset.u
    if u == 0:
        return TsvmResult(supervised, np.zeros(0, dtype=int), [])

    X_all = np.vstack([dataset.X_labeled, dataset.X_unlabeled])
    y_l = dataset.y_labeled.astype(float)
    l = y_l.size
    target_pos = _resolve_target_positives(pos_fraction, dataset.y_labeled, u)

    # Initial unlabeled labeling: the target_pos highest decision values.
    f_u = decision_values(supervised, dataset.X_unlabeled)
    order = np.argsort(-f_u, kind="stable")
    y_u = -np.ones(u)
    y_u[order[:target_pos]] = 1.0

    K = gram(X_all, kernel)
    alpha = np.concatenate([supervised.alphas, np.zeros(u)])
    trace: list[tuple[float, float]] = []

    C_u = INITIAL_CU_FACTOR * C
    while True:
        C_vec = np.concatenate([np.full(l, float(C)), np.full(u, C_u)])
        y_all = np.concatenate([y_l, y_u])
        alpha, bias = smo_solve(K, y_all, C_vec, alpha0=alpha)
        obj = _objective_from_state(K, alpha, bias, y_all, C_vec)
        trace.append((C_u, obj))

        for _ in range(MAX_SWAPS_PER_STAGE):
            f_u = K[l:] @ (alpha * y_all) + bias
            pos = np.flatnonzero(y_u > 0)
            neg = np.flatnonzero(y_u < 0)
            if pos.size == 0 or neg.size == 0:
                break
            # Objective change of flipping each candidate, at the current model.
            gain_pos = _hinges(f_u[pos], -1.0) - _hinges(f_u[pos], 1.0)
            gain_neg = _hinges(f_u[neg], 1.0) - _hinges(f_u[neg], -1.0)
            i = pos[np.argmin(gain_pos)]
            j = neg[np.argmin(gain_neg)]
            if gain_pos.min() + gain_neg.min() >= 0.0:
                break
            saved = (alpha.copy(), bias, y_u.copy())
            y_u[i], y_u[j] = -1.0, 1.0
            alpha[l + i], alpha[l + j] = alpha[l + j], alpha[l + i]
            y_all = np.concatenate([y_l, y_u])
            alpha, bias = smo_solve(K, y_all, C_vec, alpha0=alpha)
            new_obj = _objective_from_state(K, alpha, bias, y_all, C_vec)
            if new_obj < obj - 1e-12 * (1.0 + abs(obj)):
                obj = new_obj
                trace.append((C_u, obj))
            else:
                alpha, bias, y_u = saved
                y_all = np.concatenate([y_l, y_u])
                break

        if C_u >= C:
            break
        C_u = min(2.0 * C_u, C)

    support = np.flatnonzero(alpha > SUPPORT_EPS)
    model = SvmModel(alpha, bias, kernel, X_all, y_all.astype(int), float(C), support)
    return TsvmResult(model, y_u.astype(int), trace)
