"""Harmonic-function label propagation over a weighted graph.

The graph couples labeled and unlabeled instances through a symmetric
non-negative weight matrix.  Clamping the labeled rows to one-hot class
indicators and minimizing the Laplacian energy gives a linear system for the
unlabeled rows, solved here with the shared SPD solver rather than an
explicit inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, solve_spd, squared_distances


@dataclass(frozen=True)
class PropagationResult:
    """Per-unlabeled-instance class scores, hard labels and confidences.

    scores rows sum to one; labels are the sign of the score difference
    (sign(0) = +1); confidence is the absolute score difference.
    """

    scores: np.ndarray
    labels: np.ndarray
    confidence: np.ndarray


def gaussian_weights(X: np.ndarray, width: float) -> np.ndarray:
    """Dense gaussian affinity matrix with zero diagonal."""
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 instances")
    if not width > 0:
        raise ValueError("width must be positive")
    W = np.exp(-squared_distances(X) / (2.0 * width**2))
    np.fill_diagonal(W, 0.0)
    return W


def harmonic_solve(W: np.ndarray, labels_l: np.ndarray) -> PropagationResult:
    """Propagate the first l rows' labels to the remaining rows of W.

    W must be symmetric and non-negative with zero diagonal, ordered with
    the labeled block first.  labels_l holds the +1/-1 labels of that block.
    """
    W = as_matrix(W, "W")
    m = W.shape[0]
    if W.shape[1] != m:
        raise ValueError("W must be square")
    if np.abs(W - W.T).max() > 1e-10 * max(1.0, float(np.abs(W).max())):
        raise ValueError("W must be symmetric")
    if (W < 0).any():
        raise ValueError("W must be non-negative")
    if np.abs(np.diagonal(W)).max() > 0:
        raise ValueError("W must have a zero diagonal")
    labels_l = np.asarray(labels_l)
    if labels_l.ndim != 1 or labels_l.size > m:
        raise ValueError("labels_l must be a vector no longer than W's side")
    if not np.all(np.isin(labels_l, (-1, 1))):
        raise ValueError("labels must be +1 or -1")

    l = labels_l.size
    u = m - l
    if u == 0:
        empty = np.zeros((0,))
        return PropagationResult(np.zeros((0, 2)), empty.astype(int), empty)

    degrees = W.sum(axis=1)
    dead = np.flatnonzero(degrees[l:] == 0.0)
    if dead.size:
        raise ValueError(f"unlabeled node {l + int(dead[0])} has zero degree")

    y = labels_l.astype(float)
    F_l = np.column_stack([(y + 1.0) / 2.0, (1.0 - y) / 2.0])
    laplacian_uu = np.diag(degrees[l:]) - W[l:, l:]
    scores = solve_spd(laplacian_uu, W[l:, :l] @ F_l)
    diff = scores[:, 0] - scores[:, 1]
    return PropagationResult(scores, np.where(diff >= 0, 1, -1), np.abs(diff))


def lp_confidence_ranking(
    prop: PropagationResult, y_s3vm: np.ndarray
) -> tuple[np.ndarray, int]:
    """Sign the propagation confidences by agreement with the S3VM labels.

    A confidence goes negative exactly where the two predictors disagree.
    Also returns the count of non-negative entries (zeros included).
    """
    y_s3vm = np.asarray(y_s3vm)
    if y_s3vm.shape != prop.labels.shape:
        raise ValueError("y_s3vm length does not match the propagation result")
    signed = y_s3vm * prop.labels * prop.confidence
    return signed, int((signed >= 0).sum())
