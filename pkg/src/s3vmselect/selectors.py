"""Per-instance fusion of supervised and semi-supervised predictions.

Each selector decides, for every unlabeled instance, whether to trust the
semi-supervised prediction or fall back to the supervised one:

  select_c  : cluster-vote agreement (partitional clustering),
  select_p  : confidence ranking from harmonic label propagation,
  select_us : merge-step margins from a single-linkage dendrogram.

All three take full-length prediction vectors in dataset order, where the
labeled positions carry the true labels, and return predictions plus a
provenance tag for the unlabeled instances only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import Dendrogram, kmeans, nearest_label_steps, single_linkage
from .data import Dataset
from .labelprop import harmonic_solve, lp_confidence_ranking

SVM_SOURCE = "svm"
S3VM_SOURCE = "s3vm"


@dataclass(frozen=True)
class SelectionOutcome:
    """Fused predictions over the unlabeled instances, in dataset order."""

    final_labels: np.ndarray
    source: np.ndarray  # "svm" / "s3vm" per unlabeled instance
    diagnostics: dict


def _check_vectors(dataset: Dataset, y_svm, y_s3vm) -> tuple[np.ndarray, np.ndarray]:
    y_svm = np.asarray(y_svm, dtype=int)
    y_s3vm = np.asarray(y_s3vm, dtype=int)
    if y_svm.shape != (dataset.m,) or y_s3vm.shape != (dataset.m,):
        raise ValueError(f"prediction vectors must cover all {dataset.m} instances")
    for v in (y_svm, y_s3vm):
        if not np.all(np.isin(v, (-1, 1))):
            raise ValueError("predictions must be +1 or -1")
    return y_svm, y_s3vm


def select_c(
    y_svm: np.ndarray,
    y_s3vm: np.ndarray,
    dataset: Dataset,
    k: int,
    seed: int,
) -> SelectionOutcome:
    """Adopt semi-supervised predictions cluster by cluster.

    A cluster votes with the summed predictions of its members (labeled
    members vote with their true labels).  The semi-supervised predictions
    are used on a cluster only when both methods agree on the vote's sign
    and the semi-supervised vote is strictly stronger.
    """
    y_svm, y_s3vm = _check_vectors(dataset, y_svm, y_s3vm)
    part = kmeans(dataset.X, k, seed)
    unlabeled = dataset.unlabeled_indices
    assign_u = part.assignments[unlabeled]
    final = y_svm[unlabeled].copy()
    source = np.full(unlabeled.size, SVM_SOURCE, dtype=object)
    cluster_votes = []
    for c in range(k):
        members = part.assignments == c
        sum_svm = int(y_svm[members].sum())
        sum_s3vm = int(y_s3vm[members].sum())
        adopt = np.sign(sum_svm) == np.sign(sum_s3vm) and abs(sum_s3vm) > abs(sum_svm)
        cluster_votes.append(
            {
                "cluster": c,
                "bias_svm": int(np.sign(sum_svm)),
                "confidence_svm": abs(sum_svm),
                "bias_s3vm": int(np.sign(sum_s3vm)),
                "confidence_s3vm": abs(sum_s3vm),
                "adopted": bool(adopt),
            }
        )
        if adopt:
            here = assign_u == c
            final[here] = y_s3vm[unlabeled[here]]
            source[here] = S3VM_SOURCE
    return SelectionOutcome(
        final, source, {"cluster_votes": cluster_votes, "partition": part}
    )


def select_p(
    y_svm: np.ndarray,
    y_s3vm: np.ndarray,
    dataset: Dataset,
    weights: np.ndarray,
    eta: float,
) -> SelectionOutcome:
    """Adopt semi-supervised predictions where propagation backs them up.

    Runs harmonic propagation over `weights` (dataset order), signs the
    confidences by agreement with the semi-supervised labels, and adopts the
    top min(floor(eta*u), c) instances by signed confidence, where c counts
    the non-negative entries.  Ties are broken by ascending instance index.
    """
    y_svm, y_s3vm = _check_vectors(dataset, y_svm, y_s3vm)
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    order = np.concatenate([dataset.labeled_indices, dataset.unlabeled_indices])
    W_perm = np.asarray(weights, dtype=float)
    if W_perm.shape != (dataset.m, dataset.m):
        raise ValueError("weights must be an m x m matrix")
    W_perm = W_perm[np.ix_(order, order)]
    prop = harmonic_solve(W_perm, dataset.y_labeled)

    unlabeled = dataset.unlabeled_indices
    signed, c = lp_confidence_ranking(prop, y_s3vm[unlabeled])
    take = min(int(math.floor(eta * dataset.u)), c)
    ranked = np.argsort(-signed, kind="stable")  # stable: equal values by index
    final = y_svm[unlabeled].copy()
    source = np.full(unlabeled.size, SVM_SOURCE, dtype=object)
    top = ranked[:take]
    final[top] = y_s3vm[unlabeled[top]]
    source[top] = S3VM_SOURCE
    return SelectionOutcome(
        final,
        source,
        {"signed_confidence": signed, "nonnegative_count": c, "adopted": top},
    )


def select_us(
    y_svm: np.ndarray,
    y_s3vm: np.ndarray,
    dataset: Dataset,
    epsilon: float,
    dendrogram: Dendrogram | None = None,
) -> SelectionOutcome:
    """Adopt semi-supervised predictions via dendrogram merge-step margins.

    For every unlabeled instance where the two methods disagree, compare the
    merge-step distances to the nearest labeled instance of each class; the
    margin t = steps_to_negative - steps_to_positive is a signed confidence
    for the positive class.  Disagreement instances with |t| >= epsilon*(l+u)
    form the override set, which is predicted as a block by whichever method
    better matches the margins (ties to the semi-supervised side); everything
    else keeps the supervised prediction.
    """
    y_svm, y_s3vm = _check_vectors(dataset, y_svm, y_s3vm)
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if dendrogram is None:
        dendrogram = single_linkage(dataset.X)
    if dendrogram.n_leaves != dataset.m:
        raise ValueError("dendrogram does not match the dataset")

    label_state = np.zeros(dataset.m, dtype=int)
    label_state[dataset.labeled_mask] = dataset.y_labeled
    p, n = nearest_label_steps(dendrogram, label_state)
    t = (n - p).astype(float)

    unlabeled = dataset.unlabeled_indices
    disagree = y_svm[unlabeled] != y_s3vm[unlabeled]
    override = disagree & (np.abs(t) >= epsilon * dataset.m)
    use_s3vm = float(y_s3vm[unlabeled[override]] @ t[override]) >= float(
        y_svm[unlabeled[override]] @ t[override]
    )
    final = y_svm[unlabeled].copy()
    source = np.full(unlabeled.size, SVM_SOURCE, dtype=object)
    if use_s3vm:
        final[override] = y_s3vm[unlabeled[override]]
        source[override] = S3VM_SOURCE
    return SelectionOutcome(
        final,
        source,
        {
            "margins": t,
            "override_set": np.flatnonzero(override),
            "s3vm_side": bool(use_s3vm),
        },
    )
