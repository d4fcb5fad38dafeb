"""Partitional and hierarchical clustering used by the prediction selectors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import as_matrix, squared_distances

KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class Partition:
    assignments: np.ndarray
    k: int


@dataclass(frozen=True)
class Dendrogram:
    """Ordered single-linkage merge list.

    Nodes 0..n-1 are leaves; the merge recorded at step s (1-based) creates
    node n+s-1.  Heights are non-decreasing in step order.
    """

    merges: tuple[tuple[int, int, float], ...]
    n_leaves: int

    def __post_init__(self):
        if len(self.merges) != self.n_leaves - 1:
            raise ValueError("a dendrogram over n leaves has exactly n-1 merges")

    @cached_property
    def heights(self) -> np.ndarray:
        return np.array([h for _, _, h in self.merges])

    @cached_property
    def step_matrix(self) -> np.ndarray:
        """step_matrix[i, j] = 1-based merge step at which leaves i, j co-cluster."""
        n = self.n_leaves
        steps = np.zeros((n, n), dtype=int)
        members: dict[int, list[int]] = {i: [i] for i in range(n)}
        for s, (a, b, _) in enumerate(self.merges, 1):
            ma, mb = members.pop(a), members.pop(b)
            steps[np.ix_(ma, mb)] = s
            steps[np.ix_(mb, ma)] = s
            members[n + s - 1] = ma + mb
        return steps


def _repair_empty_clusters(
    assign: np.ndarray, X: np.ndarray, centers: np.ndarray, k: int
) -> np.ndarray:
    # Donate the point farthest from its own centroid, never emptying a cluster.
    assign = assign.copy()
    while True:
        counts = np.bincount(assign, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return assign
        dist = np.einsum("ij,ij->i", X - centers[assign], X - centers[assign])
        dist[counts[assign] < 2] = -np.inf
        donor = int(np.argmax(dist))
        assign[donor] = empties[0]
        centers = centers.copy()
        centers[empties[0]] = X[donor]


def kmeans(X: np.ndarray, k: int, seed: int, return_trace: bool = False):
    """Lloyd iterations from k-means++ seeding; deterministic given seed.

    The returned partition never contains an empty cluster.  With
    return_trace=True also returns the per-iteration SSE values.
    """
    X = as_matrix(X)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    chosen = [int(rng.integers(n))]
    d2 = np.einsum("ij,ij->i", X - X[chosen[0]], X - X[chosen[0]])
    for _ in range(k - 1):
        total = float(d2.sum())
        if total > 0.0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:  # duplicates exhausted the spread; fall back to first unchosen
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, np.einsum("ij,ij->i", X - X[nxt], X - X[nxt]))
    centers = X[chosen].astype(float).copy()

    assign = None
    trace = []
    for _ in range(KMEANS_MAX_ITER):
        d2all = squared_distances(X, centers)
        new_assign = _repair_empty_clusters(np.argmin(d2all, axis=1), X, centers, k)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            centers[c] = X[assign == c].mean(axis=0)
        if return_trace:
            diff = X - centers[assign]
            trace.append(float(np.einsum("ij,ij->", diff, diff)))
    part = Partition(assign, k)
    return (part, trace) if return_trace else part


def single_linkage(X: np.ndarray) -> Dendrogram:
    """Greedy agglomeration by minimal inter-cluster (minimum pairwise) distance.

    Distance ties are broken by the lexicographically smallest pair of node
    indices, so the merge order is reproducible.
    """
    X = as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("single linkage needs at least 2 instances")
    total = 2 * n - 1
    big = np.full((total, total), np.inf)
    big[:n, :n] = np.sqrt(squared_distances(X))
    np.fill_diagonal(big, np.inf)

    active = np.zeros(total, dtype=bool)
    active[:n] = True
    merges = []
    for step in range(n - 1):
        act = np.flatnonzero(active)
        sub = big[np.ix_(act, act)]
        flat = int(np.argmin(sub))
        r, c = divmod(flat, act.size)
        a, b = int(act[r]), int(act[c])
        if a > b:
            a, b = b, a
        h = float(big[a, b])
        new = n + step
        merges.append((a, b, h))
        others = act[(act != a) & (act != b)]
        big[new, others] = np.minimum(big[a, others], big[b, others])
        big[others, new] = big[new, others]
        active[a] = active[b] = False
        active[new] = True
    return Dendrogram(tuple(merges), n)


def cophenetic_step(d: Dendrogram, i: int, j: int) -> int:
    """1-based merge step at which leaves i and j first share a cluster."""
    n = d.n_leaves
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("leaf index out of range")
    if i == j:
        raise ValueError("cophenetic step is undefined for i == j")
    return int(d.step_matrix[i, j])


def cophenetic_height(d: Dendrogram, i: int, j: int) -> float:
    """Merge height of the step at which leaves i and j first share a cluster."""
    return float(d.heights[cophenetic_step(d, i, j) - 1])


def nearest_label_steps(
    d: Dendrogram, label_state: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Merge-step distance from each unlabeled leaf to the nearest labeled leaf
    of each class.

    label_state holds +1/-1 for labeled leaves and 0 for unlabeled ones.
    Returns (steps_to_positive, steps_to_negative), aligned with the
    unlabeled leaves in index order.
    """
    label_state = np.asarray(label_state, dtype=int)
    if label_state.shape != (d.n_leaves,):
        raise ValueError("label_state must have one entry per leaf")
    pos = np.flatnonzero(label_state == 1)
    neg = np.flatnonzero(label_state == -1)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("need at least one labeled instance of each class")
    unlabeled = np.flatnonzero(label_state == 0)
    steps = d.step_matrix
    p = steps[np.ix_(unlabeled, pos)].min(axis=1)
    n = steps[np.ix_(unlabeled, neg)].min(axis=1)
    return p, n
