"""Dataset container, file loaders, seeded splits and moon generators.

All randomness in this module flows through numpy's PCG64 generator seeded
with explicit SeedSequence entropy, so splits and synthetic data are
reproducible across runs and platforms (see README, "Reproducibility").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus per-instance label state.

    y_true holds +1/-1 ground truth where known and 0 where unknown;
    labeled_mask marks the instances visible to training.
    """

    X: np.ndarray
    y_true: np.ndarray
    labeled_mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", as_matrix(self.X))
        y = np.asarray(self.y_true, dtype=int)
        mask = np.asarray(self.labeled_mask, dtype=bool)
        if y.shape != (self.X.shape[0],) or mask.shape != y.shape:
            raise ValueError("X, y_true and labeled_mask disagree on length")
        if not np.all(np.isin(y, (-1, 0, 1))):
            raise ValueError("y_true entries must be -1, 0 (unknown) or +1")
        if np.any(mask & (y == 0)):
            raise ValueError("labeled instances must carry a +1/-1 label")
        object.__setattr__(self, "y_true", y)
        object.__setattr__(self, "labeled_mask", mask)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def l(self) -> int:
        return int(self.labeled_mask.sum())

    @property
    def u(self) -> int:
        return self.m - self.l

    @property
    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)

    @property
    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    @property
    def X_labeled(self) -> np.ndarray:
        return self.X[self.labeled_mask]

    @property
    def y_labeled(self) -> np.ndarray:
        return self.y_true[self.labeled_mask]

    @property
    def X_unlabeled(self) -> np.ndarray:
        return self.X[~self.labeled_mask]

    @property
    def y_unlabeled_true(self) -> np.ndarray:
        return self.y_true[~self.labeled_mask]


@dataclass(frozen=True)
class SplitSpec:
    """How to carve labeled/unlabeled splits out of a fully labeled sample."""

    n_labeled: int
    seed: int
    repeats: int = 1

    def __post_init__(self):
        if self.n_labeled < 2:
            raise ValueError("n_labeled must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


_LABEL_TOKENS = {"+1": 1, "1": 1, "-1": -1, "?": 0}


def _parse_label(token: str, lineno: int) -> int:
    try:
        return _LABEL_TOKENS[token]
    except KeyError:
        raise ValueError(
            f"line {lineno}: invalid label {token!r} (expected +1, -1 or ?)"
        ) from None


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ValueError(f"line {lineno}: malformed {what} {token!r}") from None
    if not np.isfinite(v):
        raise ValueError(f"line {lineno}: non-finite {what} {token!r}")
    return v


def _load_csv(lines: list[str]) -> Dataset:
    rows, labels = [], []
    start = 0
    if lines and lines[0].split(",")[0].strip() not in _LABEL_TOKENS:
        start = 1  # header row
    for lineno, line in enumerate(lines[start:], start + 1):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        labels.append(_parse_label(fields[0], lineno))
        rows.append([_parse_float(f, lineno, "feature") for f in fields[1:]])
        if len(rows[-1]) != len(rows[0]):
            raise ValueError(f"line {lineno}: expected {len(rows[0])} features")
    if not rows:
        raise ValueError("no data rows found")
    y = np.array(labels)
    return Dataset(np.array(rows, dtype=float), y, y != 0)


def _load_sparse(lines: list[str]) -> Dataset:
    parsed = []  # (label, {index: value})
    dim = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        tokens = line.split()
        label = _parse_label(tokens[0], lineno)
        entries = {}
        for tok in tokens[1:]:
            idx_s, _, val_s = tok.partition(":")
            if not val_s:
                raise ValueError(f"line {lineno}: malformed entry {tok!r}")
            try:
                idx = int(idx_s)
            except ValueError:
                raise ValueError(f"line {lineno}: malformed index {idx_s!r}") from None
            if idx < 1:
                raise ValueError(f"line {lineno}: indices are 1-based, got {idx}")
            entries[idx] = _parse_float(val_s, lineno, "value")
            dim = max(dim, idx)
        parsed.append((label, entries))
    if not parsed:
        raise ValueError("no data rows found")
    X = np.zeros((len(parsed), dim))
    y = np.zeros(len(parsed), dtype=int)
    for i, (label, entries) in enumerate(parsed):
        y[i] = label
        for idx, val in entries.items():
            X[i, idx - 1] = val
    return Dataset(X, y, y != 0)


def load_dataset(path, fmt: str = "csv") -> Dataset:
    """Read a dataset file.

    csv   : "label,f1,f2,..." with label +1/-1/? and an optional header row.
    sparse: "label idx:val idx:val ..." with 1-based indices; omitted
            entries are zero and the dimension is the largest index seen.
    """
    if fmt not in ("csv", "sparse"):
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    return _load_csv(lines) if fmt == "csv" else _load_sparse(lines)


def _label_token(v: int) -> str:
    return "?" if v == 0 else ("+1" if v > 0 else "-1")


def save_dataset(path, dataset: Dataset, fmt: str = "csv") -> None:
    """Write a dataset so that load_dataset reproduces it exactly."""
    if fmt not in ("csv", "sparse"):
        raise ValueError(f"unknown format {fmt!r}")
    lines = []
    d = dataset.X.shape[1]
    for i in range(dataset.m):
        token = _label_token(int(dataset.y_true[i]))
        if fmt == "csv":
            lines.append(",".join([token] + [repr(v) for v in dataset.X[i]]))
        else:
            nz = [j for j in range(d) if dataset.X[i, j] != 0.0]
            if i == 0 and d >= 1 and (d - 1) not in nz:
                nz.append(d - 1)  # pin the dimension for the reader
            lines.append(
                " ".join([token] + [f"{j + 1}:{dataset.X[i, j]!r}" for j in nz])
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def make_split(
    X: np.ndarray, y_true: np.ndarray, spec: SplitSpec, repeat_index: int
) -> Dataset:
    """Draw the labeled set for one repeat.

    Deterministic in (spec.seed, repeat_index).  The labeled subset is
    redrawn until it contains both classes, which mirrors how small-label
    splits are prepared in semi-supervised benchmarks.
    """
    X = as_matrix(X)
    y = np.asarray(y_true, dtype=int)
    m = X.shape[0]
    if y.shape != (m,) or not np.all(np.isin(y, (-1, 1))):
        raise ValueError("y_true must be a +1/-1 vector matching X")
    if spec.n_labeled >= m:
        raise ValueError(f"n_labeled={spec.n_labeled} must be < m={m}")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("class absent in y_true")
    if repeat_index < 0:
        raise ValueError("repeat_index must be non-negative")

    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([spec.seed, repeat_index]))
    )
    for _ in range(10_000):
        chosen = rng.choice(m, size=spec.n_labeled, replace=False)
        if (y[chosen] > 0).any() and (y[chosen] < 0).any():
            mask = np.zeros(m, dtype=bool)
            mask[chosen] = True
            return Dataset(X, y, mask)
    raise RuntimeError("could not draw a labeled set containing both classes")


def make_moons(
    variant: str, n_per_moon: int, noise_sigma: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic interleaved half-circle data.

    two  : upper arc of radius 1 at the origin (label +1) and the mirrored
           arc shifted by (+1.0, -0.5) (label -1).
    three: adds a second +1 arc above the first at vertical offset +1.5,
           giving a two-arcs-versus-one class structure.
    """
    if variant not in ("two", "three"):
        raise ValueError(f"unknown variant {variant!r}")
    if n_per_moon < 1:
        raise ValueError("n_per_moon must be at least 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    t = np.linspace(0.0, np.pi, n_per_moon)
    arcs = [
        (np.column_stack([np.cos(t), np.sin(t)]), 1),
        (np.column_stack([1.0 + np.cos(t), -0.5 - np.sin(t)]), -1),
    ]
    if variant == "three":
        arcs.append((np.column_stack([np.cos(t), 1.5 + np.sin(t)]), 1))
    X = np.vstack([a for a, _ in arcs])
    y = np.concatenate([np.full(n_per_moon, lbl) for _, lbl in arcs])
    if noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        X = X + rng.normal(0.0, noise_sigma, size=X.shape)
    return X, y
