"""Accuracy, paired t-tests and win/tie/loss bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WIN, TIE, LOSS = "win", "tie", "loss"


@dataclass(frozen=True)
class MethodRun:
    """One method's per-repeat accuracies under a fixed setting."""

    name: str
    accuracies: np.ndarray

    def __post_init__(self):
        acc = np.asarray(self.accuracies, dtype=float)
        if acc.ndim != 1 or acc.size == 0:
            raise ValueError("accuracies must be a non-empty vector")
        if (acc < 0).any() or (acc > 1).any():
            raise ValueError("accuracies must lie in [0, 1]")
        object.__setattr__(self, "accuracies", acc)


@dataclass(frozen=True)
class Comparison:
    method: str
    baseline: str
    outcome: str
    t_stat: float
    alpha: float


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of positions where the two label vectors agree."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1 or predicted.size == 0:
        raise ValueError("predicted and truth must be equal-length non-empty vectors")
    return float((predicted == truth).mean())


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-15:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def student_t_critical(df: int, alpha: float = 0.05) -> float:
    """Two-sided critical value: P(|T_df| > value) = alpha.

    Inverts the t tail probability, expressed through the regularized
    incomplete beta function, by bisection.
    """
    if df < 1:
        raise ValueError("df must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    # Tail identity: P(|T| > t) = I_x(df/2, 1/2) with x = df / (df + t^2);
    # solve I_x = alpha for x, which is increasing in x.
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if regularized_incomplete_beta(df / 2.0, 0.5, mid) < alpha:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return math.sqrt(df * (1.0 - x) / x)


def paired_t_test(
    a: np.ndarray, b: np.ndarray, alpha: float = 0.05
) -> tuple[str, float]:
    """Two-sided paired t-test on a - b.

    Returns (outcome, t): 'win' if a is significantly larger, 'loss' if
    significantly smaller, 'tie' otherwise.  A zero-variance difference is
    decided by its sign alone (t is +/-inf, or 0 when the difference is
    identically zero).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be equal-length vectors")
    n = a.size
    if n < 2:
        raise ValueError("need at least 2 paired observations")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TIE, 0.0
        return (WIN, math.inf) if mean > 0 else (LOSS, -math.inf)
    t = mean / (sd / math.sqrt(n))
    if abs(t) > student_t_critical(n - 1, alpha):
        return (WIN, t) if mean > 0 else (LOSS, t)
    return TIE, t


def wtl_table(
    runs: list[MethodRun], baseline: MethodRun, alpha: float = 0.05
) -> list[Comparison]:
    """Compare each run against the baseline with a paired t-test."""
    out = []
    for run in runs:
        if run.accuracies.size != baseline.accuracies.size:
            raise ValueError(
                f"{run.name} has {run.accuracies.size} repeats, "
                f"baseline has {baseline.accuracies.size}"
            )
        outcome, t = paired_t_test(run.accuracies, baseline.accuracies, alpha)
        out.append(Comparison(run.name, baseline.name, outcome, t, alpha))
    return out


def wtl_counts(comparisons: list[Comparison]) -> tuple[int, int, int]:
    """Aggregate (wins, ties, losses) over a list of comparisons."""
    w = sum(1 for c in comparisons if c.outcome == WIN)
    t = sum(1 for c in comparisons if c.outcome == TIE)
    return w, t, len(comparisons) - w - t
