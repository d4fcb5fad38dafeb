"""End-to-end benchmark orchestration.

For each kernel setting the harness repeats: draw a labeled/unlabeled
split, train the supervised SVM and the transductive SVM, run the three
prediction selectors, and score every method on the unlabeled instances
(transductive evaluation).  Accuracies are aggregated into a report with
paired t-test outcomes against the supervised baseline.

Everything is deterministic in the config seed: per-repeat generator
streams are derived from (seed, repeat_index), so repeats may run in
parallel without changing any number.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import single_linkage
from .data import Dataset, SplitSpec, load_dataset, make_moons, make_split
from .evaluation import MethodRun, Comparison, accuracy, wtl_counts, wtl_table
from .labelprop import gaussian_weights
from .numerics import KernelSpec, as_matrix, average_pairwise_distance
from .selectors import select_c, select_p, select_us
from .svm import predict_labels, train_svc
from .tsvm import train_tsvm

METHODS = ("SVM", "TSVM", "S3VM-c", "S3VM-p", "S3VM-us")
BASELINE = "SVM"

# Hyperparameter presets for the 10-label regime: C resolved per dataset,
# gaussian width as a multiple of the average pairwise distance.
PRESETS = {
    "benchmark10": (("m_over_sumsq",), 1.0),
    "uci10": (("fixed", 1.0), 1.0),
}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One benchmark run: a dataset, a split policy and method parameters."""

    dataset: object  # path to a data file, or an in-memory (X, y) pair
    n_labeled: int
    kernels: tuple[str, ...] = ("gaussian",)
    repeats: int = 30
    seed: int = 0
    c_rule: tuple = ("m_over_sumsq",)
    width_factor: float = 1.0
    k: int = 50
    eta: float = 0.1
    epsilon: float = 0.1
    workers: int = 1
    name: str = ""

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if not self.kernels:
            raise ValueError("at least one kernel required")
        for kind in self.kernels:
            if kind not in ("linear", "gaussian"):
                raise ValueError(f"unknown kernel kind {kind!r}")
        if self.c_rule[0] not in ("fixed", "m_over_sumsq"):
            raise ValueError(f"unknown C rule {self.c_rule[0]!r}")
        if self.width_factor <= 0 or self.k < 1 or self.workers < 1:
            raise ValueError("width_factor, k and workers must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass
class SettingResult:
    name: str
    kernel: str
    runs: list[MethodRun] = field(default_factory=list)
    comparisons: list[Comparison] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def run(self, method: str) -> MethodRun:
        for r in self.runs:
            if r.name == method:
                return r
        raise KeyError(method)


@dataclass
class Report:
    settings: list[SettingResult]

    @property
    def aggregate(self) -> dict[str, tuple[int, int, int]]:
        """Win/tie/loss counts vs the baseline per method, over clean settings."""
        out = {}
        for method in METHODS[1:]:
            comps = [
                c
                for s in self.settings
                if not s.failed
                for c in s.comparisons
                if c.method == method
            ]
            out[method] = wtl_counts(comps)
        return out

    def to_tsv(self) -> str:
        lines = ["# methods", "setting\tmethod\tmean\tstd\toutcome\tt"]
        for s in self.settings:
            if s.failed:
                continue
            for run in s.runs:
                if run.name == BASELINE:
                    outcome, t = "baseline", ""
                else:
                    comp = next(c for c in s.comparisons if c.method == run.name)
                    outcome, t = comp.outcome, f"{comp.t_stat:.4f}"
                acc = run.accuracies
                lines.append(
                    f"{s.name}\t{run.name}\t{acc.mean():.6f}\t{acc.std():.6f}"
                    f"\t{outcome}\t{t}"
                )
        lines.append("# wtl")
        lines.append("method\twins\tties\tlosses")
        for method, (w, t, l) in self.aggregate.items():
            lines.append(f"{method}\t{w}\t{t}\t{l}")
        failed = [s for s in self.settings if s.failed]
        if failed:
            lines.append("# failed")
            for s in failed:
                lines.append(f"{s.name}\t{s.error}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = []
        for s in self.settings:
            lines.append(f"== {s.name} ==")
            if s.failed:
                lines.append(f"  FAILED: {s.error}")
                continue
            for run in s.runs:
                acc = run.accuracies
                if run.name == BASELINE:
                    mark = "(baseline)"
                else:
                    comp = next(c for c in s.comparisons if c.method == run.name)
                    mark = comp.outcome
                lines.append(
                    f"  {run.name:<8} {100 * acc.mean():6.2f} +- {100 * acc.std():5.2f}  {mark}"
                )
        lines.append("== win/tie/loss vs SVM ==")
        for method, (w, t, l) in self.aggregate.items():
            lines.append(f"  {method:<8} {w}/{t}/{l}")
        return "\n".join(lines) + "\n"


def resolve_c(c_rule: tuple, X: np.ndarray) -> float:
    """Regularization constant from the configured rule."""
    if c_rule[0] == "fixed":
        return float(c_rule[1])
    m = X.shape[0]
    return float(m / np.einsum("ij,ij->", X, X))


def resolve_kernel(kind: str, delta: float, width_factor: float) -> KernelSpec:
    if kind == "linear":
        return KernelSpec("linear")
    return KernelSpec("gaussian", width_factor * delta)


def _load_config_data(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, str]:
    if isinstance(config.dataset, (str, os.PathLike)):
        ds = load_dataset(config.dataset, "csv")
        if (ds.y_true == 0).any():
            raise ValueError(
                "benchmark data must be fully labeled; '?' instances found"
            )
        name = config.name or os.path.basename(str(config.dataset))
        return ds.X, ds.y_true, name
    X, y = config.dataset
    return as_matrix(X), np.asarray(y, dtype=int), (config.name or "dataset")


def _derived_seed(seed: int, repeat_index: int, salt: int) -> int:
    return int(
        np.random.SeedSequence([seed, repeat_index, salt]).generate_state(1)[0]
    )


def _repeat_split(X, y, config: ExperimentConfig, repeat_index: int) -> Dataset:
    spec = SplitSpec(config.n_labeled, config.seed, config.repeats)
    return make_split(X, y, spec, repeat_index)


def _repeat_predictions(ds: Dataset, kernel: KernelSpec, C: float):
    """Supervised and transductive predictions as full-length vectors."""
    model = train_svc(ds.X_labeled, ds.y_labeled, kernel, C)
    ts = train_tsvm(ds, kernel, C)
    y_svm = ds.y_true.copy()
    y_svm[~ds.labeled_mask] = predict_labels(model, ds.X_unlabeled)
    y_s3vm = ds.y_true.copy()
    y_s3vm[~ds.labeled_mask] = ts.unlabeled_labels
    return y_svm, y_s3vm


def _run_repeat(X, y, config, kernel, C, weights, dendro, repeat_index):
    ds = _repeat_split(X, y, config, repeat_index)
    y_svm, y_s3vm = _repeat_predictions(ds, kernel, C)
    truth = ds.y_unlabeled_true
    unl = ds.unlabeled_indices
    out_c = select_c(
        y_svm, y_s3vm, ds, config.k, _derived_seed(config.seed, repeat_index, 1)
    )
    out_p = select_p(y_svm, y_s3vm, ds, weights, config.eta)
    out_us = select_us(y_svm, y_s3vm, ds, config.epsilon, dendrogram=dendro)
    return {
        "SVM": accuracy(y_svm[unl], truth),
        "TSVM": accuracy(y_s3vm[unl], truth),
        "S3VM-c": accuracy(out_c.final_labels, truth),
        "S3VM-p": accuracy(out_p.final_labels, truth),
        "S3VM-us": accuracy(out_us.final_labels, truth),
    }


def _map_repeats(fn, repeats: int, workers: int) -> list:
    """Apply fn to every repeat index; slot-ordered, so parallelism is inert."""
    if workers <= 1:
        return [fn(r) for r in range(repeats)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(repeats)))


def run_experiment(config: ExperimentConfig) -> Report:
    """Run all methods over every kernel setting and aggregate a report.

    A setting with at least one failed repeat is reported as failed rather
    than silently averaged over the surviving repeats.
    """
    X, y, name = _load_config_data(config)
    delta = average_pairwise_distance(X)
    weights = gaussian_weights(X, delta)
    dendro = single_linkage(X)

    settings = []
    for kind in config.kernels:
        setting = SettingResult(name=f"{name}|{kind}", kernel=kind)
        kernel = resolve_kernel(kind, delta, config.width_factor)
        C = resolve_c(config.c_rule, X)

        def one(r, kernel=kernel, C=C):
            try:
                return _run_repeat(X, y, config, kernel, C, weights, dendro, r)
            except Exception as exc:  # reported per repeat, never averaged away
                return f"repeat {r}: {exc}"

        results = _map_repeats(one, config.repeats, config.workers)
        errors = [r for r in results if isinstance(r, str)]
        if errors:
            setting.error = "; ".join(errors[:3])
        else:
            for method in METHODS:
                setting.runs.append(
                    MethodRun(method, np.array([r[method] for r in results]))
                )
            baseline = setting.run(BASELINE)
            setting.comparisons = wtl_table(
                [r for r in setting.runs if r.name != BASELINE], baseline
            )
        settings.append(setting)
    return Report(settings)


def run_single(config: ExperimentConfig) -> list[tuple[str, float]]:
    """One repeat of the pipeline; returns (method, accuracy) rows."""
    if len(config.kernels) != 1:
        raise ValueError("run_single expects exactly one kernel")
    single = replace(config, repeats=1)
    X, y, _ = _load_config_data(single)
    delta = average_pairwise_distance(X)
    weights = gaussian_weights(X, delta)
    dendro = single_linkage(X)
    kernel = resolve_kernel(single.kernels[0], delta, single.width_factor)
    C = resolve_c(single.c_rule, X)
    accs = _run_repeat(X, y, single, kernel, C, weights, dendro, 0)
    return [(m, accs[m]) for m in METHODS]


def epsilon_sweep(
    config: ExperimentConfig, epsilons: list[float]
) -> list[tuple[float, float]]:
    """Mean improvement of the dendrogram selector over the SVM per epsilon.

    The expensive per-repeat work (split, SVM, TSVM) is shared across all
    epsilon values; only the selector is re-run.
    """
    if not epsilons:
        raise ValueError("epsilons must be non-empty")
    for eps in epsilons:
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"epsilon {eps} outside (0, 1]")
    if len(config.kernels) != 1:
        raise ValueError("epsilon_sweep expects exactly one kernel")

    X, y, _ = _load_config_data(config)
    delta = average_pairwise_distance(X)
    dendro = single_linkage(X)
    kernel = resolve_kernel(config.kernels[0], delta, config.width_factor)
    C = resolve_c(config.c_rule, X)

    def one(r):
        ds = _repeat_split(X, y, config, r)
        y_svm, y_s3vm = _repeat_predictions(ds, kernel, C)
        truth = ds.y_unlabeled_true
        base = accuracy(y_svm[ds.unlabeled_indices], truth)
        row = []
        for eps in epsilons:
            out = select_us(y_svm, y_s3vm, ds, eps, dendrogram=dendro)
            row.append(accuracy(out.final_labels, truth) - base)
        return row

    rows = np.array(_map_repeats(one, config.repeats, config.workers))
    return [(float(eps), float(rows[:, i].mean())) for i, eps in enumerate(epsilons)]


def render_sweep_tsv(series: list[tuple[float, float]]) -> str:
    lines = ["epsilon\tmean_improvement"]
    for eps, imp in series:
        lines.append(f"{eps:g}\t{imp:.6f}")
    return "\n".join(lines) + "\n"


def safety_suite(repeats: int = 30, workers: int = 1) -> list[ExperimentConfig]:
    """The shipped degeneration benchmark: moon variants x noise x kernels.

    Covers the regime where the transductive SVM helps (clean three-moon
    data) and the regime where it degenerates (heavily blurred two-moon
    data), so the selectors' safety behaviour is observable end to end.
    """
    fixtures = [
        ("three-moon/n0.08", make_moons("three", 50, 0.08, 11)),
        ("three-moon/n0.15", make_moons("three", 50, 0.15, 12)),
        ("two-moon/n0.12", make_moons("two", 55, 0.12, 13)),
        ("two-moon/n0.35", make_moons("two", 55, 0.35, 14)),
    ]
    return [
        ExperimentConfig(
            dataset=(X, y),
            n_labeled=10,
            kernels=("linear", "gaussian"),
            repeats=repeats,
            seed=97,
            c_rule=("fixed", 1.0),
            workers=workers,
            name=name,
        )
        for name, (X, y) in fixtures
    ]


def figure1_config(repeats: int = 30, workers: int = 1) -> ExperimentConfig:
    """Three-moon fixture where the transductive SVM improves on the SVM."""
    X, y = make_moons("three", 50, 0.08, 11)
    return ExperimentConfig(
        dataset=(X, y),
        n_labeled=10,
        kernels=("gaussian",),
        repeats=repeats,
        seed=97,
        c_rule=("fixed", 1.0),
        workers=workers,
        name="three-moon/n0.08",
    )
