"""Replicated screening experiments: confusion metrics, FPR-target runs, and
ROC sweeps over a fixed threshold grid.

Each replicate r draws its own stream seeded with ``base_seed XOR r``. For
scenarios with random graphs (A, B) the ground truth is re-drawn inside every
replicate, so averages cover both graph and sampling randomness; C and D have
deterministic ground truths. Replicates run independently (optionally across
threads) and are aggregated in replicate order, so results do not depend on
scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .rankcorr import (
    DataMatrix,
    jackknife_matrix,
    kendall_matrix,
    pearson_matrix,
    sine_transform,
)
from .screening import EdgeSet, ThresholdSpec, screen_edges, threshold_matrix
from .simgen import GroundTruth, RngStream, SimConfig, generate_ground_truth, sample

ESTIMATORS = ("kendall", "pearson")


@dataclass(frozen=True)
class ConfusionMetrics:
    """Counts and rates over all unordered node pairs."""

    tp: int
    fp: int
    tn: int
    fn: int
    fpr: float
    fnr: float
    edge_count: int

    @staticmethod
    def from_counts(tp: int, fp: int, tn: int, fn: int) -> "ConfusionMetrics":
        fpr = fp / (fp + tn) if (fp + tn) > 0 else 0.0
        fnr = fn / (tp + fn) if (tp + fn) > 0 else 0.0
        return ConfusionMetrics(tp=tp, fp=fp, tn=tn, fn=fn, fpr=fpr, fnr=fnr,
                                edge_count=tp + fp)


def confusion(est: EdgeSet, truth: EdgeSet) -> ConfusionMetrics:
    """Score an estimated edge set against the truth on the same node set."""
    if est.p != truth.p:
        raise InvalidInputError(f"node counts differ: {est.p} vs {truth.p}")
    total = est.p * (est.p - 1) // 2
    e, t = est.as_set(), truth.as_set()
    tp = len(e & t)
    fp = len(e - t)
    fn = len(t - e)
    tn = total - tp - fp - fn
    return ConfusionMetrics.from_counts(tp, fp, tn, fn)


@dataclass(frozen=True)
class ExperimentSpec:
    """One replicated screening experiment."""

    sim: SimConfig
    threshold: ThresholdSpec
    estimator: str = "kendall"
    replicates: int = 50
    base_seed: int = 0

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise InvalidInputError(f"estimator must be one of {ESTIMATORS}")
        if self.replicates < 1:
            raise InvalidInputError("need at least 1 replicate")


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    per_replicate: tuple[ConfusionMetrics, ...]
    f_used: float | None
    q_convention: str | None

    @property
    def mean_fpr(self) -> float:
        return float(np.mean([m.fpr for m in self.per_replicate]))

    @property
    def mean_fnr(self) -> float:
        return float(np.mean([m.fnr for m in self.per_replicate]))

    @property
    def mean_edge_count(self) -> float:
        return float(np.mean([m.edge_count for m in self.per_replicate]))

    def aggregate(self) -> dict:
        out = {
            "scenario": self.spec.sim.scenario,
            "estimator": self.spec.estimator,
            "n": self.spec.sim.n,
            "p": self.spec.sim.p,
            "replicates": self.spec.replicates,
            "threshold_mode": self.spec.threshold.mode,
            "mean_fpr": self.mean_fpr,
            "mean_fnr": self.mean_fnr,
            "mean_edge_count": self.mean_edge_count,
            "mean_tp": float(np.mean([m.tp for m in self.per_replicate])),
            "mean_fp": float(np.mean([m.fp for m in self.per_replicate])),
            "mean_tn": float(np.mean([m.tn for m in self.per_replicate])),
            "mean_fn": float(np.mean([m.fn for m in self.per_replicate])),
        }
        if self.spec.threshold.mode == "fpr":
            out["f_used"] = self.f_used
            out["q"] = self.spec.threshold.q
            out["q_convention"] = self.q_convention
        elif self.spec.threshold.mode == "rate":
            out["c1"] = self.spec.threshold.c1
            out["kappa"] = self.spec.threshold.kappa
        else:
            out["gamma"] = self.spec.threshold.gamma
        return out


def estimator_matrix(data: DataMatrix, estimator: str, threads: int = 1):
    if estimator == "kendall":
        return sine_transform(kendall_matrix(data, threads=threads))
    if estimator == "pearson":
        return pearson_matrix(data)
    raise InvalidInputError(f"unknown estimator {estimator!r}")


def _resolve_fpr_budget(spec: ThresholdSpec, gt: GroundTruth) -> tuple[ThresholdSpec, float, str]:
    """Convert a target rate q into a count budget f.

    With ground truth in hand, q is interpreted against the true non-edge
    count (f = q * |non-edges|). A directly-supplied f is passed through.
    """
    if spec.f is not None:
        return spec, spec.f, "f-direct"
    f = spec.q * gt.nonedge_count()
    return ThresholdSpec.fpr(f=f), f, "q-times-true-nonedges"


def _run_replicate(spec: ExperimentSpec, r: int, threads: int = 1):
    try:
        rng = RngStream(spec.base_seed ^ r)
        gt = generate_ground_truth(spec.sim, rng)
        data = sample(gt, spec.sim, rng)
        corr = estimator_matrix(data, spec.estimator, threads=1)
        tspec = spec.threshold
        f_used = None
        convention = None
        jack = None
        if tspec.mode == "fpr":
            tspec, f_used, convention = _resolve_fpr_budget(tspec, gt)
            jack = jackknife_matrix(data, threads=threads)
        gammas = threshold_matrix(tspec, spec.sim.n, spec.sim.p, jack=jack)
        est = screen_edges(corr, gammas)
        return confusion(est, gt.edges), f_used, convention
    except Exception as exc:
        raise RuntimeError(f"replicate {r} failed: {exc}") from exc


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Run all replicates and collect per-replicate and mean metrics."""
    indices = range(spec.replicates)
    if threads > 1 and spec.replicates > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda r: _run_replicate(spec, r), indices))
    else:
        rows = [_run_replicate(spec, r, threads=threads) for r in indices]
    metrics = tuple(m for m, _, _ in rows)
    f_used = rows[0][1]
    convention = rows[0][2]
    return ExperimentResult(spec=spec, per_replicate=metrics, f_used=f_used,
                            q_convention=convention)


@dataclass(frozen=True)
class SweepResult:
    """Mean ROC curve over a fixed ascending threshold grid, plus the
    per-replicate curves it was averaged from."""

    grid: tuple[float, ...]
    mean_tpr: tuple[float, ...]
    mean_fpr: tuple[float, ...]
    per_replicate_tpr: tuple[tuple[float, ...], ...]
    per_replicate_fpr: tuple[tuple[float, ...], ...]


def default_grid(count: int = 50) -> tuple[float, ...]:
    """Evenly spaced thresholds covering [0, 1]."""
    return tuple(np.linspace(0.0, 1.0, count).tolist())


def _sweep_replicate(sim: SimConfig, estimator: str, base_seed: int, r: int,
                     grid: tuple[float, ...]):
    try:
        rng = RngStream(base_seed ^ r)
        gt = generate_ground_truth(sim, rng)
        data = sample(gt, sim, rng)
        corr = estimator_matrix(data, estimator)
        tprs, fprs = [], []
        for gamma in grid:
            est = screen_edges(corr, np.full((sim.p, sim.p), gamma))
            m = confusion(est, gt.edges)
            tprs.append(1.0 - m.fnr)
            fprs.append(m.fpr)
        return tuple(tprs), tuple(fprs)
    except Exception as exc:
        raise RuntimeError(f"replicate {r} failed: {exc}") from exc


def roc_sweep(sim: SimConfig, estimator: str, replicates: int, base_seed: int,
              grid=None, threads: int = 1) -> SweepResult:
    """One screening pass per grid value per replicate, reusing each
    replicate's correlation matrix across the whole grid."""
    if estimator not in ESTIMATORS:
        raise InvalidInputError(f"estimator must be one of {ESTIMATORS}")
    if replicates < 1:
        raise InvalidInputError("need at least 1 replicate")
    grid = default_grid() if grid is None else tuple(float(g) for g in grid)
    if len(grid) < 1:
        raise InvalidInputError("grid must be non-empty")
    if any(g < 0 for g in grid) or list(grid) != sorted(grid):
        raise InvalidInputError("grid values must be >= 0 and ascending")
    indices = range(replicates)
    if threads > 1 and replicates > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda r: _sweep_replicate(sim, estimator, base_seed, r, grid), indices))
    else:
        rows = [_sweep_replicate(sim, estimator, base_seed, r, grid) for r in indices]
    tpr = np.array([row[0] for row in rows])
    fpr = np.array([row[1] for row in rows])
    return SweepResult(
        grid=grid,
        mean_tpr=tuple(np.mean(tpr, axis=0).tolist()),
        mean_fpr=tuple(np.mean(fpr, axis=0).tolist()),
        per_replicate_tpr=tuple(tuple(row) for row in tpr.tolist()),
        per_replicate_fpr=tuple(tuple(row) for row in fpr.tolist()),
    )


def auc(sweep: SweepResult) -> float:
    """Trapezoidal area under the mean (FPR, TPR) polyline, anchored at
    (0, 0) and (1, 1)."""
    if len(sweep.grid) < 2:
        raise InvalidInputError("need at least 2 grid points")
    return auc_points(sweep.mean_fpr, sweep.mean_tpr)


def auc_points(fpr, tpr) -> float:
    """Trapezoid rule over arbitrary ROC points (sorted by FPR, anchored)."""
    pts = sorted(zip([float(v) for v in fpr], [float(v) for v in tpr]))
    pts = [(0.0, 0.0)] + pts + [(1.0, 1.0)]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


EXPERIMENT_CSV_COLUMNS = ("replicate", "q_or_gamma", "estimator", "scenario",
                          "tp", "fp", "tn", "fn", "fpr", "fnr", "edge_count")


def experiment_rows(result: ExperimentResult, q_or_gamma: float) -> list[tuple]:
    spec = result.spec
    rows = []
    for r, m in enumerate(result.per_replicate):
        rows.append((r, q_or_gamma, spec.estimator, spec.sim.scenario,
                     m.tp, m.fp, m.tn, m.fn, m.fpr, m.fnr, m.edge_count))
    return rows


def write_experiment_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(EXPERIMENT_CSV_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for value in row:
                if isinstance(value, float):
                    cells.append(f"{value:.17g}")
                else:
                    cells.append(str(value))
            fh.write(",".join(cells) + "\n")


def write_sweep_csv(path, sweep: SweepResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("gamma,mean_fpr,mean_tpr\n")
        for g, f, t in zip(sweep.grid, sweep.mean_fpr, sweep.mean_tpr):
            fh.write(f"{g:.17g},{f:.17g},{t:.17g}\n")


def write_json_report(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
