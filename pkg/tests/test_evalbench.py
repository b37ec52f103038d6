"""Tests for confusion metrics, experiment runs, and ROC sweeps."""

import numpy as np
import pytest

from tauscreen import (
    EdgeSet,
    InvalidInputError,
    ExperimentSpec,
    RngStream,
    SimConfig,
    SweepResult,
    ThresholdSpec,
    auc,
    auc_points,
    confusion,
    default_grid,
    estimator_matrix,
    generate_ground_truth,
    roc_sweep,
    run_experiment,
    sample,
    screen_edges,
    threshold_matrix,
)
from tauscreen.evalbench import experiment_rows, write_experiment_csv, write_sweep_csv


class TestConfusion:
    def test_perfect(self):
        t = EdgeSet(4, ((0, 1), (2, 3)))
        m = confusion(t, t)
        assert (m.fpr, m.fnr) == (0.0, 0.0)
        assert m.edge_count == 2

    def test_empty_estimate(self):
        t = EdgeSet(4, ((0, 1),))
        m = confusion(EdgeSet(4, ()), t)
        assert m.fnr == 1.0 and m.fpr == 0.0

    def test_hand_counts(self):
        truth = EdgeSet(4, ((0, 1), (2, 3)))
        est = EdgeSet(4, ((0, 1), (0, 2)))
        m = confusion(est, truth)
        assert (m.tp, m.fp, m.fn, m.tn) == (1, 1, 1, 3)
        assert m.fpr == pytest.approx(0.25)
        assert m.fnr == pytest.approx(0.5)
        assert m.tp + m.fp + m.tn + m.fn == 6

    def test_degenerate_denominators(self):
        empty_truth = EdgeSet(3, ())
        m = confusion(EdgeSet(3, ()), empty_truth)
        assert m.fnr == 0.0
        complete = EdgeSet(3, ((0, 1), (0, 2), (1, 2)))
        m2 = confusion(complete, complete)
        assert m2.fpr == 0.0

    def test_size_mismatch(self):
        with pytest.raises(InvalidInputError):
            confusion(EdgeSet(3, ()), EdgeSet(4, ()))


class TestRunExperiment:
    def test_single_replicate_reduces_to_direct_computation(self):
        sim = SimConfig(scenario="C", n=80, p=10, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.rate(0.5, 0.25),
                              estimator="kendall", replicates=1, base_seed=99)
        result = run_experiment(spec)
        rng = RngStream(99)
        gt = generate_ground_truth(sim, rng)
        data = sample(gt, sim, rng)
        corr = estimator_matrix(data, "kendall")
        gammas = threshold_matrix(ThresholdSpec.rate(0.5, 0.25), 80, 10)
        expect = confusion(screen_edges(corr, gammas), gt.edges)
        assert result.per_replicate[0] == expect

    def test_deterministic(self):
        sim = SimConfig(scenario="B", n=40, p=20, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.fpr(q=0.2),
                              estimator="kendall", replicates=4, base_seed=5)
        a = run_experiment(spec)
        b = run_experiment(spec)
        assert a.per_replicate == b.per_replicate
        assert a.f_used == b.f_used

    def test_threads_identical(self):
        sim = SimConfig(scenario="A", n=40, p=25, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.fixed(0.3),
                              estimator="kendall", replicates=6, base_seed=17)
        a = run_experiment(spec, threads=1)
        b = run_experiment(spec, threads=4)
        assert a.per_replicate == b.per_replicate

    def test_aggregate_is_plain_mean(self):
        sim = SimConfig(scenario="C", n=30, p=8, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.fixed(0.2),
                              estimator="pearson", replicates=5, base_seed=3)
        result = run_experiment(spec)
        assert result.mean_fpr == float(np.mean([m.fpr for m in result.per_replicate]))
        assert result.mean_edge_count == float(
            np.mean([m.edge_count for m in result.per_replicate]))

    def test_q_converts_through_true_nonedges(self):
        sim = SimConfig(scenario="D", n=50, p=20, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.fpr(q=0.1),
                              estimator="kendall", replicates=1, base_seed=1)
        result = run_experiment(spec)
        gt = generate_ground_truth(sim)
        assert result.f_used == pytest.approx(0.1 * gt.nonedge_count())
        assert result.q_convention == "q-times-true-nonedges"
        agg = result.aggregate()
        assert agg["q"] == 0.1 and agg["q_convention"] == "q-times-true-nonedges"


class TestRocSweep:
    def test_extreme_grid_points(self):
        # n = 62 makes n(n-1)/2 odd, so a tie-free tau numerator is odd and
        # can never be exactly zero; gamma = 0 then keeps every pair
        sim = SimConfig(scenario="C", n=62, p=8, seed=0)
        sweep = roc_sweep(sim, "kendall", replicates=2, base_seed=11,
                          grid=(0.0, 1.05))
        assert sweep.mean_tpr[0] == 1.0 and sweep.mean_fpr[0] == 1.0
        # gamma > 1: nothing kept
        assert sweep.mean_tpr[-1] == 0.0 and sweep.mean_fpr[-1] == 0.0

    def test_monotone_along_grid(self):
        sim = SimConfig(scenario="B", n=50, p=20, seed=0)
        sweep = roc_sweep(sim, "kendall", replicates=3, base_seed=2,
                          grid=tuple(np.linspace(0, 1, 21)))
        for row in (sweep.mean_tpr, sweep.mean_fpr):
            diffs = np.diff(row)
            assert np.all(diffs <= 1e-15)
        for rep_t, rep_f in zip(sweep.per_replicate_tpr, sweep.per_replicate_fpr):
            assert np.all(np.diff(rep_t) <= 1e-15)
            assert np.all(np.diff(rep_f) <= 1e-15)

    def test_grid_validation(self):
        sim = SimConfig(scenario="C", n=20, p=5, seed=0)
        with pytest.raises(InvalidInputError):
            roc_sweep(sim, "kendall", 1, 0, grid=(0.5, 0.2))
        with pytest.raises(InvalidInputError):
            roc_sweep(sim, "kendall", 1, 0, grid=(-0.1, 0.5))

    def test_default_grid(self):
        grid = default_grid()
        assert len(grid) == 50
        assert grid[0] == 0.0 and grid[-1] == 1.0


class TestAuc:
    def test_perfect_step(self):
        sweep = SweepResult(grid=(0.1, 0.9), mean_tpr=(1.0, 1.0), mean_fpr=(0.0, 0.0),
                            per_replicate_tpr=((1.0, 1.0),), per_replicate_fpr=((0.0, 0.0),))
        assert auc(sweep) == pytest.approx(1.0)

    def test_diagonal(self):
        sweep = SweepResult(grid=(0.2, 0.5, 0.8),
                            mean_tpr=(0.75, 0.5, 0.25), mean_fpr=(0.75, 0.5, 0.25),
                            per_replicate_tpr=(), per_replicate_fpr=())
        assert auc(sweep) == pytest.approx(0.5)

    def test_hand_polyline(self):
        # points (0.2, 0.6), (0.5, 0.9) plus anchors:
        # trapezoids: 0.2*0.3 + 0.3*0.75 + 0.5*0.95 = 0.76
        assert auc_points((0.2, 0.5), (0.6, 0.9)) == pytest.approx(0.76)

    def test_needs_two_points(self):
        sweep = SweepResult(grid=(0.5,), mean_tpr=(0.5,), mean_fpr=(0.5,),
                            per_replicate_tpr=(), per_replicate_fpr=())
        with pytest.raises(InvalidInputError):
            auc(sweep)


class TestWriters:
    def test_experiment_csv(self, tmp_path):
        sim = SimConfig(scenario="C", n=30, p=6, seed=0)
        spec = ExperimentSpec(sim=sim, threshold=ThresholdSpec.fixed(0.4),
                              estimator="kendall", replicates=2, base_seed=0)
        result = run_experiment(spec)
        path = tmp_path / "rows.csv"
        write_experiment_csv(path, experiment_rows(result, 0.4))
        lines = path.read_text().splitlines()
        assert lines[0] == "replicate,q_or_gamma,estimator,scenario,tp,fp,tn,fn,fpr,fnr,edge_count"
        assert len(lines) == 3
        assert lines[1].split(",")[2] == "kendall"

    def test_sweep_csv(self, tmp_path):
        sim = SimConfig(scenario="C", n=30, p=6, seed=0)
        sweep = roc_sweep(sim, "pearson", replicates=1, base_seed=0, grid=(0.1, 0.5))
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path, sweep)
        lines = path.read_text().splitlines()
        assert lines[0] == "gamma,mean_fpr,mean_tpr"
        assert len(lines) == 3
