"""Tests for thresholding, edge sets, and connected components."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtri

from tauscreen import (
    CorrMatrix,
    EdgeSet,
    InvalidInputError,
    JackknifeVarMatrix,
    MissingInputError,
    Partition,
    ThresholdSpec,
    compare_partitions,
    connected_components,
    screen_edges,
    screen_neighborhood,
    threshold_matrix,
)
from tauscreen.screening import (
    read_edges_tsv,
    read_partition_tsv,
    write_edges_tsv,
    write_partition_tsv,
)


def corr_from_offdiag(p, pairs, kind="kendall-sine"):
    m = np.eye(p)
    for (j, k), v in pairs.items():
        m[j, k] = m[k, j] = v
    return CorrMatrix(m, kind)


class TestThresholdSpec:
    def test_mode_validation(self):
        with pytest.raises(InvalidInputError):
            ThresholdSpec.fixed(-0.1)
        with pytest.raises(InvalidInputError):
            ThresholdSpec.rate(0.0, 0.25)
        with pytest.raises(InvalidInputError):
            ThresholdSpec.rate(1.0, 0.5)
        with pytest.raises(InvalidInputError):
            ThresholdSpec.fpr()
        with pytest.raises(InvalidInputError):
            ThresholdSpec.fpr(f=1.0, q=0.1)
        with pytest.raises(InvalidInputError):
            ThresholdSpec.fpr(q=1.5)

    def test_resolve_f_from_q(self):
        spec = ThresholdSpec.fpr(q=0.2)
        assert spec.resolve_f(5) == pytest.approx(0.2 * 10)


class TestThresholdMatrix:
    def test_rate_hand_value(self):
        # (2/3) * 0.6 * 16^(-1/4) = 0.4 / 2 = 0.2
        t = threshold_matrix(ThresholdSpec.rate(0.6, 0.25), n=16, p=3)
        off = t[~np.eye(3, dtype=bool)]
        assert np.allclose(off, 0.2, atol=1e-15)

    def test_fixed(self):
        t = threshold_matrix(ThresholdSpec.fixed(0.5), n=10, p=4)
        assert np.all(t[~np.eye(4, dtype=bool)] == 0.5)

    def test_fpr_hand_value(self):
        # unit variance estimate, n=100, f/(p(p-1)) = 0.025:
        # gamma = (pi/2) * PhiInv(0.975) / 10 ~= 0.30787
        jack = JackknifeVarMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        t = threshold_matrix(ThresholdSpec.fpr(f=0.05), n=100, p=2, jack=jack)
        assert t[0, 1] == pytest.approx(0.30787, abs=5e-5)
        assert t[0, 1] == pytest.approx(np.pi / 2 * ndtri(0.975) / 10.0, abs=1e-12)

    def test_fpr_requires_jack(self):
        with pytest.raises(MissingInputError):
            threshold_matrix(ThresholdSpec.fpr(q=0.1), n=100, p=3)

    def test_fpr_budget_too_large(self):
        jack = JackknifeVarMatrix(np.zeros((2, 2)))
        with pytest.raises(InvalidInputError):
            threshold_matrix(ThresholdSpec.fpr(f=1.0), n=100, p=2, jack=jack)

    def test_degenerate_pair_warns_and_gets_zero_threshold(self):
        jack = JackknifeVarMatrix(np.array([[0.0, 0.0], [0.0, 0.0]]))
        with pytest.warns(UserWarning):
            t = threshold_matrix(ThresholdSpec.fpr(f=0.5), n=100, p=2, jack=jack)
        assert t[0, 1] == 0.0


class TestScreening:
    def test_thresholds_above_one_give_empty(self):
        corr = corr_from_offdiag(3, {(0, 1): 0.9, (0, 2): -1.0})
        edges = screen_edges(corr, np.full((3, 3), 1.1))
        assert edges.edges == ()

    def test_zero_threshold_gives_complete_graph(self):
        corr = corr_from_offdiag(3, {(0, 1): 0.2, (0, 2): -0.4, (1, 2): 0.1})
        edges = screen_edges(corr, np.zeros((3, 3)))
        assert edges.edges == ((0, 1), (0, 2), (1, 2))

    def test_selective(self):
        corr = corr_from_offdiag(3, {(0, 1): 0.6, (0, 2): 0.2, (1, 2): -0.7})
        edges = screen_edges(corr, np.full((3, 3), 0.5))
        assert edges.edges == ((0, 1), (1, 2))
        assert screen_neighborhood(corr, np.full((3, 3), 0.5), 1) == {0, 2}

    def test_strict_inequality_at_threshold(self):
        corr = corr_from_offdiag(2, {(0, 1): 0.5})
        assert screen_edges(corr, np.full((2, 2), 0.5)).edges == ()

    def test_raw_kind_rejected(self):
        corr = corr_from_offdiag(2, {(0, 1): 0.5}, kind="kendall-raw")
        with pytest.raises(InvalidInputError):
            screen_edges(corr, np.zeros((2, 2)))

    def test_dimension_mismatch(self):
        corr = corr_from_offdiag(3, {})
        with pytest.raises(InvalidInputError):
            screen_edges(corr, np.zeros((2, 2)))

    def test_neighborhood_excludes_self_and_is_empty_when_isolated(self):
        corr = corr_from_offdiag(3, {(0, 1): 0.9})
        t = np.full((3, 3), 0.95)
        assert screen_neighborhood(corr, t, 0) == set()
        with pytest.raises(InvalidInputError):
            screen_neighborhood(corr, t, 7)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(st.integers(min_value=2, max_value=8), st.randoms(use_true_random=False))
    def test_monotonicity_and_consistency(self, p, rnd):
        vals = {}
        for j in range(p):
            for k in range(j + 1, p):
                vals[(j, k)] = rnd.uniform(-1, 1)
        corr = corr_from_offdiag(p, vals)
        lo = rnd.uniform(0, 0.6)
        hi = lo + rnd.uniform(0, 0.4)
        e_lo = screen_edges(corr, np.full((p, p), lo))
        e_hi = screen_edges(corr, np.full((p, p), hi))
        # raising thresholds can only drop edges
        assert e_hi.as_set() <= e_lo.as_set()
        # neighborhoods agree with the edge set
        for j in range(p):
            nbrs = screen_neighborhood(corr, np.full((p, p), lo), j)
            expect = e_lo.neighbors(j)
            assert nbrs == expect
        # screening is sign-blind
        flipped = {jk: -v for jk, v in vals.items()}
        e_flip = screen_edges(corr_from_offdiag(p, flipped), np.full((p, p), lo))
        assert e_flip.as_set() == e_lo.as_set()


class TestComponents:
    def test_empty_edges(self):
        part = connected_components(EdgeSet(4, ()))
        assert part.component_id == (1, 2, 3, 4)

    def test_chain(self):
        part = connected_components(EdgeSet(4, ((0, 1), (1, 2))))
        assert part.component_id == (1, 1, 1, 2)

    def test_complete(self):
        edges = tuple((j, k) for j in range(5) for k in range(j + 1, 5))
        part = connected_components(EdgeSet(5, edges))
        assert part.n_components == 1

    def test_compare_partitions(self):
        a = Partition(3, (1, 1, 2))
        relabeled = Partition(3, (2, 2, 1))
        assert compare_partitions(a, a)
        assert compare_partitions(a, relabeled)
        assert not compare_partitions(Partition(3, (1, 1, 2)), Partition(3, (1, 2, 2)))
        with pytest.raises(InvalidInputError):
            compare_partitions(a, Partition(2, (1, 2)))

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=12))
    def test_relabeling_invariance(self, labels):
        # canonicalize: remap to first-appearance order to build a Partition
        remap = {}
        canon = []
        for l in labels:
            if l not in remap:
                remap[l] = len(remap) + 1
            canon.append(remap[l])
        a = Partition(len(canon), tuple(canon))
        # arbitrary relabeling preserved under comparison
        perm = {l: len(remap) + 1 - l for l in set(canon)}
        relabeled = [perm[l] for l in canon]
        remap2 = {}
        canon2 = []
        for l in relabeled:
            if l not in remap2:
                remap2[l] = len(remap2) + 1
            canon2.append(remap2[l])
        b = Partition(len(canon2), tuple(canon2))
        assert compare_partitions(a, b)


class TestEdgeSetType:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            EdgeSet(3, ((0, 0),))
        with pytest.raises(InvalidInputError):
            EdgeSet(3, ((2, 1),))
        with pytest.raises(InvalidInputError):
            EdgeSet(3, ((0, 3),))
        with pytest.raises(InvalidInputError):
            EdgeSet(3, ((0, 1), (0, 1)))

    def test_sorted_storage(self):
        e = EdgeSet(4, ((2, 3), (0, 1)))
        assert e.edges == ((0, 1), (2, 3))


class TestSerialization:
    def test_edges_roundtrip(self, tmp_path):
        corr = corr_from_offdiag(3, {(0, 1): 0.6, (1, 2): -0.7})
        edges = screen_edges(corr, np.full((3, 3), 0.5))
        path = tmp_path / "edges.tsv"
        write_edges_tsv(path, edges, corr)
        back, values = read_edges_tsv(path, p=3)
        assert back.as_set() == edges.as_set()
        assert values[(0, 1)] == 0.6
        assert values[(1, 2)] == -0.7
        header = path.read_text().splitlines()[0]
        assert header == "j\tj'\tvalue"

    def test_partition_roundtrip(self, tmp_path):
        part = connected_components(EdgeSet(4, ((0, 1), (1, 2))))
        path = tmp_path / "part.tsv"
        write_partition_tsv(path, part)
        assert read_partition_tsv(path).component_id == part.component_id
        assert path.read_text().splitlines()[0] == "node\tcomponent"
