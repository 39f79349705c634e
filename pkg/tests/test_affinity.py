"""Compound similarity matrix, curvature diagnostics, cut objective."""

import numpy as np
import pytest
from scipy import sparse

from tangentcut.affinity import (
    SimilarityMatrix,
    as_csr,
    curvature_kernel,
    curved_level,
    curved_measure_between,
    distance_kernel,
    objective_score,
    similarity_matrix,
)
from tangentcut.errors import EmptyClusterDenominator
from tangentcut.geometry import PointCloud, build_knn_graph
from tangentcut.tangent import TangentFrame, WeightConfig, estimate_tangent


def line_frames(angles):
    """1-d frames in the plane at the given angles, one per point."""
    out = []
    for i, a in enumerate(angles):
        basis = np.array([[np.cos(a)], [np.sin(a)]])
        out.append(TangentFrame(i, basis, np.array([1.0, 0.0]), 1))
    return out


def chain_cloud_graph(xs):
    """Points along the x-axis; k=1 keeps the hand arithmetic small."""
    data = np.column_stack((np.asarray(xs, dtype=float), np.zeros(len(xs))))
    cloud = PointCloud(data)
    return cloud, build_knn_graph(cloud, k=1, k_sigma=1)


class TestKernels:
    def test_distance_kernel_values(self):
        assert distance_kernel(np.array([0.0]), 1.0, 1.0)[0] == 1.0
        got = distance_kernel(np.array([2.0]), np.array([2.0]), np.array([3.0]))
        assert got[0] == pytest.approx(np.exp(-4.0 / 6.0))

    def test_curvature_kernel_values(self):
        assert curvature_kernel(np.array([0.0]), np.array([1.0]), 1.0, 1.0, 1.0)[0] == 1.0
        got = curvature_kernel(np.array([0.5]), np.array([1.0]), 1.0, 1.0, 1.0)
        assert got[0] == pytest.approx(np.exp(-0.25))

    def test_close_disagreement_penalized_hardest(self):
        theta = np.array([0.8])
        near = curvature_kernel(theta, np.array([0.2]), 1.0, 1.0, 1.0)[0]
        far = curvature_kernel(theta, np.array([2.0]), 1.0, 1.0, 1.0)[0]
        assert near < far

    def test_large_sigma_c_approaches_one(self):
        got = curvature_kernel(np.array([1.5]), np.array([0.5]), 1.0, 1.0, 1e6)
        assert abs(got[0] - 1.0) < 1e-6


class TestSimilarityMatrix:
    def test_two_point_entry_by_hand(self):
        # both bandwidths are 1 (the only neighbor); frames disagree by pi/2
        cloud, graph = chain_cloud_graph([0.0, 1.0])
        frames = line_frames([0.0, np.pi / 2])
        sigma_c = 0.7
        w = similarity_matrix(cloud, graph, frames, sigma_c=sigma_c)
        w1 = np.exp(-1.0)
        w2 = np.exp(-((np.pi / 2) ** 2) / sigma_c**2)
        dense = w.toarray()
        assert dense[0, 1] == pytest.approx(w1 * w2, rel=1e-12)
        assert dense[1, 0] == dense[0, 1]
        assert dense[0, 0] == 0.0

    def test_aligned_frames_reduce_to_distance_kernel(self, flat_patch):
        # a noiseless plane gives identical frames, so theta = 0 on every edge
        cloud, graph = flat_patch
        frames = estimate_tangent(cloud, graph, WeightConfig(), dim=2)
        w = similarity_matrix(cloud, graph, frames, sigma_c=0.05).toarray()
        pairs, dists = graph.edges
        sig = graph.bandwidths
        for (i, j), d in zip(pairs, dists):
            expected = np.exp(-d * d / (sig[i] * sig[j]))
            assert w[i, j] == pytest.approx(expected, rel=1e-9)

    def test_rejects_bad_sigma_c(self, flat_patch):
        cloud, graph = flat_patch
        frames = estimate_tangent(cloud, graph, dim=2)
        with pytest.raises(ValueError):
            similarity_matrix(cloud, graph, frames, sigma_c=0.0)

    def test_rejects_misaligned_frames(self, flat_patch):
        cloud, graph = flat_patch
        frames = estimate_tangent(cloud, graph, dim=2)
        with pytest.raises(ValueError):
            similarity_matrix(cloud, graph, frames[:-1], sigma_c=1.0)
        swapped = frames.copy()
        swapped[0], swapped[1] = swapped[1], swapped[0]
        with pytest.raises(ValueError):
            similarity_matrix(cloud, graph, swapped, sigma_c=1.0)

    def test_from_dense_and_degrees(self):
        dense = np.array([[0.0, 0.5, 0.0], [0.5, 0.0, 0.25], [0.0, 0.25, 0.0]])
        w = SimilarityMatrix.from_dense(dense, sigma_c=2.0)
        assert w.n == 3
        assert w.sigma_c == 2.0
        np.testing.assert_allclose(w.degrees, [0.5, 0.75, 0.25])
        np.testing.assert_allclose(w.toarray(), dense)

    def test_as_csr_accepts_all_forms(self):
        dense = np.array([[0.0, 1.0], [1.0, 0.0]])
        for arg in (dense, sparse.coo_array(dense), SimilarityMatrix.from_dense(dense)):
            mat = as_csr(arg)
            assert isinstance(mat, sparse.csr_array)
            np.testing.assert_allclose(mat.toarray(), dense)


@pytest.mark.property
def test_property_similarity_matrix_wellformed():
    """Symmetric, zero diagonal, values in [0, 1], support on graph edges."""
    rng = np.random.default_rng(77)
    cloud = PointCloud(rng.standard_normal((200, 3)))
    graph = build_knn_graph(cloud, k=8, k_sigma=5)
    frames = estimate_tangent(cloud, graph, WeightConfig(), dim=2)
    w = similarity_matrix(cloud, graph, frames, sigma_c=0.8)
    dense = w.toarray()
    assert (dense == dense.T).all()
    assert (np.diag(dense) == 0.0).all()
    assert dense.min() >= 0.0
    assert dense.max() <= 1.0
    pairs, _ = graph.edges
    support = np.zeros_like(dense, dtype=bool)
    support[pairs[:, 0], pairs[:, 1]] = True
    support |= support.T
    assert not dense[~support].any()


@pytest.mark.property
def test_property_large_sigma_c_degenerates():
    """sigma_c = 1e6 collapses the compound kernel to pure self-tuning (1e-6)."""
    rng = np.random.default_rng(88)
    cloud = PointCloud(rng.standard_normal((150, 3)))
    graph = build_knn_graph(cloud, k=7, k_sigma=4)
    frames = estimate_tangent(cloud, graph, WeightConfig(), dim=2)
    w = similarity_matrix(cloud, graph, frames, sigma_c=1e6).toarray()
    pairs, dists = graph.edges
    sig = graph.bandwidths
    baseline = np.zeros_like(w)
    vals = np.exp(-dists * dists / (sig[pairs[:, 0]] * sig[pairs[:, 1]]))
    baseline[pairs[:, 0], pairs[:, 1]] = vals
    baseline += baseline.T
    assert np.abs(w - baseline).max() < 1e-6


class TestCurvedDiagnostics:
    def test_curved_level_single_neighbor(self):
        cloud, graph = chain_cloud_graph([0.0, 2.0])
        frames = line_frames([0.0, np.pi / 2])
        assert curved_level(0, cloud, graph, frames) == pytest.approx(np.pi / 4)
        assert curved_level(1, cloud, graph, frames) == pytest.approx(np.pi / 4)

    def test_curved_level_zero_on_flat_patch(self, flat_patch):
        # arccos near 1.0 rounds each angle to ~1e-8, divided by a ~0.1 grid
        # spacing and summed over the neighborhood; genuinely curved data
        # sits orders of magnitude above this floor
        cloud, graph = flat_patch
        frames = estimate_tangent(cloud, graph, dim=2)
        assert curved_level(0, cloud, graph, frames) < 1e-5

    def test_curved_measure_intra_counts_edges_once(self):
        cloud, graph = chain_cloud_graph([0.0, 1.0, 2.0, 3.0])
        frames = line_frames([0.0, 0.3, 0.6, 0.9])
        pairs, dists = graph.edges
        whole = curved_measure_between(np.arange(4), np.arange(4), cloud, graph, frames)
        expected = sum(abs(0.3) / d for d in dists)   # every edge differs by 0.3
        assert whole == pytest.approx(expected)

    def test_curved_measure_between_disjoint_sets(self):
        cloud, graph = chain_cloud_graph([0.0, 1.0, 2.0, 3.0])
        frames = line_frames([0.0, 0.3, 0.6, 0.9])
        pairs, dists = graph.edges
        crossing = [tuple(p) for p in pairs.tolist() if (p[0] < 2) != (p[1] < 2)]
        got = curved_measure_between([0, 1], [2, 3], cloud, graph, frames)
        expected = 0.3 * len(crossing)   # unit spacing on the crossing edges
        assert got == pytest.approx(expected)
        assert len(crossing) >= 1

    def test_curved_measure_no_edges_is_zero(self):
        cloud, graph = chain_cloud_graph([0.0, 1.0, 2.0, 3.0])
        frames = line_frames([0.0, 0.0, 0.0, 0.0])
        assert curved_measure_between([0], [3], cloud, graph, frames) == 0.0

    def test_curved_measure_rejects_overlap(self):
        cloud, graph = chain_cloud_graph([0.0, 1.0, 2.0, 3.0])
        frames = line_frames([0.0, 0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            curved_measure_between([0, 1], [1, 2], cloud, graph, frames)


class TestObjectiveScore:
    def test_two_block_value_by_hand(self):
        a, b, c = 0.5, 0.25, 0.1
        w = np.array(
            [
                [0.0, a, c, 0.0],
                [a, 0.0, 0.0, 0.0],
                [c, 0.0, 0.0, b],
                [0.0, 0.0, b, 0.0],
            ]
        )
        labels = np.array([0, 0, 1, 1])
        assert objective_score(labels, w) == pytest.approx(c / a + c / b)

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(4)
        w = rng.uniform(0.1, 1.0, (12, 12))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        labels = np.array([0, 0, 1, 1, 1, 2, 2, 2, 0, 1, 2, 0])
        relabeled = np.array([10, 20, 30])[labels]
        assert objective_score(labels, w) == pytest.approx(objective_score(relabeled, w))

    def test_singleton_cluster_raises(self):
        w = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        with pytest.raises(EmptyClusterDenominator):
            objective_score(np.array([0, 0, 1]), w)

    def test_label_count_mismatch(self):
        w = np.zeros((3, 3))
        with pytest.raises(ValueError):
            objective_score(np.array([0, 1]), w)
