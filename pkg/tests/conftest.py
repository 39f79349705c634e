import numpy as np
import pytest

from tangentcut.geometry import PointCloud, build_knn_graph


def random_orthonormal(rng: np.random.Generator, ambient: int, d: int) -> np.ndarray:
    """Column-orthonormal (ambient, d) basis from a QR factorization."""
    q, r = np.linalg.qr(rng.standard_normal((ambient, d)))
    # fix the QR sign ambiguity so the basis is a deterministic function of rng
    return q * np.sign(np.diag(r))[None, :]


@pytest.fixture(scope="session")
def flat_patch():
    """Noiseless grid on the z = 0 plane plus its kNN graph."""
    xs = np.linspace(0.0, 1.0, 12)
    gx, gy = np.meshgrid(xs, xs)
    data = np.column_stack((gx.ravel(), gy.ravel(), np.zeros(gx.size)))
    cloud = PointCloud(data)
    graph = build_knn_graph(cloud, k=8, k_sigma=4)
    return cloud, graph
