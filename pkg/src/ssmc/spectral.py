"""Spectral clustering of the affinity matrix, NJW style.

Embeds the samples with the top eigenvectors of the symmetrically
normalized affinity, row-normalizes the embedding, and clusters rows by
k-means.  The affinity already encodes sparsity-based similarity, so no
kernel re-weighting is applied.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = ["ClusterLabels", "kmeans", "spectral_cluster"]

KMEANS_RESTARTS = 20
KMEANS_MAX_ITERS = 300


@dataclass
class ClusterLabels:
    """A length-``n`` assignment of samples to clusters ``0 .. k-1``."""

    labels: np.ndarray
    k: int
    warnings: tuple = ()

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ValueError(f"labels must be one-dimensional, got {self.labels.shape}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValueError(f"labels out of range [0, {self.k})")


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[int(rng.integers(n))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining points coincide with chosen centers; duplicates
            # are permitted
            idx = int(np.argmax(d2))
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def kmeans(points, k, seed, use_numba=None):
    """k-means with seeded k-means++ starts.

    Runs 20 restarts of at most 300 Lloyd iterations each and keeps the
    lowest final inertia; restart ``r`` draws from
    ``default_rng([seed, r])``, and inertia ties keep the lowest restart
    index, so the result is independent of restart execution order.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be a 2-d array, got shape {points.shape}")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    best_labels = None
    best_inertia = np.inf
    for r in range(KMEANS_RESTARTS):
        rng = np.random.default_rng([seed, r])
        c0 = _kmeanspp_init(points, k, rng)
        labels, _, hist, _ = kernels.lloyd(points, c0, KMEANS_MAX_ITERS, use_numba=use_numba)
        if hist[-1] < best_inertia:
            best_inertia = float(hist[-1])
            best_labels = labels
    return ClusterLabels(labels=best_labels, k=k)


def _validate_affinity(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"affinity must be square, got shape {m.shape}")
    scale = 1.0 + float(np.abs(m).max(initial=0.0))
    if float(np.abs(m - m.T).max(initial=0.0)) > 1e-10 * scale:
        raise ValueError("affinity must be symmetric")
    if m.min(initial=0.0) < 0:
        raise ValueError("affinity must be nonnegative")
    if float(np.abs(np.diag(m)).max(initial=0.0)) > 1e-10 * scale:
        raise ValueError("affinity must have a zero diagonal")
    return (m + m.T) / 2.0


def spectral_cluster(m, k, seed, use_numba=None):
    """Cluster the samples of a symmetric nonnegative affinity into ``k`` groups.

    Steps: normalize ``m`` by degrees as ``D**-0.5 m D**-0.5``, take the
    ``k`` eigenvectors of largest eigenvalue (cyclic Jacobi eigensolver),
    row-normalize the embedding (zero rows stay zero), k-means the rows.
    A zero-degree sample has its degree replaced by 1 and adds a warning to
    the result metadata.  Deterministic given ``(m, k, seed)``.
    """
    m = _validate_affinity(m)
    n = m.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    warnings = ()
    deg = m.sum(axis=1)
    isolated = deg == 0
    if isolated.any():
        deg = np.where(isolated, 1.0, deg)
        idx = ", ".join(str(i) for i in np.flatnonzero(isolated))
        warnings = (f"isolated vertices (zero degree) at indices {idx}; degree set to 1",)
    inv_root = 1.0 / np.sqrt(deg)
    sym = inv_root[:, None] * m * inv_root[None, :]
    _, vecs = kernels.jacobi_eigh(sym, use_numba=use_numba)
    embedding = vecs[:, n - k :]
    row_norms = np.linalg.norm(embedding, axis=1)
    safe = np.where(row_norms > 0, row_norms, 1.0)
    embedding = embedding / safe[:, None]
    result = kmeans(embedding, k, seed, use_numba=use_numba)
    return ClusterLabels(labels=result.labels, k=k, warnings=warnings)
