"""Spherical k-means over unit vectors.

Similarity is the cosine, so points and centroids live on the unit
sphere. Assignment takes the most similar centroid, breaking ties in
favor of the lowest cluster id; the update step replaces each centroid
with the normalized mean of its members. Iteration stops when no
assignment changes, or after max_iter rounds.

Seeding follows the k-means++ rule adapted to the sphere: the first
centroid is a uniformly random data point, and each later one is a data
point drawn with probability proportional to its smallest (1 - cos)
against the centroids chosen so far. Every centroid therefore starts as
an actual data point.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError, InsufficientDataError, IntegrityError
from .reduce import model_path, open_npz

DEFAULT_MAX_ITER = 1000

MODEL_KIND = "spherical-kmeans"


@dataclass
class ClusterModel:
    centroids: np.ndarray
    assignments: np.ndarray
    objective_trace: np.ndarray
    iterations_run: int
    converged: bool
    seed: int

    @property
    def n_clusters(self) -> int:
        return self.centroids.shape[0]

    @property
    def objective(self) -> float:
        return float(self.objective_trace[-1])


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    """Project rows onto the unit sphere; zero vectors cannot be placed."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise IntegrityError(f"expected a 2-d array of vectors, got shape {x.shape}")
    norms = np.linalg.norm(x, axis=1)
    zero = norms == 0.0
    if zero.any():
        raise IntegrityError(
            f"{int(zero.sum())} zero-norm vectors cannot be normalized "
            f"(first at row {int(np.where(zero)[0][0])})"
        )
    return x / norms[:, None]


def _argmax_similarity(
    points: np.ndarray, centroids: np.ndarray, chunk: int = 1 << 16
) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    assign = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        sims = points[start:stop] @ centroids.T
        assign[start:stop] = np.argmax(sims, axis=1)
        best[start:stop] = sims.max(axis=1)
    return assign, best


def spkmpp_init(
    points: np.ndarray, n_clusters: int, rng: np.random.Generator
) -> np.ndarray:
    """Pick n_clusters seed centroids from unit-norm points."""
    n, dim = points.shape
    if n_clusters < 1:
        raise ConfigError(f"n_clusters must be at least 1, got {n_clusters}")
    if n < n_clusters:
        raise InsufficientDataError(
            f"cannot seed {n_clusters} clusters from {n} points"
        )
    centroids = np.empty((n_clusters, dim), dtype=np.float64)
    chosen: list[int] = []

    idx = int(rng.integers(n))
    chosen.append(idx)
    centroids[0] = points[idx]
    weights = np.clip(1.0 - points @ points[idx], 0.0, None)

    for j in range(1, n_clusters):
        total = weights.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=weights / total))
        else:
            # Every remaining point coincides with a chosen centroid up to
            # rounding. Only a genuine duplicate surplus is fatal.
            if np.unique(points, axis=0).shape[0] < n_clusters:
                raise InsufficientDataError(
                    f"fewer than {n_clusters} distinct points available"
                )
            pool = np.setdiff1d(np.arange(n), np.asarray(chosen))
            idx = int(pool[rng.integers(len(pool))])
        chosen.append(idx)
        centroids[j] = points[idx]
        np.minimum(weights, np.clip(1.0 - points @ points[idx], 0.0, None), out=weights)
    return centroids


def fit(
    points: np.ndarray,
    n_clusters: int,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    init_centroids: np.ndarray | None = None,
) -> ClusterModel:
    """Cluster points on the sphere; input rows are normalized first.

    The final state is left consistent: stored assignments are the
    argmax against the stored centroids, and each centroid is the
    normalized mean of its members. A cluster that empties out during a
    round is re-seeded at the point with the lowest similarity to its
    current centroid, which keeps the objective trace non-decreasing.
    """
    if max_iter < 1:
        raise ConfigError(f"max_iter must be at least 1, got {max_iter}")
    x = normalize_rows(points)
    n, dim = x.shape
    rng = np.random.default_rng(seed)
    if init_centroids is not None:
        centroids = normalize_rows(init_centroids)
        if centroids.shape != (n_clusters, dim):
            raise ConfigError(
                f"init_centroids shape {centroids.shape} does not match "
                f"({n_clusters}, {dim})"
            )
    else:
        centroids = spkmpp_init(x, n_clusters, rng)

    assignments: np.ndarray | None = None
    trace: list[float] = []
    converged = False
    iterations_run = 0

    for iteration in range(1, max_iter + 1):
        iterations_run = iteration
        new_assign, best = _argmax_similarity(x, centroids)
        trace.append(float(best.sum()))
        if assignments is not None and np.array_equal(new_assign, assignments):
            converged = True
            break
        assignments = new_assign

        counts = np.bincount(assignments, minlength=n_clusters)
        sums = np.empty((n_clusters, dim), dtype=np.float64)
        for j in range(dim):
            sums[:, j] = np.bincount(assignments, weights=x[:, j], minlength=n_clusters)

        empty = np.where(counts == 0)[0]
        if len(empty) > 0:
            order = np.argsort(best, kind="stable")
            cursor = 0
            for k in empty:
                while cursor < n:
                    i = int(order[cursor])
                    cursor += 1
                    donor = assignments[i]
                    if counts[donor] > 1:
                        break
                else:
                    raise IntegrityError("ran out of points while repairing empty clusters")
                sums[donor] -= x[i]
                counts[donor] -= 1
                assignments[i] = k
                sums[k] = x[i]
                counts[k] = 1

        norms = np.linalg.norm(sums, axis=1)
        degenerate = np.where(norms == 0.0)[0]
        if len(degenerate) > 0:
            # Members cancel exactly; keep the previous direction.
            sums[degenerate] = centroids[degenerate]
            norms[degenerate] = np.linalg.norm(sums[degenerate], axis=1)
        centroids = sums / norms[:, None]

    assert assignments is not None
    return ClusterModel(
        centroids=centroids,
        assignments=assignments.astype(np.int64),
        objective_trace=np.asarray(trace, dtype=np.float64),
        iterations_run=iterations_run,
        converged=converged,
        seed=seed,
    )


def assign(model: ClusterModel, vectors: np.ndarray) -> np.ndarray:
    """Map vectors to their most similar centroid (lowest id on ties)."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    x = normalize_rows(arr)
    if x.shape[1] != model.centroids.shape[1]:
        raise IntegrityError(
            f"vectors have {x.shape[1]} dimensions, model expects "
            f"{model.centroids.shape[1]}"
        )
    ids, _ = _argmax_similarity(x, model.centroids)
    return ids


def save_cluster_model(path: str | Path, model: ClusterModel) -> Path:
    path = model_path(path)
    np.savez(
        path,
        kind=np.array(MODEL_KIND),
        centroids=model.centroids,
        assignments=model.assignments,
        objective_trace=model.objective_trace,
        iterations_run=np.array(model.iterations_run, dtype=np.int64),
        converged=np.array(model.converged),
        seed=np.array(model.seed, dtype=np.int64),
    )
    return path


def load_cluster_model(path: str | Path) -> ClusterModel:
    with open_npz(path) as npz:
        if "kind" not in npz.files or str(npz["kind"]) != MODEL_KIND:
            raise FormatError(f"{path}: not a spherical k-means model file")
        return ClusterModel(
            centroids=npz["centroids"],
            assignments=npz["assignments"],
            objective_trace=npz["objective_trace"],
            iterations_run=int(npz["iterations_run"]),
            converged=bool(npz["converged"]),
            seed=int(npz["seed"]),
        )
