"""Dimensionality reduction for token vectors.

Two interchangeable reducers:

* incremental PCA, fit over fixed-size row batches so the full matrix
  never has to be resident;
* a very sparse random projection with density 1/s for s = sqrt(d),
  which needs no fitting pass at all.

Random projection rows are generated with one uniform draw per cell:
u < 1/(2s) codes a negative entry, u < 1/s a positive one. Projected
vectors are not mean-centered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import scipy.sparse as sp
from sklearn.decomposition import IncrementalPCA

from .errors import ConfigError, FormatError, InsufficientDataError, IntegrityError

DEFAULT_TARGET_DIM = 100


@dataclass
class ReductionConfig:
    target_dim: int = DEFAULT_TARGET_DIM
    batch_size: int | None = None  # None picks 5 * input dim at fit time

    def __post_init__(self) -> None:
        if self.target_dim < 1:
            raise ConfigError(f"target_dim must be at least 1, got {self.target_dim}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]

    @property
    def output_dim(self) -> int:
        return self.components.shape[0]

    def transform(self, vectors: np.ndarray) -> np.ndarray:
        vectors = _check_width(vectors, self.input_dim)
        return (vectors - self.mean) @ self.components.T


@dataclass
class SrpModel:
    projection: sp.csr_matrix
    density_param: float
    seed: int

    @property
    def input_dim(self) -> int:
        return self.projection.shape[1]

    @property
    def output_dim(self) -> int:
        return self.projection.shape[0]

    def transform(self, vectors: np.ndarray) -> np.ndarray:
        vectors = _check_width(vectors, self.input_dim)
        return np.asarray((self.projection @ vectors.T).T)


ReductionModel = Union[PcaModel, SrpModel]


def _check_width(vectors: np.ndarray, dim: int) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    if vectors.shape[1] != dim:
        raise IntegrityError(
            f"vectors have {vectors.shape[1]} dimensions, model expects {dim}"
        )
    return vectors


def _as_batches(data: np.ndarray | Iterable[np.ndarray]) -> Iterable[np.ndarray]:
    if isinstance(data, np.ndarray):
        return [data]
    return data


def fit_incremental_pca(
    data: np.ndarray | Iterable[np.ndarray], config: ReductionConfig
) -> PcaModel:
    """Fit PCA over row batches.

    Batches are cut to config.batch_size rows; a trailing batch shorter
    than target_dim is merged into the one before it, since the updater
    cannot absorb a batch narrower than the component count.
    """
    k = config.target_dim
    ipca: IncrementalPCA | None = None
    batch_size: int | None = config.batch_size
    pending: list[np.ndarray] = []
    pending_rows = 0
    held: np.ndarray | None = None
    input_dim: int | None = None
    total = 0

    def feed(block: np.ndarray) -> None:
        assert ipca is not None
        ipca.partial_fit(block)

    for raw in _as_batches(data):
        block = np.asarray(raw, dtype=np.float64)
        if block.ndim == 1:
            block = block[None, :]
        if block.shape[0] == 0:
            continue
        if input_dim is None:
            input_dim = block.shape[1]
            if not (1 <= k < input_dim):
                raise ConfigError(
                    f"target_dim must satisfy 1 <= k < {input_dim}, got {k}"
                )
            if batch_size is None:
                batch_size = 5 * input_dim
            if batch_size < k:
                raise ConfigError(
                    f"batch_size {batch_size} is smaller than target_dim {k}"
                )
            ipca = IncrementalPCA(n_components=k, batch_size=batch_size)
        elif block.shape[1] != input_dim:
            raise IntegrityError(
                f"batch has {block.shape[1]} dimensions, stream started with {input_dim}"
            )
        pending.append(block)
        pending_rows += block.shape[0]
        total += block.shape[0]
        while pending_rows >= batch_size:
            flat = np.concatenate(pending) if len(pending) > 1 else pending[0]
            cut, rest = flat[:batch_size], flat[batch_size:]
            pending = [rest] if rest.shape[0] else []
            pending_rows = rest.shape[0]
            if held is not None:
                feed(held)
            held = cut

    if total < k:
        raise InsufficientDataError(
            f"need at least {k} vectors to fit {k} components, got {total}"
        )
    tail = np.concatenate(pending) if pending else np.zeros((0, input_dim))
    if held is None:
        feed(tail)
    elif tail.shape[0] >= k:
        feed(held)
        feed(tail)
    else:
        feed(np.concatenate([held, tail]) if tail.shape[0] else held)

    assert ipca is not None
    return PcaModel(
        mean=ipca.mean_.copy(),
        components=ipca.components_.copy(),
        explained_variance=ipca.explained_variance_.copy(),
    )


def fit_srp(
    input_dim: int, config: ReductionConfig, seed: int, s: float | None = None
) -> SrpModel:
    """Draw a k x d very sparse projection matrix from the given seed.

    The density parameter defaults to s = sqrt(d); s = 1 degenerates to
    a dense sign matrix.
    """
    k = config.target_dim
    if not (1 <= k < input_dim):
        raise ConfigError(f"target_dim must satisfy 1 <= k < {input_dim}, got {k}")
    if s is None:
        s = math.sqrt(input_dim)
    if s < 1.0:
        raise ConfigError(f"density parameter s must be at least 1, got {s}")
    scale = math.sqrt(s / k)
    rng = np.random.default_rng(seed)

    rows_per_chunk = max(1, (1 << 22) // max(input_dim, 1))
    blocks = []
    nnz = 0
    for start in range(0, k, rows_per_chunk):
        rows = min(rows_per_chunk, k - start)
        u = rng.random((rows, input_dim))
        values = np.zeros((rows, input_dim))
        values[u < 1.0 / s] = scale
        values[u < 1.0 / (2.0 * s)] = -scale
        block = sp.csr_matrix(values)
        nnz += block.nnz
        blocks.append(block)
    projection = sp.vstack(blocks, format="csr") if len(blocks) > 1 else blocks[0]

    # Tripwire against a miswired RNG: total fill is Binomial(k*d, 1/s).
    n_cells = k * input_dim
    p = 1.0 / s
    sigma = math.sqrt(n_cells * p * (1.0 - p))
    if abs(nnz - n_cells * p) > 6.0 * sigma:
        raise IntegrityError(
            f"projection fill {nnz} is implausible for density 1/{s:.3f} "
            f"over {n_cells} cells"
        )
    return SrpModel(projection=projection, density_param=s, seed=seed)


def transform(model: ReductionModel, vectors: np.ndarray) -> np.ndarray:
    return model.transform(vectors)


def model_path(path: str | Path) -> Path:
    """np.savez appends .npz itself; normalize so callers see the real name."""
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(path.suffix + ".npz")
    return path


def open_npz(path: str | Path):
    """np.load with zip/format failures mapped onto the error taxonomy."""
    import zipfile

    try:
        return np.load(path, allow_pickle=False)
    except (zipfile.BadZipFile, ValueError) as exc:
        raise FormatError(f"{path}: not a readable model file ({exc})") from exc


def save_reduction(path: str | Path, model: ReductionModel) -> Path:
    path = model_path(path)
    if isinstance(model, PcaModel):
        np.savez(
            path,
            method=np.array("pca"),
            mean=model.mean,
            components=model.components,
            explained_variance=model.explained_variance,
        )
    elif isinstance(model, SrpModel):
        proj = model.projection
        np.savez(
            path,
            method=np.array("srp"),
            data=proj.data,
            indices=proj.indices,
            indptr=proj.indptr,
            shape=np.array(proj.shape, dtype=np.int64),
            density_param=np.array(model.density_param),
            seed=np.array(model.seed, dtype=np.int64),
        )
    else:
        raise ConfigError(f"unknown reduction model type {type(model).__name__}")
    return path


def load_reduction(path: str | Path) -> ReductionModel:
    with open_npz(path) as npz:
        names = set(npz.files)
        if "method" not in names:
            raise FormatError(f"{path}: not a reduction model file")
        method = str(npz["method"])
        if method == "pca":
            return PcaModel(
                mean=npz["mean"],
                components=npz["components"],
                explained_variance=npz["explained_variance"],
            )
        if method == "srp":
            shape = tuple(npz["shape"])
            projection = sp.csr_matrix(
                (npz["data"], npz["indices"], npz["indptr"]), shape=shape
            )
            return SrpModel(
                projection=projection,
                density_param=float(npz["density_param"]),
                seed=int(npz["seed"]),
            )
        raise FormatError(f"{path}: unknown reduction method {method!r}")


def pairwise_distortion(original: np.ndarray, projected: np.ndarray) -> float:
    """Largest relative change in pairwise squared distance, for spot checks."""
    if original.shape[0] != projected.shape[0]:
        raise IntegrityError("row counts differ between original and projected data")
    worst = 0.0
    n = original.shape[0]
    for i in range(n):
        d_orig = np.sum((original[i + 1 :] - original[i]) ** 2, axis=1)
        d_proj = np.sum((projected[i + 1 :] - projected[i]) ** 2, axis=1)
        ok = d_orig > 0
        if ok.any():
            worst = max(worst, float(np.abs(d_proj[ok] / d_orig[ok] - 1.0).max()))
    return worst
