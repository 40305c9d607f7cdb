"""Collapsed Gibbs sampler for latent Dirichlet allocation.

Baseline model over the same token stream the cluster pipeline uses;
vectors are ignored, only (doc, type) pairs matter. One sweep visits
every token in file order, removes its current label from the count
tables, samples a new label from

    p(z = k) proportional to (n_dk + alpha) (n_kw + beta) / (n_k + V beta)

and adds it back. V is the number of distinct types actually present.
The smoothing defaults are alpha = 5 / n_topics and beta = 0.01, with
1000 sweeps.

Per-sweep uniform draws are generated up front from one seeded
generator, so the compiled and pure-Python sweep implementations walk
identical random sequences and can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError, InsufficientDataError, IntegrityError
from .reduce import model_path, open_npz

DEFAULT_BETA = 0.01
DEFAULT_SWEEPS = 1000

MODEL_KIND = "lda-gibbs"


@dataclass
class LdaState:
    assignments: np.ndarray      # per-token topic label
    doc_ids: np.ndarray          # sorted distinct doc ids; row order of n_dk
    n_dk: np.ndarray             # doc x topic counts
    n_kw: np.ndarray             # topic x type counts
    n_k: np.ndarray              # topic totals
    alpha: float
    beta: float
    smoothing_vocab: int         # V in the conditional's denominator
    seed: int
    iterations_run: int

    @property
    def n_topics(self) -> int:
        return self.n_kw.shape[0]


def _sweep(z, d, w, n_dk, n_kw, n_k, alpha, beta, vocab_size, u):
    n_topics = n_k.shape[0]
    vbeta = vocab_size * beta
    scratch = np.empty(n_topics, dtype=np.float64)
    for i in range(z.shape[0]):
        k_old = z[i]
        di = d[i]
        wi = w[i]
        n_dk[di, k_old] -= 1
        n_kw[k_old, wi] -= 1
        n_k[k_old] -= 1
        total = 0.0
        for k in range(n_topics):
            p = (n_dk[di, k] + alpha) * (n_kw[k, wi] + beta) / (n_k[k] + vbeta)
            scratch[k] = p
            total += p
        r = u[i] * total
        acc = 0.0
        k_new = n_topics - 1
        for k in range(n_topics):
            acc += scratch[k]
            if acc > r:
                k_new = k
                break
        z[i] = k_new
        n_dk[di, k_new] += 1
        n_kw[k_new, wi] += 1
        n_k[k_new] += 1


_compiled_sweep = None


def _numba_sweep():
    # Compiled lazily so importing the package does not pay for numba.
    global _compiled_sweep
    if _compiled_sweep is None:
        from numba import njit

        _compiled_sweep = njit(cache=True)(_sweep)
    return _compiled_sweep


def gibbs_fit(
    doc_ids: np.ndarray,
    type_ids: np.ndarray,
    n_topics: int,
    alpha: float | None = None,
    beta: float = DEFAULT_BETA,
    iterations: int = DEFAULT_SWEEPS,
    seed: int = 0,
    engine: str = "numba",
) -> LdaState:
    """Run collapsed Gibbs sampling over (doc, type) pairs.

    engine="python" uses the uncompiled sweep; both engines draw the
    same uniforms and must produce the same labels.
    """
    if n_topics < 1:
        raise ConfigError(f"n_topics must be at least 1, got {n_topics}")
    if iterations < 0:
        raise ConfigError(f"iterations must be non-negative, got {iterations}")
    if engine not in ("numba", "python"):
        raise ConfigError(f"engine must be 'numba' or 'python', got {engine!r}")
    doc_ids = np.asarray(doc_ids, dtype=np.int64)
    type_ids = np.asarray(type_ids, dtype=np.int64)
    n = len(doc_ids)
    if n == 0:
        raise InsufficientDataError("cannot fit a topic model on zero tokens")
    if len(type_ids) != n:
        raise IntegrityError(
            f"{len(type_ids)} type ids for {n} doc ids"
        )
    if type_ids.min() < 0:
        raise IntegrityError(f"negative type_id {int(type_ids.min())}")
    if alpha is None:
        alpha = 5.0 / n_topics
    if alpha <= 0 or beta <= 0:
        raise ConfigError(f"alpha and beta must be positive, got {alpha}, {beta}")

    docs_unique = np.unique(doc_ids)
    d_index = np.searchsorted(docs_unique, doc_ids)
    width = int(type_ids.max()) + 1
    vocab_size = int(len(np.unique(type_ids)))

    rng = np.random.default_rng(seed)
    z = rng.integers(0, n_topics, size=n).astype(np.int64)
    n_dk = np.zeros((len(docs_unique), n_topics), dtype=np.int64)
    n_kw = np.zeros((n_topics, width), dtype=np.int64)
    n_k = np.zeros(n_topics, dtype=np.int64)
    np.add.at(n_dk, (d_index, z), 1)
    np.add.at(n_kw, (z, type_ids), 1)
    np.add.at(n_k, z, 1)

    sweep = _numba_sweep() if engine == "numba" else _sweep
    for _ in range(iterations):
        u = rng.random(n)
        sweep(z, d_index, type_ids, n_dk, n_kw, n_k, alpha, beta, vocab_size, u)

    return LdaState(
        assignments=z,
        doc_ids=docs_unique,
        n_dk=n_dk,
        n_kw=n_kw,
        n_k=n_k,
        alpha=float(alpha),
        beta=float(beta),
        smoothing_vocab=vocab_size,
        seed=seed,
        iterations_run=iterations,
    )


def recount(state: LdaState, doc_ids: np.ndarray, type_ids: np.ndarray) -> None:
    """Verify the count tables against the labels; raises on any drift."""
    d_index = np.searchsorted(state.doc_ids, np.asarray(doc_ids, dtype=np.int64))
    n_dk = np.zeros_like(state.n_dk)
    n_kw = np.zeros_like(state.n_kw)
    n_k = np.zeros_like(state.n_k)
    np.add.at(n_dk, (d_index, state.assignments), 1)
    np.add.at(n_kw, (state.assignments, np.asarray(type_ids, dtype=np.int64)), 1)
    np.add.at(n_k, state.assignments, 1)
    for name, got, want in (
        ("doc-topic", state.n_dk, n_dk),
        ("topic-word", state.n_kw, n_kw),
        ("topic totals", state.n_k, n_k),
    ):
        if not np.array_equal(got, want):
            raise IntegrityError(f"{name} counts disagree with the labels")


def save_lda_model(path: str | Path, state: LdaState) -> Path:
    path = model_path(path)
    np.savez(
        path,
        kind=np.array(MODEL_KIND),
        assignments=state.assignments,
        doc_ids=state.doc_ids,
        doc_topic_counts=state.n_dk,
        topic_word_counts=state.n_kw,
        topic_totals=state.n_k,
        alpha=np.array(state.alpha),
        beta=np.array(state.beta),
        smoothing_vocab=np.array(state.smoothing_vocab, dtype=np.int64),
        seed=np.array(state.seed, dtype=np.int64),
        iterations_run=np.array(state.iterations_run, dtype=np.int64),
    )
    return path


def load_lda_model(path: str | Path) -> LdaState:
    with open_npz(path) as npz:
        if "kind" not in npz.files or str(npz["kind"]) != MODEL_KIND:
            raise FormatError(f"{path}: not a Gibbs sampler model file")
        return LdaState(
            assignments=npz["assignments"],
            doc_ids=npz["doc_ids"],
            n_dk=npz["doc_topic_counts"],
            n_kw=npz["topic_word_counts"],
            n_k=npz["topic_totals"],
            alpha=float(npz["alpha"]),
            beta=float(npz["beta"]),
            smoothing_vocab=int(npz["smoothing_vocab"]),
            seed=int(npz["seed"]),
            iterations_run=int(npz["iterations_run"]),
        )
