"""Topic summaries over a token-to-cluster assignment.

A topic is the multiset of word types assigned to one cluster. The
summary keeps raw counts, the normalized word distribution, and the
top-n list ordered by count with ties broken toward the lower type id.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import TokenTable, Vocabulary
from .reduce import open_npz
from .errors import ConfigError, FormatError, IntegrityError

DEFAULT_TOP_N = 20


@dataclass
class TopicSummary:
    topic_id: int
    total_tokens: int
    word_counts: dict[int, int]
    word_dist: dict[int, float]
    top_words: list[tuple[int, int]]

    @property
    def is_empty(self) -> bool:
        return self.total_tokens == 0


@dataclass
class DocTopicRow:
    doc_id: int
    proportions: np.ndarray


def _topic_type_counts(
    assignments: np.ndarray, type_ids: np.ndarray, n_topics: int, n_types: int
) -> sp.csr_matrix:
    ones = np.ones(len(assignments), dtype=np.int64)
    counts = sp.coo_matrix(
        (ones, (assignments, type_ids)), shape=(n_topics, n_types)
    )
    return counts.tocsr()


def summarize(
    assignments: np.ndarray,
    table: TokenTable,
    vocab: Vocabulary,
    n_topics: int,
    top_n: int = DEFAULT_TOP_N,
) -> list[TopicSummary]:
    """Build one summary per topic id in [0, n_topics)."""
    if top_n < 1:
        raise ConfigError(f"top_n must be at least 1, got {top_n}")
    if len(assignments) != len(table):
        raise IntegrityError(
            f"{len(assignments)} assignments for {len(table)} tokens"
        )
    if len(assignments) > 0:
        amax = int(assignments.max())
        if assignments.min() < 0 or amax >= n_topics:
            raise IntegrityError(
                f"assignment id {amax if amax >= n_topics else int(assignments.min())} "
                f"outside [0, {n_topics})"
            )
        if table.type_ids.max() >= len(vocab):
            raise IntegrityError(
                f"type_id {int(table.type_ids.max())} out of range for "
                f"vocabulary of {len(vocab)}"
            )
    counts = _topic_type_counts(assignments, table.type_ids, n_topics, len(vocab))
    summaries = []
    for k in range(n_topics):
        row = counts.getrow(k)
        total = int(row.sum())
        pairs = sorted(
            zip(row.indices.tolist(), row.data.tolist()),
            key=lambda item: (-item[1], item[0]),
        )
        word_counts = {t: int(c) for t, c in pairs}
        word_dist = (
            {t: c / total for t, c in word_counts.items()} if total else {}
        )
        summaries.append(
            TopicSummary(
                topic_id=k,
                total_tokens=total,
                word_counts=word_counts,
                word_dist=word_dist,
                top_words=[(t, int(c)) for t, c in pairs[:top_n]],
            )
        )
    return summaries


def doc_topic_matrix(
    assignments: np.ndarray, table: TokenTable, n_topics: int
) -> list[DocTopicRow]:
    """Per-document topic proportions; rows sum to 1 and follow doc id order."""
    if len(assignments) != len(table):
        raise IntegrityError(
            f"{len(assignments)} assignments for {len(table)} tokens"
        )
    doc_ids = np.unique(table.doc_ids)
    dense = np.zeros((len(doc_ids), n_topics), dtype=np.float64)
    positions = np.searchsorted(doc_ids, table.doc_ids)
    np.add.at(dense, (positions, assignments), 1.0)
    rows = []
    for i, doc in enumerate(doc_ids.tolist()):
        total = dense[i].sum()
        rows.append(DocTopicRow(doc_id=int(doc), proportions=dense[i] / total))
    return rows


def text_sink(target):
    """Open a path for writing, or pass a file-like object through."""
    from contextlib import nullcontext

    if hasattr(target, "write"):
        return nullcontext(target)
    return open(target, "w", encoding="utf-8")


def write_topic_summaries(
    target, summaries: list[TopicSummary], vocab: Vocabulary
) -> None:
    """TSV: topic id, token total, then the top words as surface:count."""
    with text_sink(target) as fh:
        fh.write("topic_id\ttotal_tokens\ttop_words\n")
        for s in summaries:
            cells = " ".join(
                f"{vocab.surface(t)}:{c}" for t, c in s.top_words
            )
            fh.write(f"{s.topic_id}\t{s.total_tokens}\t{cells}\n")


def write_doc_topic_matrix(target, rows: list[DocTopicRow]) -> None:
    with text_sink(target) as fh:
        width = len(rows[0].proportions) if rows else 0
        header = "\t".join(f"topic_{k}" for k in range(width))
        fh.write(f"doc_id\t{header}\n")
        for row in rows:
            cells = "\t".join(f"{p:.6f}" for p in row.proportions)
            fh.write(f"{row.doc_id}\t{cells}\n")


def load_assignments_any(path: str | Path) -> tuple[np.ndarray, int, str]:
    """Read (assignments, n_topics, kind) from either model file flavor."""
    with open_npz(path) as npz:
        names = set(npz.files)
        if "assignments" not in names:
            raise FormatError(f"{path}: no assignments array in model file")
        assignments = npz["assignments"].astype(np.int64)
        if "centroids" in names:
            return assignments, int(npz["centroids"].shape[0]), str(npz["kind"])
        if "topic_word_counts" in names:
            return (
                assignments,
                int(npz["topic_word_counts"].shape[0]),
                str(npz["kind"]),
            )
    raise FormatError(f"{path}: cannot determine topic count from model file")
