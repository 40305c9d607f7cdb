"""Corpus-level analyses over a fitted assignment.

Covers topic prevalence across a document partition, time series for
ordered partitions, polysemy candidates ranked by Jensen-Shannon
divergence between topic word distributions, and part-of-speech
homogeneity of topic word lists.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import DocumentMeta, TokenTable, Vocabulary
from .errors import ConfigError, IntegrityError
from .topics import TopicSummary

OTHER_TAG = "OTHER"


@dataclass
class PartitionTable:
    scheme: str
    labels: list[str]
    counts: np.ndarray  # n_topics x n_labels token counts

    @property
    def n_topics(self) -> int:
        return self.counts.shape[0]

    def label_shares(self) -> np.ndarray:
        """Columns normalized: topic mix within each label."""
        totals = self.counts.sum(axis=0, keepdims=True).astype(np.float64)
        safe = np.where(totals == 0, 1.0, totals)
        return self.counts / safe

    def topic_shares(self) -> np.ndarray:
        """Rows normalized: label mix within each topic; zero rows stay zero."""
        totals = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        safe = np.where(totals == 0, 1.0, totals)
        return self.counts / safe


@dataclass
class TimeSeries:
    scheme: str
    periods: list[int]
    values: np.ndarray  # n_topics x n_periods
    topic_order: list[int]  # topics sorted by mean position over the periods


@dataclass
class PolysemyCandidate:
    type_id: int
    topic_a: int
    topic_b: int
    divergence: float


def partition_prevalence(
    assignments: np.ndarray,
    table: TokenTable,
    meta: DocumentMeta,
    scheme: str,
    n_topics: int,
) -> PartitionTable:
    """Token counts per (topic, partition label)."""
    if len(assignments) != len(table):
        raise IntegrityError(
            f"{len(assignments)} assignments for {len(table)} tokens"
        )
    doc_ids = np.unique(table.doc_ids)
    label_of: dict[int, str] = {}
    for doc in doc_ids.tolist():
        label = meta.label(int(doc), scheme)
        if label is None:
            raise IntegrityError(
                f"document {doc} has no {scheme!r} label in the metadata sidecar"
            )
        label_of[int(doc)] = label
    labels = sorted(set(label_of.values()))
    col = {lab: i for i, lab in enumerate(labels)}
    token_cols = np.array(
        [col[label_of[int(d)]] for d in table.doc_ids], dtype=np.int64
    )
    counts = np.zeros((n_topics, len(labels)), dtype=np.int64)
    np.add.at(counts, (assignments, token_cols), 1)
    return PartitionTable(scheme=scheme, labels=labels, counts=counts)


def top_topics_per_label(
    ptable: PartitionTable, top_m: int = 5
) -> dict[str, list[tuple[int, int]]]:
    """Most prominent topics within each label, by token count."""
    out: dict[str, list[tuple[int, int]]] = {}
    for j, label in enumerate(ptable.labels):
        col = ptable.counts[:, j]
        ranked = sorted(
            ((k, int(col[k])) for k in range(ptable.n_topics) if col[k] > 0),
            key=lambda item: (-item[1], item[0]),
        )
        out[label] = ranked[:top_m]
    return out


def uniform_topics(
    ptable: PartitionTable, top_m: int | None = None
) -> list[tuple[int, float]]:
    """Topics ranked by entropy of their spread across labels, widest first.

    Topics with no tokens are left out. Ties break toward the lower id.
    """
    rows = ptable.topic_shares()
    out = []
    for k in range(ptable.n_topics):
        if ptable.counts[k].sum() == 0:
            continue
        p = rows[k][rows[k] > 0]
        out.append((k, float(-(p * np.log(p)).sum())))
    out.sort(key=lambda item: (-item[1], item[0]))
    return out[:top_m] if top_m is not None else out


def time_series(ptable: PartitionTable, normalize: str = "none") -> TimeSeries:
    """Reorder an integer-labeled partition by period.

    normalize="per-label" converts each period's column to topic
    shares. A label that does not parse as an integer means the scheme
    is not ordered, which is a usage error rather than a data defect.
    topic_order ranks topics by the mean period position of their
    tokens, earliest-leaning first; empty topics go last.
    """
    if normalize not in ("none", "per-label"):
        raise ConfigError(
            f"normalize must be 'none' or 'per-label', got {normalize!r}"
        )
    periods = []
    for lab in ptable.labels:
        try:
            periods.append(int(lab))
        except ValueError as exc:
            raise ConfigError(
                f"label {lab!r} in scheme {ptable.scheme!r} is not an integer; "
                "time series need an ordered scheme"
            ) from exc
    order = np.argsort(np.asarray(periods, dtype=np.int64), kind="stable")
    values = ptable.counts[:, order].astype(np.float64)

    positions = np.arange(values.shape[1], dtype=np.float64)
    row_totals = values.sum(axis=1)
    mean_pos = np.full(len(row_totals), np.inf)
    occupied = row_totals > 0
    mean_pos[occupied] = (values[occupied] * positions).sum(axis=1) / row_totals[occupied]
    topic_order = sorted(range(len(mean_pos)), key=lambda k: (mean_pos[k], k))

    if normalize == "per-label":
        totals = values.sum(axis=0, keepdims=True)
        values = values / np.where(totals == 0, 1.0, totals)
    return TimeSeries(
        scheme=ptable.scheme,
        periods=[periods[i] for i in order],
        values=values,
        topic_order=topic_order,
    )


def _entropy(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    # + 0.0 turns the -0.0 of a point mass into a plain zero.
    return float(-(p * np.log(p)).sum()) + 0.0


def jensen_shannon(p: dict[int, float], q: dict[int, float]) -> float:
    """Jensen-Shannon divergence in nats; bounded by ln 2."""
    keys = sorted(set(p) | set(q))
    if not keys:
        raise ConfigError("cannot compare two empty distributions")
    pa = np.array([p.get(k, 0.0) for k in keys], dtype=np.float64)
    qa = np.array([q.get(k, 0.0) for k in keys], dtype=np.float64)
    for name, arr in (("first", pa), ("second", qa)):
        total = arr.sum()
        if not np.isclose(total, 1.0, atol=1e-6):
            raise IntegrityError(f"{name} distribution sums to {total}, not 1")
    m = (pa + qa) / 2.0
    return _entropy(m) - (_entropy(pa) + _entropy(qa)) / 2.0


def polysemy_candidates(
    summaries: Sequence[TopicSummary],
    shared_top_words: Sequence[int] | None = None,
    top_n: int = 20,
) -> list[PolysemyCandidate]:
    """Types whose top-list topics diverge most, one candidate per type.

    A type qualifies when it sits in the top words of two or more
    topics; its score is the largest Jensen-Shannon divergence between
    the word distributions of any pair of those topics. Passing
    shared_top_words restricts scoring to those type ids.
    """
    if len(summaries) < 2:
        raise ConfigError("polysemy needs at least two topics to compare")
    restrict = set(shared_top_words) if shared_top_words is not None else None
    holders: dict[int, list[int]] = {}
    for s in summaries:
        for t, _ in s.top_words[:top_n]:
            if restrict is None or t in restrict:
                holders.setdefault(t, []).append(s.topic_id)
    out: list[PolysemyCandidate] = []
    for t in sorted(holders):
        topics = holders[t]
        if len(topics) < 2:
            continue
        best: PolysemyCandidate | None = None
        for i in range(1, len(topics)):
            for j in range(i):
                a, b = topics[j], topics[i]
                div = jensen_shannon(
                    summaries[a].word_dist, summaries[b].word_dist
                )
                if best is None or div > best.divergence:
                    best = PolysemyCandidate(t, a, b, div)
        assert best is not None
        out.append(best)
    out.sort(key=lambda c: (-c.divergence, c.type_id))
    return out


def pos_entropy(
    topic: TopicSummary, vocab: Vocabulary, top_n: int = 20
) -> float | None:
    """Entropy of part-of-speech tags over the topic's top words.

    Each word counts once regardless of token count; untagged words
    fall into a shared OTHER bucket. Empty topics are not scored.
    """
    if topic.is_empty:
        return None
    tags = [
        vocab.pos_tag(t) or OTHER_TAG for t, _ in topic.top_words[:top_n]
    ]
    counts = np.array(list(Counter(tags).values()), dtype=np.float64)
    return _entropy(counts / counts.sum())


def pos_composition(
    summaries: Sequence[TopicSummary], vocab: Vocabulary, top_n: int = 20
) -> dict[str, float]:
    """Tag mix across the top words of all non-empty topics."""
    counter: Counter[str] = Counter()
    for s in summaries:
        if s.is_empty:
            continue
        counter.update(
            vocab.pos_tag(t) or OTHER_TAG for t, _ in s.top_words[:top_n]
        )
    total = sum(counter.values())
    if total == 0:
        return {}
    return {tag: counter[tag] / total for tag in sorted(counter)}
