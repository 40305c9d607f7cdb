"""Topic quality metrics: entropy, coherence, exclusivity.

All logarithms are natural. Internal coherence follows the
document-count form: for top words w_1..w_n ranked by count,

    sum over i of sum over j < i of ln((D(w_i, w_j) + eps) / D(w_j))

where D counts documents of the working corpus and the denominator
uses the earlier-ranked word. External coherence is pointwise mutual
information over 25-word sliding windows of a reference corpus,

    sum over pairs of ln((Pr(w_i, w_j) + eps) / (Pr(w_i) Pr(w_j)))

restricted to top words the reference attests at least once; a topic
with fewer than ten attested words is skipped rather than scored.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import math

import numpy as np

from .corpus import TokenTable, Vocabulary
from .errors import ConfigError, IntegrityError
from .topics import TopicSummary

DEFAULT_EPSILON = 1e-12
DEFAULT_WINDOW = 25
DEFAULT_MIN_ATTESTED = 10


@dataclass
class CoherenceConfig:
    top_n: int = 20
    epsilon: float = DEFAULT_EPSILON
    window: int = DEFAULT_WINDOW
    min_attested: int = DEFAULT_MIN_ATTESTED

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ConfigError(f"top_n must be at least 1, got {self.top_n}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.window < 1:
            raise ConfigError(f"window must be at least 1, got {self.window}")
        if self.min_attested < 2:
            raise ConfigError(
                f"min_attested must be at least 2, got {self.min_attested}"
            )


class CooccurrenceIndex:
    """Document and window co-occurrence counts for a candidate word set.

    The document side is keyed by type id and fed from the working
    corpus; the window side is keyed by surface string and fed from a
    tokenized reference corpus. Either side may be left unbuilt when
    only one family of metrics is wanted.
    """

    def __init__(self, window: int = DEFAULT_WINDOW):
        self.window = window
        self.doc_count: dict[int, int] = {}
        self.doc_pair_count: dict[tuple[int, int], int] = {}
        self.total_docs = 0
        self.window_count: dict[str, int] = {}
        self.window_pair_count: dict[tuple[str, str], int] = {}
        self.total_windows = 0

    def index_documents(self, table: TokenTable, candidate_ids: Iterable[int]) -> None:
        candidates = {int(t) for t in candidate_ids}
        if len(table) == 0:
            return
        order = np.argsort(table.doc_ids, kind="stable")
        docs = table.doc_ids[order]
        types = table.type_ids[order]
        starts = np.flatnonzero(np.r_[True, np.diff(docs) != 0])
        stops = np.r_[starts[1:], len(docs)]
        self.total_docs += len(starts)
        for a, b in zip(starts, stops):
            present = sorted(
                t for t in np.unique(types[a:b]).tolist() if t in candidates
            )
            self._record(present, self.doc_count, self.doc_pair_count)

    def index_reference(
        self, documents: Iterable[Sequence[str]], candidate_surfaces: Iterable[str]
    ) -> None:
        candidates = set(candidate_surfaces)
        w = self.window
        for tokens in documents:
            n = len(tokens)
            if n <= w:
                # Short documents contribute a single whole-document window.
                self.total_windows += 1
                present = sorted({t for t in tokens if t in candidates})
                self._record(present, self.window_count, self.window_pair_count)
                continue
            self.total_windows += n - w + 1
            in_window: dict[str, int] = {}
            for t in tokens[:w]:
                if t in candidates:
                    in_window[t] = in_window.get(t, 0) + 1
            self._record(sorted(in_window), self.window_count, self.window_pair_count)
            for start in range(1, n - w + 1):
                gone = tokens[start - 1]
                if gone in candidates:
                    left = in_window[gone] - 1
                    if left:
                        in_window[gone] = left
                    else:
                        del in_window[gone]
                new = tokens[start + w - 1]
                if new in candidates:
                    in_window[new] = in_window.get(new, 0) + 1
                self._record(
                    sorted(in_window), self.window_count, self.window_pair_count
                )

    @staticmethod
    def _record(present: list, singles: dict, pairs: dict) -> None:
        for i, a in enumerate(present):
            singles[a] = singles.get(a, 0) + 1
            for b in present[i + 1 :]:
                key = (a, b)
                pairs[key] = pairs.get(key, 0) + 1

    def doc_frequency(self, type_id: int) -> int:
        return self.doc_count.get(type_id, 0)

    def doc_cooccurrence(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        return self.doc_pair_count.get((a, b), 0)

    def window_frequency(self, surface: str) -> int:
        return self.window_count.get(surface, 0)

    def window_cooccurrence(self, a: str, b: str) -> int:
        if a > b:
            a, b = b, a
        return self.window_pair_count.get((a, b), 0)


def word_entropy(topic: TopicSummary) -> float | None:
    """Shannon entropy of the topic's word distribution, in nats."""
    if topic.is_empty:
        return None
    probs = np.fromiter(topic.word_dist.values(), dtype=np.float64)
    # + 0.0 turns the -0.0 of a single-type topic into a plain zero.
    return float(-(probs * np.log(probs)).sum()) + 0.0


def distinct_word_count(topic: TopicSummary) -> int:
    return len(topic.word_counts)


def internal_coherence(
    top_type_ids: Sequence[int],
    index: CooccurrenceIndex,
    config: CoherenceConfig | None = None,
) -> float:
    """Document co-occurrence coherence over a rank-ordered word list."""
    config = config or CoherenceConfig()
    words = list(top_type_ids)
    total = 0.0
    for i in range(1, len(words)):
        for j in range(i):
            denom = index.doc_frequency(words[j])
            if denom <= 0:
                raise IntegrityError(
                    f"type {words[j]} has zero document count in the working corpus"
                )
            joint = index.doc_cooccurrence(words[i], words[j])
            total += math.log((joint + config.epsilon) / denom)
    return total


def external_coherence(
    top_surfaces: Sequence[str],
    index: CooccurrenceIndex,
    config: CoherenceConfig | None = None,
) -> float | None:
    """Window PMI coherence; None when too few words are attested."""
    config = config or CoherenceConfig()
    if index.total_windows == 0:
        raise ConfigError("reference window index is empty")
    attested = [w for w in top_surfaces if index.window_frequency(w) > 0]
    if len(attested) < config.min_attested:
        return None
    n = index.total_windows
    total = 0.0
    for i in range(1, len(attested)):
        for j in range(i):
            p_joint = index.window_cooccurrence(attested[i], attested[j]) / n
            p_i = index.window_frequency(attested[i]) / n
            p_j = index.window_frequency(attested[j]) / n
            total += math.log((p_joint + config.epsilon) / (p_i * p_j))
    return total


def _dist_totals(summaries: Sequence[TopicSummary]) -> dict[int, float]:
    totals: dict[int, float] = {}
    for s in summaries:
        for t, p in s.word_dist.items():
            totals[t] = totals.get(t, 0.0) + p
    return totals


def exclusivity(
    summaries: Sequence[TopicSummary],
    topic_id: int,
    top_n: int = 20,
    _totals: dict[int, float] | None = None,
) -> float | None:
    """Mean share of each top word's probability mass held by this topic."""
    topic = summaries[topic_id]
    if topic.is_empty:
        return None
    totals = _totals if _totals is not None else _dist_totals(summaries)
    shares = []
    for t, _ in topic.top_words[:top_n]:
        denom = totals.get(t, 0.0)
        if denom <= 0.0:
            raise IntegrityError(
                f"type {t} is a top word of topic {topic_id} but carries no "
                "probability mass in any topic"
            )
        shares.append(topic.word_dist[t] / denom)
    return float(np.mean(shares))


@dataclass
class TopicMetrics:
    topic_id: int
    total_tokens: int
    distinct_words: int
    entropy: float | None
    internal: float | None
    external: float | None
    external_attested: int
    exclusivity: float | None

    @property
    def is_empty(self) -> bool:
        return self.total_tokens == 0

    @property
    def external_skipped(self) -> bool:
        return self.external is None


def evaluate_topics(
    summaries: Sequence[TopicSummary],
    vocab: Vocabulary,
    index: CooccurrenceIndex,
    config: CoherenceConfig | None = None,
    threads: int = 1,
    with_external: bool = True,
) -> list[TopicMetrics]:
    """Score every topic; empty topics carry None for each metric.

    Per-topic scoring is independent, so it may run on a thread pool;
    results are written back by topic index, which keeps the output
    identical for any thread count.
    """
    config = config or CoherenceConfig()
    totals = _dist_totals(summaries)

    def score(k: int) -> TopicMetrics:
        s = summaries[k]
        if s.is_empty:
            return TopicMetrics(k, 0, 0, None, None, None, 0, None)
        ids = [t for t, _ in s.top_words[: config.top_n]]
        surfaces = [vocab.surface(t) for t in ids]
        ext = None
        attested = 0
        if with_external:
            attested = sum(1 for w in surfaces if index.window_frequency(w) > 0)
            ext = external_coherence(surfaces, index, config)
        return TopicMetrics(
            topic_id=k,
            total_tokens=s.total_tokens,
            distinct_words=distinct_word_count(s),
            entropy=word_entropy(s),
            internal=internal_coherence(ids, index, config),
            external=ext,
            external_attested=attested,
            exclusivity=exclusivity(summaries, k, config.top_n, _totals=totals),
        )

    if threads > 1:
        results: list[TopicMetrics | None] = [None] * len(summaries)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for k, row in zip(range(len(summaries)), pool.map(score, range(len(summaries)))):
                results[k] = row
        return [r for r in results if r is not None]
    return [score(k) for k in range(len(summaries))]


def write_metrics(target, rows: list[TopicMetrics]) -> None:
    from .topics import text_sink

    def cell(value: float | None) -> str:
        return "NA" if value is None else f"{value:.10g}"

    with text_sink(target) as fh:
        fh.write(
            "topic_id\ttotal_tokens\tentropy\tinternal_coherence\t"
            "external_coherence\texclusivity\tdistinct_words\texternal_attested\n"
        )
        for r in rows:
            ext = "skipped" if (r.external is None and not r.is_empty) else cell(r.external)
            fh.write(
                f"{r.topic_id}\t{r.total_tokens}\t{cell(r.entropy)}\t"
                f"{cell(r.internal)}\t{ext}\t{cell(r.exclusivity)}\t"
                f"{r.distinct_words}\t{r.external_attested}\n"
            )
