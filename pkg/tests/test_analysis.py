"""Partition prevalence, time series, divergence, and POS profiles."""

import math

import numpy as np
import pytest

import synth
from tokentopics import analysis, corpus, topics
from tokentopics.errors import ConfigError, IntegrityError


def _meta(labels_by_doc, scheme="category"):
    return corpus.DocumentMeta({d: {scheme: lab} for d, lab in labels_by_doc.items()})


def _summaries(count_dicts):
    out = []
    for k, counts in enumerate(count_dicts):
        total = sum(counts.values())
        pairs = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        out.append(
            topics.TopicSummary(
                topic_id=k,
                total_tokens=total,
                word_counts=dict(pairs),
                word_dist={t: c / total for t, c in pairs} if total else {},
                top_words=[(t, c) for t, c in pairs[:20]],
            )
        )
    return out


class TestPrevalence:
    def test_single_label_equals_topic_totals(self):
        table = synth.make_table([0, 0, 1, 1], [0, 1, 0, 1])
        meta = _meta({0: "only", 1: "only"})
        assignments = np.array([0, 1, 1, 1])
        pt = analysis.partition_prevalence(assignments, table, meta, "category", 2)
        assert pt.labels == ["only"]
        assert pt.counts[:, 0].tolist() == [1, 3]

    def test_two_label_hand_tally(self):
        # docs 0,2 are news; doc 1 is law. 12 tokens.
        doc_ids = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]
        assignments = np.array([0, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1])
        table = synth.make_table(doc_ids, [0] * 12)
        meta = _meta({0: "news", 1: "law", 2: "news"})
        pt = analysis.partition_prevalence(assignments, table, meta, "category", 2)
        assert pt.labels == ["law", "news"]
        # topic 0: 1 token in law, 5 in news; topic 1: 3 and 3.
        assert pt.counts.tolist() == [[1, 5], [3, 3]]

    def test_doc_permutation_invariance(self):
        rng = np.random.default_rng(0)
        doc_ids = np.sort(rng.integers(0, 6, size=40))
        table = synth.make_table(doc_ids, rng.integers(0, 5, size=40))
        assignments = rng.integers(0, 3, size=40)
        meta = _meta({d: ["a", "b", "c"][d % 3] for d in range(6)})
        a = analysis.partition_prevalence(assignments, table, meta, "category", 3)
        perm = rng.permutation(40)
        shuffled = synth.make_table(
            table.doc_ids[perm], table.type_ids[perm], table.word_indices[perm]
        )
        b = analysis.partition_prevalence(assignments[perm], shuffled, meta, "category", 3)
        assert a.labels == b.labels
        assert np.array_equal(a.counts, b.counts)

    def test_conservation(self):
        rng = np.random.default_rng(1)
        doc_ids = np.sort(rng.integers(0, 5, size=30))
        table = synth.make_table(doc_ids, rng.integers(0, 4, size=30))
        assignments = rng.integers(0, 4, size=30)
        meta = _meta({d: str(d % 2) for d in range(5)})
        pt = analysis.partition_prevalence(assignments, table, meta, "category", 4)
        assert pt.counts.sum() == 30

    def test_unlabeled_doc_rejected(self):
        table = synth.make_table([0, 1], [0, 0])
        meta = _meta({0: "x"})
        with pytest.raises(IntegrityError):
            analysis.partition_prevalence(np.array([0, 0]), table, meta, "category", 1)

    def test_labels_sorted(self):
        table = synth.make_table([0, 1, 2], [0, 0, 0])
        meta = _meta({0: "zebra", 1: "apple", 2: "mango"})
        pt = analysis.partition_prevalence(np.zeros(3, np.int64), table, meta, "category", 1)
        assert pt.labels == ["apple", "mango", "zebra"]

    def test_top_topics_per_label(self):
        pt = analysis.PartitionTable(
            scheme="category",
            labels=["a", "b"],
            counts=np.array([[5, 0], [3, 7], [0, 2]]),
        )
        out = analysis.top_topics_per_label(pt, top_m=2)
        assert out["a"] == [(0, 5), (1, 3)]
        assert out["b"] == [(1, 7), (2, 2)]


class TestUniformTopics:
    def test_even_spread_ranks_first(self):
        counts = np.array(
            [
                [4, 4, 4, 4],   # uniform over 4 labels -> ln 4
                [16, 0, 0, 0],  # point mass -> 0
                [8, 8, 0, 0],   # ln 2
            ]
        )
        pt = analysis.PartitionTable("category", ["a", "b", "c", "d"], counts)
        ranked = analysis.uniform_topics(pt)
        assert [k for k, _ in ranked] == [0, 2, 1]
        assert abs(ranked[0][1] - math.log(4)) < 1e-12
        assert abs(ranked[1][1] - math.log(2)) < 1e-12
        assert ranked[2][1] == 0.0

    def test_empty_topics_excluded(self):
        counts = np.array([[1, 1], [0, 0]])
        pt = analysis.PartitionTable("category", ["a", "b"], counts)
        ranked = analysis.uniform_topics(pt)
        assert [k for k, _ in ranked] == [0]

    def test_top_m_truncates(self):
        counts = np.array([[1, 1], [2, 2], [3, 3]])
        pt = analysis.PartitionTable("category", ["a", "b"], counts)
        assert len(analysis.uniform_topics(pt, top_m=2)) == 2

    def test_ties_break_to_lower_id(self):
        counts = np.array([[2, 2], [3, 3]])
        pt = analysis.PartitionTable("category", ["a", "b"], counts)
        ranked = analysis.uniform_topics(pt)
        assert [k for k, _ in ranked] == [0, 1]


class TestTimeSeries:
    def _table(self):
        # Columns arrive in shuffled label order: 1992, 1990, 1991.
        counts = np.array(
            [
                [0, 10, 0],  # all mass in 1990: the early topic
                [10, 0, 0],  # all mass in 1992: the late topic
                [5, 5, 5],   # evenly spread
            ]
        )
        return analysis.PartitionTable("year", ["1992", "1990", "1991"], counts)

    def test_periods_sorted(self):
        ts = analysis.time_series(self._table())
        assert ts.periods == [1990, 1991, 1992]

    def test_columns_follow_period_order(self):
        # The values matrix must be re-addressed, not just relabeled.
        ts = analysis.time_series(self._table())
        assert ts.values[0].tolist() == [10, 0, 0]
        assert ts.values[1].tolist() == [0, 0, 10]
        assert ts.values[2].tolist() == [5, 5, 5]

    def test_per_label_columns_sum_to_one(self):
        ts = analysis.time_series(self._table(), normalize="per-label")
        sums = ts.values.sum(axis=0)
        assert np.allclose(sums, 1.0)

    def test_flat_topics_keep_constant_share(self):
        counts = np.array([[4, 4, 4], [2, 2, 2]])
        pt = analysis.PartitionTable("year", ["1990", "1991", "1992"], counts)
        ts = analysis.time_series(pt, normalize="per-label")
        assert np.allclose(ts.values[0], 4 / 6)
        assert np.allclose(ts.values[1], 2 / 6)

    def test_topic_order_by_mean_position(self):
        ts = analysis.time_series(self._table())
        # Mean positions: topic 0 at 0, topic 2 at 1, topic 1 at 2.
        assert ts.topic_order == [0, 2, 1]

    def test_non_integer_label_rejected(self):
        pt = analysis.PartitionTable("category", ["news"], np.array([[1]]))
        with pytest.raises(ConfigError):
            analysis.time_series(pt)

    def test_bad_normalize_rejected(self):
        with pytest.raises(ConfigError):
            analysis.time_series(self._table(), normalize="share")

    def test_recount_oracle(self):
        rng = np.random.default_rng(2)
        doc_ids = np.sort(rng.integers(0, 9, size=50))
        table = synth.make_table(doc_ids, rng.integers(0, 4, size=50))
        assignments = rng.integers(0, 3, size=50)
        years = {d: str(1990 + d % 3) for d in range(9)}
        meta = _meta(years, scheme="year")
        pt = analysis.partition_prevalence(assignments, table, meta, "year", 3)
        ts = analysis.time_series(pt)
        for k in range(3):
            for j, year in enumerate(ts.periods):
                expect = sum(
                    1
                    for i in range(50)
                    if assignments[i] == k and years[int(table.doc_ids[i])] == str(year)
                )
                assert ts.values[k, j] == expect


class TestJensenShannon:
    def test_identical_is_zero(self):
        p = {0: 0.5, 1: 0.5}
        assert abs(analysis.jensen_shannon(p, dict(p))) < 1e-12

    def test_disjoint_is_log2(self):
        p = {0: 0.4, 1: 0.6}
        q = {2: 1.0}
        assert abs(analysis.jensen_shannon(p, q) - math.log(2)) < 1e-12

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        a = rng.dirichlet(np.ones(6))
        b = rng.dirichlet(np.ones(6))
        p = {i: float(v) for i, v in enumerate(a)}
        q = {i: float(v) for i, v in enumerate(b)}
        assert abs(analysis.jensen_shannon(p, q) - analysis.jensen_shannon(q, p)) < 1e-12

    def test_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = rng.dirichlet(np.ones(5))
            b = rng.dirichlet(np.ones(5))
            p = {i: float(v) for i, v in enumerate(a)}
            q = {i: float(v) for i, v in enumerate(b)}
            d = analysis.jensen_shannon(p, q)
            assert -1e-12 <= d <= math.log(2) + 1e-12

    def test_unnormalized_rejected(self):
        with pytest.raises(IntegrityError):
            analysis.jensen_shannon({0: 0.7}, {0: 1.0})


class TestPolysemy:
    def test_shared_word_scored(self):
        summaries = _summaries([{0: 5, 1: 5}, {0: 5, 2: 5}])
        out = analysis.polysemy_candidates(summaries)
        shared = [c for c in out if c.type_id == 0]
        assert len(shared) == 1
        assert (shared[0].topic_a, shared[0].topic_b) == (0, 1)
        assert shared[0].divergence > 0

    def test_identical_topics_scored_zero(self):
        summaries = _summaries([{0: 3, 1: 3}, {0: 3, 1: 3}])
        out = analysis.polysemy_candidates(summaries)
        assert all(abs(c.divergence) < 1e-12 for c in out)

    def test_unshared_words_excluded(self):
        summaries = _summaries([{0: 5}, {1: 5}])
        assert analysis.polysemy_candidates(summaries) == []

    def test_restriction_list(self):
        summaries = _summaries([{0: 5, 1: 5}, {0: 5, 1: 5}])
        out = analysis.polysemy_candidates(summaries, shared_top_words=[1])
        assert [c.type_id for c in out] == [1]

    def test_sorted_by_divergence(self):
        summaries = _summaries(
            [{0: 9, 1: 1, 2: 5}, {0: 1, 1: 9, 2: 5}, {2: 10, 0: 1}]
        )
        out = analysis.polysemy_candidates(summaries)
        divs = [c.divergence for c in out]
        assert divs == sorted(divs, reverse=True)

    def test_single_topic_rejected(self):
        with pytest.raises(ConfigError):
            analysis.polysemy_candidates(_summaries([{0: 1}]))


class TestPos:
    def test_single_tag_entropy_exactly_zero(self):
        vocab = synth.make_vocab(
            [f"y{i}" for i in range(10)], tags=["num"] * 10, total_docs=1
        )
        s = _summaries([{t: 2 for t in range(10)}])[0]
        assert analysis.pos_entropy(s, vocab) == 0.0

    def test_half_noun_half_verb_is_log2(self):
        tags = ["noun"] * 10 + ["verb"] * 10
        vocab = synth.make_vocab([f"w{i}" for i in range(20)], tags=tags, total_docs=1)
        s = _summaries([{t: 1 for t in range(20)}])[0]
        assert abs(analysis.pos_entropy(s, vocab) - math.log(2)) < 1e-12

    def test_untagged_fall_into_other(self):
        vocab = synth.make_vocab(["a", "b"], tags=["noun", None], total_docs=1)
        s = _summaries([{0: 1, 1: 1}])[0]
        # noun + OTHER: two equally likely tags.
        assert abs(analysis.pos_entropy(s, vocab) - math.log(2)) < 1e-12

    def test_eight_two_mix_matches_formula(self):
        tags = ["noun"] * 8 + ["verb"] * 2
        vocab = synth.make_vocab([f"w{i}" for i in range(10)], tags=tags, total_docs=1)
        s = _summaries([{t: 3 for t in range(10)}])[0]
        want = -(0.8 * math.log(0.8) + 0.2 * math.log(0.2))
        assert abs(analysis.pos_entropy(s, vocab) - want) < 1e-12

    def test_tags_unweighted_by_token_count(self):
        # One noun with a huge count vs one verb with count 1: tags
        # still split 50/50 because words count once each.
        vocab = synth.make_vocab(["a", "b"], tags=["noun", "verb"], total_docs=1)
        s = _summaries([{0: 1000, 1: 1}])[0]
        assert abs(analysis.pos_entropy(s, vocab) - math.log(2)) < 1e-12

    def test_empty_topic_none(self):
        vocab = synth.make_vocab(["a"], tags=["noun"], total_docs=1)
        s = _summaries([{}])[0]
        assert analysis.pos_entropy(s, vocab) is None

    def test_composition_all_nouns(self):
        vocab = synth.make_vocab(["a", "b"], tags=["noun", "noun"], total_docs=1)
        summaries = _summaries([{0: 1, 1: 2}])
        assert analysis.pos_composition(summaries, vocab) == {"noun": 1.0}

    def test_composition_mix(self):
        tags = ["noun"] * 2 + ["verb"] * 2
        vocab = synth.make_vocab([f"w{i}" for i in range(4)], tags=tags, total_docs=1)
        summaries = _summaries([{0: 1, 2: 1}, {1: 1, 3: 1}])
        comp = analysis.pos_composition(summaries, vocab)
        assert comp == {"noun": 0.5, "verb": 0.5}

    def test_composition_slot_count_oracle(self):
        rng = np.random.default_rng(5)
        tags = [["noun", "verb", "adj"][int(rng.integers(0, 3))] for _ in range(9)]
        vocab = synth.make_vocab([f"w{i}" for i in range(9)], tags=tags, total_docs=1)
        dicts = [
            {t: int(rng.integers(1, 5)) for t in rng.choice(9, size=4, replace=False)}
            for _ in range(3)
        ]
        summaries = _summaries(dicts)
        comp = analysis.pos_composition(summaries, vocab)
        slots = []
        for s in summaries:
            slots.extend(tags[t] for t, _ in s.top_words)
        for tag in set(slots):
            assert abs(comp[tag] - slots.count(tag) / len(slots)) < 1e-12
