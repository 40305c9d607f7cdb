"""Cross-package round trip: extractor output consumed downstream.

The extractor library never imports the topic-modeling package; this test
module is the single place the two meet.  A 10-document sample extracted at
the last hidden layer must pass every integrity check the consumer runs, and
the consumer's subword merge must reproduce exactly the word count the
extractor logged.
"""

from __future__ import annotations

import logging
import re
from types import SimpleNamespace

import numpy as np
import pytest

import tokentopics.cli as consumer_cli
import tokentopics.corpus as consumer_corpus

from tkextract import ExtractorConfig, run_extraction

TEN_DOCS = [
    "the river bank was deep",
    "flowing water near the old bank",
    "a boat on the river",
    "swimmers swim in deep water",
    "the finance bank kept cash",
    "a loan is credit from the bank",
    "money was near the lighthouse",
    "the campfire light by the shore",
    "old swimmers camp near the river",
    "cash money loan credit",
]


class _CaptureHandler(logging.Handler):
    def __init__(self):
        super().__init__()
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


@pytest.fixture(scope="module")
def roundtrip(tmp_path_factory, encoder_dir):
    out = tmp_path_factory.mktemp("roundtrip") / "sample.tkc"
    handler = _CaptureHandler()
    logger = logging.getLogger("tkextract")
    logger.addHandler(handler)
    previous_level = logger.level
    logger.setLevel(logging.INFO)
    try:
        report = run_extraction(
            [d.split() for d in TEN_DOCS],
            ExtractorConfig(model=encoder_dir, layer_index=-1, batch_size=4),
            out,
        )
    finally:
        logger.removeHandler(handler)
        logger.setLevel(previous_level)

    summary = next(m for m in handler.messages if "word groups" in m)
    logged_words = int(re.search(r"wrote (\d+) word groups", summary).group(1))
    return SimpleNamespace(out=out, report=report, logged_words=logged_words)


def test_extracted_corpus_survives_consumer_round_trip(roundtrip, tmp_path, capsys):
    # Header: declared shape matches what was written.
    header = consumer_corpus.read_header(roundtrip.out)
    assert header.dim == 32
    assert header.has_subword_groups
    assert header.token_count == roundtrip.report.subword_rows

    # Streaming read runs the size and finiteness checks over every record.
    records = list(consumer_corpus.iter_tokens(roundtrip.out))
    assert len(records) == header.token_count

    # The vocabulary sidecar parses and covers every type id in the file.
    vocab = consumer_corpus.read_vocabulary(
        consumer_corpus.vocab_sidecar(roundtrip.out)
    )
    _, table = consumer_corpus.load_table(roundtrip.out)
    assert int(table.type_ids.max()) < len(vocab)
    assert vocab.total_docs == len(TEN_DOCS)

    # Subword merge honors the ordering contract and reproduces the
    # extractor's logged word count, one full-width vector per word.
    merged = list(consumer_corpus.merge_subwords(iter(records)))
    assert len(merged) == roundtrip.logged_words
    assert roundtrip.logged_words == roundtrip.report.words
    assert all(rec.vector.shape == (header.dim,) for rec in merged)
    assert all(np.all(np.isfinite(rec.vector)) for rec in merged)

    # Document frequencies recomputed by the consumer equal the sidecar's.
    merged_table = consumer_corpus.TokenTable.from_records(iter(merged))
    freqs = consumer_corpus.compute_doc_frequencies(
        merged_table.doc_ids, merged_table.type_ids, len(vocab)
    )
    assert np.array_equal(freqs, vocab.doc_frequencies())
    assert consumer_corpus.count_documents(merged_table.doc_ids) == vocab.total_docs

    with capsys.disabled():
        print(
            f"\nACCEPTANCE PASS extractor-round-trip: 10 docs at layer -1 -> "
            f"{header.token_count} subtoken rows, merge yields "
            f"{len(merged)} words == logged count {roundtrip.logged_words}, "
            f"doc frequencies match"
        )


def test_consumer_ingest_command_accepts_extractor_output(roundtrip, tmp_path):
    merged_path = tmp_path / "merged.tkc"
    rc = consumer_cli.main(
        ["ingest", "--in", str(roundtrip.out), "--out", str(merged_path)]
    )
    assert rc == 0

    header = consumer_corpus.read_header(merged_path)
    assert not header.has_subword_groups
    assert header.token_count == roundtrip.logged_words

    # Ingest rewrites the vocabulary with frequencies it recomputed itself;
    # byte equality with the extractor's sidecar proves the counts agree.
    ours = consumer_corpus.vocab_sidecar(roundtrip.out).read_bytes()
    theirs = consumer_corpus.vocab_sidecar(merged_path).read_bytes()
    assert ours == theirs

    # Per-document metadata rides along.
    meta = consumer_corpus.read_metadata(consumer_corpus.meta_sidecar(merged_path))
    assert len(meta) == len(TEN_DOCS)
    assert meta.label(0, "line") == "1"
    assert meta.label(9, "line") == "10"


def test_merged_words_count_one_per_input_word(roundtrip):
    merged = list(
        consumer_corpus.merge_subwords(consumer_corpus.iter_tokens(roundtrip.out))
    )
    assert len(merged) == sum(len(d.split()) for d in TEN_DOCS)
