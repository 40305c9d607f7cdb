"""End-to-end extraction against a tiny seeded encoder.

These tests parse the output file with their own struct-level reader and
recompute every expectation (piece counts, document frequencies) through the
tokenizer directly, so the extractor is checked against independent
bookkeeping rather than against itself.
"""

from __future__ import annotations

import struct
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from tkextract import ExtractorConfig, ExtractorConfigError, run_extraction
from tkextract.errors import ExtractorDataError

HEADER = struct.Struct("<4sIIQI")

DOCS = [
    "the river bank was deep",
    "flowing water near the shore",
    "",
    "swimmers swim in the river",
    "‍ \x00",
    "the old bank near the water",
]

EMITTING_LINES = [0, 1, 3, 5]


def parse_corpus(path: Path) -> SimpleNamespace:
    raw = path.read_bytes()
    magic, version, dim, count, flags = HEADER.unpack_from(raw, 0)
    body = raw[HEADER.size :]
    record = np.dtype(
        [
            ("doc", "<u4"),
            ("word", "<u4"),
            ("type", "<u4"),
            ("vec", "<f4", (dim,)),
        ]
    )
    assert len(body) % record.itemsize == 0
    rows = np.frombuffer(body, dtype=record)
    return SimpleNamespace(
        magic=magic, version=version, dim=dim, count=count, flags=flags, rows=rows
    )


def read_vocab_sidecar(path: Path) -> tuple[int, list[tuple[str, int, str]]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    first = lines[0].split("\t")
    assert first[0] == "#total_docs"
    entries = []
    for line in lines[1:]:
        surface, df, tag = line.split("\t")
        entries.append((surface, int(df), tag))
    return int(first[1]), entries


@pytest.fixture(scope="module")
def extraction(tmp_path_factory, encoder_dir):
    out = tmp_path_factory.mktemp("extraction") / "sample.tkc"
    config = ExtractorConfig(model=encoder_dir, layer_index=-1, batch_size=3)
    report = run_extraction([d.split() for d in DOCS], config, out)
    return SimpleNamespace(out=out, report=report, config=config)


@pytest.fixture(scope="module")
def tokenizer(encoder_dir):
    from transformers import AutoTokenizer

    return AutoTokenizer.from_pretrained(encoder_dir)


def expected_pieces(tokenizer) -> dict[int, list[list[int]]]:
    """Per emitting document: the subtoken ids of each surviving word."""
    pieces: dict[int, list[list[int]]] = {}
    for doc_id in EMITTING_LINES:
        pieces[doc_id] = [
            tokenizer.encode(word, add_special_tokens=False)
            for word in DOCS[doc_id].split()
        ]
    return pieces


def test_header_fields(extraction):
    corpus = parse_corpus(extraction.out)
    assert corpus.magic == b"TKC1"
    assert corpus.version == 1
    assert corpus.dim == 32
    assert corpus.flags & 1  # subword-group flag
    assert corpus.count == len(corpus.rows)


def test_one_row_per_subtoken(extraction, tokenizer):
    corpus = parse_corpus(extraction.out)
    pieces = expected_pieces(tokenizer)
    total_subtokens = sum(len(p) for doc in pieces.values() for p in doc)
    assert corpus.count == total_subtokens
    assert extraction.report.subword_rows == total_subtokens


def test_group_count_equals_surviving_words(extraction, tokenizer):
    corpus = parse_corpus(extraction.out)
    pieces = expected_pieces(tokenizer)
    total_words = sum(len(doc) for doc in pieces.values())
    groups = {(int(r["doc"]), int(r["word"])) for r in corpus.rows}
    assert len(groups) == total_words
    assert extraction.report.words == total_words


def test_single_piece_word_yields_one_row(extraction):
    corpus = parse_corpus(extraction.out)
    _, entries = read_vocab_sidecar(extraction.out.with_suffix(".vocab.tsv"))
    type_of = {surface: i for i, (surface, _, _) in enumerate(entries)}
    deep_rows = corpus.rows[corpus.rows["type"] == type_of["deep"]]
    assert len(deep_rows) == 1


def test_multi_piece_word_rows_share_ids_but_not_vectors(extraction, tokenizer):
    corpus = parse_corpus(extraction.out)
    _, entries = read_vocab_sidecar(extraction.out.with_suffix(".vocab.tsv"))
    type_of = {surface: i for i, (surface, _, _) in enumerate(entries)}

    assert tokenizer.encode("flowing", add_special_tokens=False) != [
        tokenizer.unk_token_id
    ]
    flowing = corpus.rows[corpus.rows["type"] == type_of["flowing"]]
    assert len(flowing) == 2
    assert flowing[0]["doc"] == flowing[1]["doc"] == 1
    assert flowing[0]["word"] == flowing[1]["word"]
    assert not np.array_equal(flowing[0]["vec"], flowing[1]["vec"])

    swimmers = corpus.rows[corpus.rows["type"] == type_of["swimmers"]]
    assert len(swimmers) == 3
    assert len({(int(r["doc"]), int(r["word"])) for r in swimmers}) == 1


def test_word_indices_are_consecutive_per_document(extraction):
    corpus = parse_corpus(extraction.out)
    for doc_id in EMITTING_LINES:
        doc_rows = corpus.rows[corpus.rows["doc"] == doc_id]
        indices = sorted({int(r["word"]) for r in doc_rows})
        assert indices == list(range(len(indices)))


def test_documents_without_survivors_leave_gaps(extraction):
    corpus = parse_corpus(extraction.out)
    assert sorted(set(corpus.rows["doc"].tolist())) == EMITTING_LINES
    assert extraction.report.documents == len(EMITTING_LINES)
    assert extraction.report.dropped_words == 2  # both words of line 5


def test_vocabulary_sidecar_matches_independent_recount(extraction):
    corpus = parse_corpus(extraction.out)
    total_docs, entries = read_vocab_sidecar(
        extraction.out.with_suffix(".vocab.tsv")
    )
    assert total_docs == len(EMITTING_LINES)
    assert all(tag == "-" for _, _, tag in entries)
    assert len(entries) == extraction.report.types

    # Type ids follow first appearance in the text.
    first_seen: list[str] = []
    for doc_id in EMITTING_LINES:
        for word in DOCS[doc_id].split():
            if word not in first_seen:
                first_seen.append(word)
    assert [surface for surface, _, _ in entries] == first_seen

    # Document frequencies equal a recount over the parsed rows.
    for type_id, (surface, df, _) in enumerate(entries):
        docs_with_type = set(
            corpus.rows[corpus.rows["type"] == type_id]["doc"].tolist()
        )
        assert df == len(docs_with_type), surface


def test_metadata_sidecar_records_source_lines(extraction):
    meta = extraction.out.with_suffix(".meta.tsv").read_text(encoding="utf-8")
    expected = "".join(f"{i}\tline={i + 1}\n" for i in EMITTING_LINES)
    assert meta == expected


def test_repeated_runs_are_byte_identical(extraction, tmp_path, encoder_dir):
    out2 = tmp_path / "again.tkc"
    run_extraction([d.split() for d in DOCS], extraction.config, out2)
    assert out2.read_bytes() == extraction.out.read_bytes()
    for suffix in (".vocab.tsv", ".meta.tsv"):
        assert out2.with_suffix(suffix).read_bytes() == extraction.out.with_suffix(
            suffix
        ).read_bytes()


def test_layers_produce_different_vectors(extraction, tmp_path, encoder_dir):
    out2 = tmp_path / "layer2.tkc"
    config = ExtractorConfig(model=encoder_dir, layer_index=-2, batch_size=3)
    run_extraction([d.split() for d in DOCS], config, out2)
    a = parse_corpus(extraction.out)
    b = parse_corpus(out2)
    assert np.array_equal(a.rows["doc"], b.rows["doc"])
    assert np.array_equal(a.rows["word"], b.rows["word"])
    assert np.array_equal(a.rows["type"], b.rows["type"])
    assert not np.allclose(a.rows["vec"], b.rows["vec"])


def test_small_blocks_keep_ids_stable(extraction, tmp_path, encoder_dir):
    out2 = tmp_path / "blocks4.tkc"
    config = ExtractorConfig(
        model=encoder_dir, layer_index=-1, max_block_subtokens=4, batch_size=3
    )
    report = run_extraction([d.split() for d in DOCS], config, out2)
    a = parse_corpus(extraction.out)
    b = parse_corpus(out2)
    assert np.array_equal(a.rows["doc"], b.rows["doc"])
    assert np.array_equal(a.rows["word"], b.rows["word"])
    assert np.array_equal(a.rows["type"], b.rows["type"])
    assert report.blocks > extraction.report.blocks


def test_batch_size_does_not_change_results(extraction, tmp_path, encoder_dir):
    out2 = tmp_path / "batch1.tkc"
    config = ExtractorConfig(model=encoder_dir, layer_index=-1, batch_size=1)
    run_extraction([d.split() for d in DOCS], config, out2)
    a = parse_corpus(extraction.out)
    b = parse_corpus(out2)
    assert np.array_equal(a.rows["doc"], b.rows["doc"])
    assert np.array_equal(a.rows["word"], b.rows["word"])
    assert np.array_equal(a.rows["type"], b.rows["type"])
    np.testing.assert_allclose(a.rows["vec"], b.rows["vec"], atol=1e-5)


def test_word_longer_than_block_is_a_data_error(tmp_path, encoder_dir):
    config = ExtractorConfig(
        model=encoder_dir, layer_index=-1, max_block_subtokens=2
    )
    with pytest.raises(ExtractorDataError, match="spans 3 subtokens"):
        run_extraction([["swimmers"]], config, tmp_path / "never.tkc")


def test_unsupported_layer_is_a_config_error(tmp_path, encoder_dir):
    config = ExtractorConfig(model=encoder_dir, layer_index=-4)
    with pytest.raises(ExtractorConfigError, match="layer index"):
        run_extraction([["the"]], config, tmp_path / "never.tkc")


def test_block_length_beyond_model_budget_is_a_config_error(tmp_path, encoder_dir):
    # The tiny model seats 48 positions, two of which are special tokens.
    config = ExtractorConfig(
        model=encoder_dir, layer_index=-1, max_block_subtokens=47
    )
    with pytest.raises(ExtractorConfigError, match="position budget"):
        run_extraction([["the"]], config, tmp_path / "never.tkc")


def test_unknown_words_fall_back_to_a_single_unknown_piece(
    tmp_path, encoder_dir, tokenizer
):
    out = tmp_path / "unk.tkc"
    config = ExtractorConfig(model=encoder_dir, layer_index=-1)
    report = run_extraction([["zzzquux", "the"]], config, out)
    assert report.words == 2
    assert report.subword_rows == 2
    corpus = parse_corpus(out)
    assert corpus.count == 2
    _, entries = read_vocab_sidecar(out.with_suffix(".vocab.tsv"))
    assert [surface for surface, _, _ in entries] == ["zzzquux", "the"]
