"""End-to-end extraction: pre-tokenized text in, binary vector corpus out.

The pipeline per document: scrub each word of control/format/private-use/
surrogate codepoints, subtokenize the survivors, pack the subtoken groups
into encoder blocks that never split a word, run the blocks through the
model in batches, and append one row per subtoken to the output file.  The
extractor performs no averaging, no normalization, and no frequency
filtering — its output is the raw per-subtoken hidden states plus the
bookkeeping (vocabulary with document frequencies, per-document metadata)
that downstream consumers expect.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from tkextract.blocks import WordGroup, pack_blocks
from tkextract.cleanup import scrub_words
from tkextract.encoder import Encoder
from tkextract.errors import ExtractorConfigError
from tkextract.store import (
    TokenSink,
    write_metadata_sidecar,
    write_vocabulary_sidecar,
)

logger = logging.getLogger("tkextract")

SUPPORTED_LAYERS = (-1, -2, -3)
DEFAULT_BLOCK_CAPACITY = 512


@dataclass(frozen=True)
class ExtractorConfig:
    """Settings for one extraction run.

    ``layer_index`` counts hidden layers from the end (-1 = last).
    ``max_block_subtokens`` caps the subtokens per encoder block, excluding
    special tokens; ``None`` uses the model's own position budget.
    """

    model: str
    layer_index: int = -1
    max_block_subtokens: int | None = None
    batch_size: int = 8

    def validate(self) -> None:
        if self.layer_index not in SUPPORTED_LAYERS:
            raise ExtractorConfigError(
                f"layer index must be one of {list(SUPPORTED_LAYERS)}, "
                f"got {self.layer_index}"
            )
        if self.max_block_subtokens is not None and self.max_block_subtokens < 1:
            raise ExtractorConfigError(
                f"max block length must be >= 1, got {self.max_block_subtokens}"
            )
        if self.batch_size < 1:
            raise ExtractorConfigError(
                f"batch size must be >= 1, got {self.batch_size}"
            )


@dataclass(frozen=True)
class ExtractionReport:
    """What one run produced."""

    documents: int
    words: int
    subword_rows: int
    dropped_words: int
    types: int
    dim: int
    blocks: int


def _resolve_capacity(config: ExtractorConfig, encoder: Encoder) -> int:
    model_budget = encoder.max_block_capacity
    if config.max_block_subtokens is None:
        return model_budget if model_budget is not None else DEFAULT_BLOCK_CAPACITY
    if model_budget is not None and config.max_block_subtokens > model_budget:
        raise ExtractorConfigError(
            f"max block length {config.max_block_subtokens} exceeds the "
            f"model's position budget of {model_budget} subtokens"
        )
    return config.max_block_subtokens


def run_extraction(
    documents: Iterable[Sequence[str]],
    config: ExtractorConfig,
    out_path: str | Path,
) -> ExtractionReport:
    """Extract vectors for every surviving word of every document.

    ``documents`` yields pre-tokenized documents (sequences of words); the
    position in the iterable is the document id.  Words emptied by cleanup,
    or that subtokenize to nothing, are dropped and counted.  Documents left
    without any words produce no rows and no metadata.
    """
    config.validate()
    encoder = Encoder(config.model)
    encoder.validate_layer(config.layer_index)
    capacity = _resolve_capacity(config, encoder)
    out_path = Path(out_path)

    type_ids: dict[str, int] = {}
    surfaces: list[str] = []
    doc_frequencies: list[int] = []
    last_doc_of_type: list[int] = []
    meta_rows: dict[int, dict[str, str]] = {}

    documents_out = 0
    words_out = 0
    dropped = 0
    blocks_out = 0

    pending: list[tuple[int, list[WordGroup]]] = []

    with TokenSink(out_path, encoder.dim, subword_groups=True) as sink:

        def flush() -> None:
            nonlocal words_out
            if not pending:
                return
            flat = [
                [piece for group in block for piece in group.piece_ids]
                for _, block in pending
            ]
            batch_vectors = encoder.encode_blocks(flat, config.layer_index)
            for (doc_id, block), vectors in zip(pending, batch_vectors):
                offset = 0
                for group in block:
                    size = len(group.piece_ids)
                    sink.append_group(
                        doc_id,
                        group.word_index,
                        group.type_id,
                        vectors[offset : offset + size],
                    )
                    offset += size
                    words_out += 1
            pending.clear()

        for doc_id, words in enumerate(documents):
            cleaned, dropped_here = scrub_words(list(words))
            dropped += dropped_here
            groups: list[WordGroup] = []
            for word in cleaned:
                pieces = encoder.subtokenize(word)
                if not pieces:
                    dropped += 1
                    continue
                type_id = type_ids.get(word)
                if type_id is None:
                    type_id = len(surfaces)
                    type_ids[word] = type_id
                    surfaces.append(word)
                    doc_frequencies.append(0)
                    last_doc_of_type.append(-1)
                if last_doc_of_type[type_id] != doc_id:
                    last_doc_of_type[type_id] = doc_id
                    doc_frequencies[type_id] += 1
                groups.append(WordGroup(len(groups), type_id, pieces))
            if not groups:
                continue
            documents_out += 1
            meta_rows[doc_id] = {"line": str(doc_id + 1)}
            for block in pack_blocks(groups, capacity):
                pending.append((doc_id, block))
                blocks_out += 1
                if len(pending) >= config.batch_size:
                    flush()
        flush()
        rows_out = sink.count

    write_vocabulary_sidecar(out_path, surfaces, doc_frequencies, documents_out)
    write_metadata_sidecar(out_path, meta_rows)

    report = ExtractionReport(
        documents=documents_out,
        words=words_out,
        subword_rows=rows_out,
        dropped_words=dropped,
        types=len(surfaces),
        dim=encoder.dim,
        blocks=blocks_out,
    )
    logger.info(
        "wrote %d word groups (%d subtoken rows, %d types) from %d documents "
        "to %s; %d blocks, dim %d, %d words dropped by cleanup",
        report.words,
        report.subword_rows,
        report.types,
        report.documents,
        out_path,
        report.blocks,
        report.dim,
        report.dropped_words,
    )
    return report
