"""Document-frequency vocabulary filter.

A type survives when it appears in at least min_doc_count documents and
in at most max_doc_fraction of all documents. Type ids are never
renumbered: filtering only drops token rows, so vocabulary sidecars stay
valid for the filtered file.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .corpus import TokenRecord, TokenTable, Vocabulary
from .errors import ConfigError

DEFAULT_MAX_DOC_FRACTION = 0.25
DEFAULT_MIN_DOC_COUNT = 5


@dataclass
class FilterPolicy:
    max_doc_fraction: float = DEFAULT_MAX_DOC_FRACTION
    min_doc_count: int = DEFAULT_MIN_DOC_COUNT

    def __post_init__(self) -> None:
        if not (0.0 < self.max_doc_fraction <= 1.0):
            raise ConfigError(
                f"max_doc_fraction must be in (0, 1], got {self.max_doc_fraction}"
            )
        if self.min_doc_count < 1:
            raise ConfigError(
                f"min_doc_count must be at least 1, got {self.min_doc_count}"
            )


def keep_mask(vocab: Vocabulary, policy: FilterPolicy) -> np.ndarray:
    """Boolean mask over type ids; True marks a type that survives.

    The upper bound is strict on the fraction itself: a type is dropped
    only when doc_frequency / total_docs exceeds max_doc_fraction, so a
    type in exactly a quarter of the documents survives the default.
    """
    if vocab.total_docs <= 0:
        raise ConfigError("vocabulary reports zero documents; cannot filter")
    if policy.min_doc_count > policy.max_doc_fraction * vocab.total_docs:
        raise ConfigError(
            f"degenerate policy for {vocab.total_docs} documents: "
            f"min_doc_count={policy.min_doc_count} exceeds "
            f"max_doc_fraction={policy.max_doc_fraction} of the collection"
        )
    freqs = vocab.doc_frequencies()
    fractions = freqs / float(vocab.total_docs)
    mask = (freqs >= policy.min_doc_count) & ~(fractions > policy.max_doc_fraction)
    if len(mask) > 0 and not mask.any():
        raise ConfigError(
            "filter policy removes every type "
            f"(max_doc_fraction={policy.max_doc_fraction}, "
            f"min_doc_count={policy.min_doc_count})"
        )
    return mask


def filter_tokens(
    records: Iterable[TokenRecord], vocab: Vocabulary, policy: FilterPolicy
) -> tuple[Iterator[TokenRecord], np.ndarray]:
    """Drop token rows whose type fails the policy.

    Returns the surviving stream and the keep mask that produced it.
    """
    mask = keep_mask(vocab, policy)

    def kept() -> Iterator[TokenRecord]:
        for rec in records:
            if mask[rec.type_id]:
                yield rec

    return kept(), mask


def filter_table(table: TokenTable, mask: np.ndarray) -> TokenTable:
    return table.select(mask[table.type_ids])
