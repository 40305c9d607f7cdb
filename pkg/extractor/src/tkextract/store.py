"""Binary corpus writer and TSV sidecars.

File layout (little-endian):

* header — magic ``TKC1``, version u32, vector dim u32, row count u64,
  flags u32 (bit 0 set when subtokens of one word share a word index);
* rows — ``doc_id`` u32, ``word_index`` u32, ``type_id`` u32, then ``dim``
  float32 vector components.

Two TSV sidecars travel with the binary file and share its stem:

* ``<stem>.vocab.tsv`` — first line ``#total_docs<TAB>N``, then one row per
  type id in order: ``surface<TAB>document_frequency<TAB>tag`` ("-" when the
  type has no tag);
* ``<stem>.meta.tsv`` — one row per document, sorted by id:
  ``doc_id<TAB>key=value...`` with keys sorted within the row.

The writer is append-only and single-threaded: the header is stamped with a
zero row count up front and rewritten with the true count on close.
"""

from __future__ import annotations

import struct
from pathlib import Path
from types import TracebackType

import numpy as np

MAGIC = b"TKC1"
VERSION = 1
HEADER = struct.Struct("<4sIIQI")
FLAG_SUBWORD_GROUPS = 1


def record_dtype(dim: int) -> np.dtype:
    """The on-disk layout of one vector row."""
    return np.dtype(
        [
            ("doc_id", "<u4"),
            ("word_index", "<u4"),
            ("type_id", "<u4"),
            ("vector", "<f4", (dim,)),
        ]
    )


class TokenSink:
    """Append-only writer for the binary corpus format."""

    def __init__(self, path: str | Path, dim: int, *, subword_groups: bool = True):
        if dim < 1:
            raise ValueError(f"vector dimension must be >= 1, got {dim}")
        self.path = Path(path)
        self.dim = dim
        self.count = 0
        self.flags = FLAG_SUBWORD_GROUPS if subword_groups else 0
        self._dtype = record_dtype(dim)
        self._fh = open(self.path, "wb")
        self._fh.write(HEADER.pack(MAGIC, VERSION, dim, 0, self.flags))

    def append_group(
        self, doc_id: int, word_index: int, type_id: int, vectors: np.ndarray
    ) -> None:
        """Write one row per subtoken of a word, all sharing its ids."""
        rows = np.empty(len(vectors), dtype=self._dtype)
        rows["doc_id"] = doc_id
        rows["word_index"] = word_index
        rows["type_id"] = type_id
        rows["vector"] = np.asarray(vectors, dtype=np.float32)
        self._fh.write(rows.tobytes())
        self.count += len(vectors)

    def close(self) -> None:
        """Rewrite the header with the final row count and close the file."""
        self._fh.seek(0)
        self._fh.write(HEADER.pack(MAGIC, VERSION, self.dim, self.count, self.flags))
        self._fh.close()

    def __enter__(self) -> "TokenSink":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()


def vocabulary_sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".vocab.tsv")


def metadata_sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".meta.tsv")


def write_vocabulary_sidecar(
    corpus_path: str | Path,
    surfaces: list[str],
    doc_frequencies: list[int],
    total_docs: int,
) -> Path:
    """Write the vocabulary sidecar; row order defines the type ids."""
    out = vocabulary_sidecar(corpus_path)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"#total_docs\t{total_docs}\n")
        for surface, df in zip(surfaces, doc_frequencies):
            if "\t" in surface or "\n" in surface:
                raise ValueError(f"surface {surface!r} contains a tab or newline")
            fh.write(f"{surface}\t{df}\t-\n")
    return out


def write_metadata_sidecar(
    corpus_path: str | Path, rows: dict[int, dict[str, str]]
) -> Path:
    """Write per-document key=value metadata, sorted by document id."""
    out = metadata_sidecar(corpus_path)
    with open(out, "w", encoding="utf-8") as fh:
        for doc_id in sorted(rows):
            cells = [str(doc_id)]
            fields = rows[doc_id]
            for key in sorted(fields):
                value = str(fields[key])
                if any(c in key for c in "\t\n="):
                    raise ValueError(f"metadata key {key!r} contains =, tab or newline")
                if "\t" in value or "\n" in value:
                    raise ValueError(f"metadata value {value!r} contains tab or newline")
                cells.append(f"{key}={value}")
            fh.write("\t".join(cells) + "\n")
    return out
