"""Token corpus storage: a binary token file plus two TSV sidecars.

Binary layout (all integers little-endian):

    header:  magic "TKC1" | version u32 | dim u32 | token_count u64 | flags u32
    record:  doc_id u32 | word_index u32 | type_id u32 | dim * float32

flags bit 0 marks a file whose rows are raw subword vectors that still
need merging; everything else must be zero.

Sidecars live next to the token file:

    <stem>.vocab.tsv   one row per type id: surface, doc_frequency, pos tag
                       ("-" when no tag is known)
    <stem>.meta.tsv    one row per document: doc_id, then key=value fields

The vocabulary row index is the type id, so rows must never be reordered
or dropped without rewriting the token file.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import FormatError, IntegrityError

MAGIC = b"TKC1"
VERSION = 1
FLAG_SUBWORD_GROUPS = 0x1

_HEADER = struct.Struct("<4sIIQI")
_U32_MAX = 0xFFFFFFFF

# Records are read and written through this dtype; "<" pins byte order so
# files are portable across hosts.
def _record_dtype(dim: int) -> np.dtype:
    return np.dtype(
        [
            ("doc_id", "<u4"),
            ("word_index", "<u4"),
            ("type_id", "<u4"),
            ("vector", "<f4", (dim,)),
        ]
    )


@dataclass
class CorpusHeader:
    dim: int
    token_count: int
    has_subword_groups: bool = False
    version: int = VERSION


@dataclass
class TokenRecord:
    """One token occurrence with its context vector."""

    doc_id: int
    word_index: int
    type_id: int
    vector: np.ndarray


@dataclass
class VocabEntry:
    surface: str
    doc_frequency: int
    pos_tag: str | None = None


class Vocabulary:
    """Immutable type-id -> (surface, doc frequency, POS tag) table."""

    def __init__(self, entries: list[VocabEntry], total_docs: int):
        surfaces = [e.surface for e in entries]
        if len(set(surfaces)) != len(surfaces):
            raise IntegrityError("vocabulary has duplicate surface forms")
        if total_docs < 0:
            raise IntegrityError("total_docs must be non-negative")
        self.entries = list(entries)
        self.total_docs = int(total_docs)
        self._by_surface = {e.surface: i for i, e in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def surface(self, type_id: int) -> str:
        return self.entries[type_id].surface

    def doc_frequency(self, type_id: int) -> int:
        return self.entries[type_id].doc_frequency

    def pos_tag(self, type_id: int) -> str | None:
        return self.entries[type_id].pos_tag

    def type_id(self, surface: str) -> int | None:
        return self._by_surface.get(surface)

    def doc_frequencies(self) -> np.ndarray:
        return np.array([e.doc_frequency for e in self.entries], dtype=np.int64)

    def with_doc_frequencies(self, freqs: np.ndarray, total_docs: int) -> "Vocabulary":
        if len(freqs) != len(self.entries):
            raise IntegrityError(
                f"frequency vector has {len(freqs)} entries, vocabulary has {len(self.entries)}"
            )
        entries = [
            VocabEntry(e.surface, int(f), e.pos_tag)
            for e, f in zip(self.entries, freqs)
        ]
        return Vocabulary(entries, total_docs)


@dataclass
class DocumentMeta:
    """Per-document label fields keyed by doc id."""

    fields: dict[int, dict[str, str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.fields)

    def label(self, doc_id: int, scheme: str) -> str | None:
        row = self.fields.get(doc_id)
        if row is None:
            return None
        return row.get(scheme)


class TokenTable:
    """In-memory columnar view of a token file."""

    def __init__(
        self,
        doc_ids: np.ndarray,
        word_indices: np.ndarray,
        type_ids: np.ndarray,
        vectors: np.ndarray,
    ):
        n = len(doc_ids)
        if not (len(word_indices) == len(type_ids) == len(vectors) == n):
            raise IntegrityError("token table columns have mismatched lengths")
        self.doc_ids = np.asarray(doc_ids, dtype=np.int64)
        self.word_indices = np.asarray(word_indices, dtype=np.int64)
        self.type_ids = np.asarray(type_ids, dtype=np.int64)
        self.vectors = np.asarray(vectors)

    def __len__(self) -> int:
        return len(self.doc_ids)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def records(self) -> Iterator[TokenRecord]:
        for i in range(len(self)):
            yield TokenRecord(
                int(self.doc_ids[i]),
                int(self.word_indices[i]),
                int(self.type_ids[i]),
                self.vectors[i],
            )

    @classmethod
    def from_records(cls, records: Iterable[TokenRecord]) -> "TokenTable":
        rows = list(records)
        if not rows:
            return cls(
                np.zeros(0, np.int64),
                np.zeros(0, np.int64),
                np.zeros(0, np.int64),
                np.zeros((0, 0), np.float32),
            )
        vectors = np.stack([np.asarray(r.vector) for r in rows])
        return cls(
            np.array([r.doc_id for r in rows], np.int64),
            np.array([r.word_index for r in rows], np.int64),
            np.array([r.type_id for r in rows], np.int64),
            vectors,
        )

    def select(self, mask: np.ndarray) -> "TokenTable":
        return TokenTable(
            self.doc_ids[mask],
            self.word_indices[mask],
            self.type_ids[mask],
            self.vectors[mask],
        )


class TokenWriter:
    """Streaming writer; the header token count is patched on close."""

    def __init__(self, path: str | Path, dim: int, has_subword_groups: bool = False):
        if dim <= 0:
            raise FormatError(f"vector dimension must be positive, got {dim}")
        self.path = Path(path)
        self.dim = int(dim)
        self.flags = FLAG_SUBWORD_GROUPS if has_subword_groups else 0
        self._count = 0
        self._fh = open(self.path, "wb")
        self._fh.write(_HEADER.pack(MAGIC, VERSION, self.dim, 0, self.flags))
        self._prefix = struct.Struct("<III")

    def write(self, record: TokenRecord) -> None:
        vec = np.asarray(record.vector)
        if vec.shape != (self.dim,):
            raise IntegrityError(
                f"record vector has shape {vec.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise IntegrityError(
                f"record for doc {record.doc_id} word {record.word_index} "
                "has a non-finite vector component"
            )
        for name, value in (
            ("doc_id", record.doc_id),
            ("word_index", record.word_index),
            ("type_id", record.type_id),
        ):
            if not (0 <= value <= _U32_MAX):
                raise IntegrityError(f"{name} {value} does not fit in u32")
        self._fh.write(
            self._prefix.pack(record.doc_id, record.word_index, record.type_id)
        )
        self._fh.write(vec.astype("<f4", copy=False).tobytes())
        self._count += 1

    @property
    def count(self) -> int:
        return self._count

    def write_batch(
        self,
        doc_ids: np.ndarray,
        word_indices: np.ndarray,
        type_ids: np.ndarray,
        vectors: np.ndarray,
    ) -> None:
        n = len(doc_ids)
        if not (len(word_indices) == len(type_ids) == len(vectors) == n):
            raise IntegrityError("batch columns have mismatched lengths")
        if vectors.shape[1] != self.dim:
            raise IntegrityError(
                f"batch vectors have {vectors.shape[1]} dimensions, expected {self.dim}"
            )
        if not np.all(np.isfinite(vectors)):
            raise IntegrityError("batch contains a non-finite vector component")
        for name, col in (
            ("doc_id", doc_ids),
            ("word_index", word_indices),
            ("type_id", type_ids),
        ):
            arr = np.asarray(col)
            if len(arr) and (arr.min() < 0 or arr.max() > _U32_MAX):
                raise IntegrityError(f"{name} column does not fit in u32")
        block = np.empty(n, dtype=_record_dtype(self.dim))
        block["doc_id"] = doc_ids
        block["word_index"] = word_indices
        block["type_id"] = type_ids
        block["vector"] = vectors.astype("<f4", copy=False)
        self._fh.write(block.tobytes())
        self._count += n

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(0)
        self._fh.write(_HEADER.pack(MAGIC, VERSION, self.dim, self._count, self.flags))
        self._fh.close()

    def __enter__(self) -> "TokenWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_tokens(
    path: str | Path,
    records: Iterable[TokenRecord],
    dim: int,
    has_subword_groups: bool = False,
) -> int:
    """Write records to a token file; returns the number written."""
    with TokenWriter(path, dim, has_subword_groups) as w:
        for rec in records:
            w.write(rec)
        return w.count


def read_header(path: str | Path) -> CorpusHeader:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FormatError(
            f"{path}: truncated header, got {len(raw)} of {_HEADER.size} bytes"
        )
    magic, version, dim, token_count, flags = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise FormatError(f"{path}: header declares zero-dimensional vectors")
    if flags & ~FLAG_SUBWORD_GROUPS:
        raise FormatError(f"{path}: unknown flag bits 0x{flags:x}")
    return CorpusHeader(
        dim=dim,
        token_count=token_count,
        has_subword_groups=bool(flags & FLAG_SUBWORD_GROUPS),
        version=version,
    )


def _check_body_size(path: Path, header: CorpusHeader, body_bytes: int) -> None:
    rec_size = _record_dtype(header.dim).itemsize
    expected = header.token_count * rec_size
    if body_bytes < expected:
        whole = body_bytes // rec_size
        offset = _HEADER.size + whole * rec_size
        raise FormatError(
            f"{path}: truncated at byte {offset}: header declares "
            f"{header.token_count} records but only {whole} are complete"
        )
    if body_bytes > expected:
        raise FormatError(
            f"{path}: {body_bytes - expected} trailing bytes after "
            f"{header.token_count} declared records"
        )


def iter_tokens(
    path: str | Path, chunk_records: int = 8192
) -> Iterator[TokenRecord]:
    """Stream records from a token file without loading it whole."""
    path = Path(path)
    header = read_header(path)
    dtype = _record_dtype(header.dim)
    body_bytes = path.stat().st_size - _HEADER.size
    _check_body_size(path, header, body_bytes)
    seen = 0
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        while seen < header.token_count:
            want = min(chunk_records, header.token_count - seen)
            raw = fh.read(want * dtype.itemsize)
            chunk = np.frombuffer(raw, dtype=dtype)
            if not np.all(np.isfinite(chunk["vector"])):
                bad = int(np.where(~np.isfinite(chunk["vector"]).all(axis=1))[0][0])
                raise IntegrityError(
                    f"{path}: non-finite vector in record {seen + bad}"
                )
            for row in chunk:
                yield TokenRecord(
                    int(row["doc_id"]),
                    int(row["word_index"]),
                    int(row["type_id"]),
                    row["vector"].copy(),
                )
            seen += len(chunk)


def iter_record_batches(path: str | Path, rows: int) -> Iterator[np.ndarray]:
    """Stream structured record blocks of up to `rows` entries in file order."""
    if rows < 1:
        raise FormatError(f"batch rows must be positive, got {rows}")
    path = Path(path)
    header = read_header(path)
    dtype = _record_dtype(header.dim)
    body_bytes = path.stat().st_size - _HEADER.size
    _check_body_size(path, header, body_bytes)
    seen = 0
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        while seen < header.token_count:
            want = min(rows, header.token_count - seen)
            chunk = np.frombuffer(fh.read(want * dtype.itemsize), dtype=dtype)
            seen += len(chunk)
            yield chunk


def iter_vector_batches(path: str | Path, rows: int) -> Iterator[np.ndarray]:
    """Stream (rows, dim) float32 blocks of vectors in file order."""
    for chunk in iter_record_batches(path, rows):
        yield chunk["vector"].copy()


def load_table(path: str | Path) -> tuple[CorpusHeader, TokenTable]:
    """Load a whole token file into columnar arrays."""
    path = Path(path)
    header = read_header(path)
    dtype = _record_dtype(header.dim)
    body_bytes = path.stat().st_size - _HEADER.size
    _check_body_size(path, header, body_bytes)
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        data = np.fromfile(fh, dtype=dtype, count=header.token_count)
    vectors = data["vector"]
    if not np.all(np.isfinite(vectors)):
        bad = int(np.where(~np.isfinite(vectors).all(axis=1))[0][0])
        raise IntegrityError(f"{path}: non-finite vector in record {bad}")
    table = TokenTable(
        data["doc_id"].astype(np.int64),
        data["word_index"].astype(np.int64),
        data["type_id"].astype(np.int64),
        vectors,
    )
    return header, table


def vocab_sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".vocab.tsv")


def meta_sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".meta.tsv")


def write_vocabulary(path: str | Path, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#total_docs\t{vocab.total_docs}\n")
        for e in vocab.entries:
            if "\t" in e.surface or "\n" in e.surface:
                raise FormatError(
                    f"surface form {e.surface!r} contains a tab or newline"
                )
            tag = e.pos_tag if e.pos_tag is not None else "-"
            fh.write(f"{e.surface}\t{e.doc_frequency}\t{tag}\n")


def read_vocabulary(path: str | Path) -> Vocabulary:
    entries: list[VocabEntry] = []
    total_docs: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#total_docs\t"):
                try:
                    total_docs = int(line.split("\t")[1])
                except ValueError as exc:
                    raise FormatError(
                        f"{path}:{lineno}: malformed #total_docs directive"
                    ) from exc
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            surface, freq, tag = parts
            try:
                freq_val = int(freq)
            except ValueError as exc:
                raise FormatError(
                    f"{path}:{lineno}: doc_frequency {freq!r} is not an integer"
                ) from exc
            entries.append(
                VocabEntry(surface, freq_val, None if tag == "-" else tag)
            )
    if total_docs is None:
        raise FormatError(f"{path}: missing #total_docs directive")
    return Vocabulary(entries, total_docs)


def write_metadata(path: str | Path, meta: DocumentMeta) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(meta.fields):
            cells = [str(doc_id)]
            for key, value in sorted(meta.fields[doc_id].items()):
                if "\t" in key or "\n" in key or "=" in key:
                    raise FormatError(f"metadata key {key!r} contains a reserved character")
                if "\t" in value or "\n" in value:
                    raise FormatError(f"metadata value {value!r} contains a reserved character")
                cells.append(f"{key}={value}")
            fh.write("\t".join(cells) + "\n")


def read_metadata(path: str | Path) -> DocumentMeta:
    fields: dict[int, dict[str, str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            try:
                doc_id = int(cells[0])
            except ValueError as exc:
                raise FormatError(
                    f"{path}:{lineno}: doc_id {cells[0]!r} is not an integer"
                ) from exc
            if doc_id in fields:
                raise FormatError(f"{path}:{lineno}: duplicate doc_id {doc_id}")
            row: dict[str, str] = {}
            for cell in cells[1:]:
                if "=" not in cell:
                    raise FormatError(
                        f"{path}:{lineno}: field {cell!r} is not key=value"
                    )
                key, value = cell.split("=", 1)
                row[key] = value
            fields[doc_id] = row
    return DocumentMeta(fields)


def merge_subwords(records: Iterable[TokenRecord]) -> Iterator[TokenRecord]:
    """Average contiguous subword rows into one vector per word position.

    Rows sharing (doc_id, word_index) must be adjacent; a group that
    reappears after other rows intervened means the producer broke its
    ordering contract, which is reported rather than silently merged.
    The mean is taken in float64 before any downstream cast.
    """
    prev_key: tuple[int, int] | None = None
    acc: np.ndarray | None = None
    count = 0
    type_id = -1
    finished_docs: set[int] = set()

    def flush() -> TokenRecord:
        assert prev_key is not None and acc is not None
        return TokenRecord(prev_key[0], prev_key[1], type_id, acc / count)

    for rec in records:
        key = (rec.doc_id, rec.word_index)
        if key == prev_key:
            if rec.type_id != type_id:
                raise IntegrityError(
                    f"doc {rec.doc_id} word {rec.word_index}: subword rows "
                    f"disagree on type_id ({type_id} vs {rec.type_id})"
                )
            acc += rec.vector
            count += 1
            continue
        if prev_key is not None:
            yield flush()
            if rec.doc_id != prev_key[0]:
                finished_docs.add(prev_key[0])
            elif rec.word_index <= prev_key[1]:
                # Covers both a revisited group and an out-of-order fresh one.
                raise IntegrityError(
                    f"doc {rec.doc_id} word {rec.word_index} appears after "
                    f"word {prev_key[1]}; subword groups must be contiguous "
                    "and word positions non-decreasing"
                )
        if rec.doc_id in finished_docs:
            raise IntegrityError(
                f"doc {rec.doc_id} reappears after other documents; "
                "subword groups must be contiguous"
            )
        prev_key = key
        acc = np.asarray(rec.vector, dtype=np.float64).copy()
        count = 1
        type_id = rec.type_id
    if prev_key is not None:
        yield flush()


def compute_doc_frequencies(
    doc_ids: np.ndarray, type_ids: np.ndarray, n_types: int
) -> np.ndarray:
    """Count, per type id, the number of distinct documents it occurs in."""
    if len(doc_ids) == 0:
        return np.zeros(n_types, dtype=np.int64)
    if type_ids.max() >= n_types:
        raise IntegrityError(
            f"type_id {int(type_ids.max())} out of range for vocabulary of {n_types}"
        )
    span = int(doc_ids.max()) + 1
    combined = type_ids.astype(np.int64) * span + doc_ids.astype(np.int64)
    distinct = np.unique(combined)
    return np.bincount(distinct // span, minlength=n_types).astype(np.int64)


def count_documents(doc_ids: np.ndarray) -> int:
    return int(len(np.unique(doc_ids)))
