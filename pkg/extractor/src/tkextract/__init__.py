"""Dump per-token transformer hidden states into a binary embedding corpus.

The package reads pre-tokenized text (one document per line, words separated
by whitespace), runs each document through a transformer encoder, and writes
one vector row per subtoken to a compact binary file.  Subtokens belonging to
the same word share a (document id, word index) pair so downstream consumers
can rebuild word-level vectors; the extractor itself never averages,
normalizes, or filters anything.
"""

from tkextract.errors import ExtractorConfigError, ExtractorDataError, ExtractorError
from tkextract.extract import ExtractionReport, ExtractorConfig, run_extraction

__all__ = [
    "ExtractionReport",
    "ExtractorConfig",
    "ExtractorConfigError",
    "ExtractorDataError",
    "ExtractorError",
    "run_extraction",
]

__version__ = "0.1.0"
