"""Topic modeling by clustering token-level context vectors.

The pipeline: ingest raw token vectors (merging subword rows), filter
the vocabulary by document frequency, optionally reduce dimensionality,
cluster unit vectors with spherical k-means, then summarize, score, and
analyze the resulting topics. A collapsed Gibbs sampler provides a
bag-of-words baseline over the same corpus files.
"""

__version__ = "0.1.0"

from . import analysis, cluster, corpus, filtering, lda, metrics, reduce, topics
from .errors import (
    ConfigError,
    FormatError,
    InsufficientDataError,
    IntegrityError,
    TokenTopicsError,
)

__all__ = [
    "analysis",
    "cluster",
    "corpus",
    "filtering",
    "lda",
    "metrics",
    "reduce",
    "topics",
    "ConfigError",
    "FormatError",
    "InsufficientDataError",
    "IntegrityError",
    "TokenTopicsError",
    "__version__",
]
