"""Unicode cleanup applied to words before subtokenization.

Control (Cc), format (Cf), private-use (Co), and surrogate (Cs) codepoints
carry no written content but routinely survive scraped or OCR'd text; they
are deleted outright.  Everything else passes through untouched — case
folding and normalization are the tokenizer's business, not ours.
"""

from __future__ import annotations

import unicodedata

STRIPPED_CATEGORIES = frozenset({"Cc", "Cf", "Co", "Cs"})


def scrub_word(word: str) -> str:
    """Remove control, format, private-use, and surrogate codepoints."""
    return "".join(
        ch for ch in word if unicodedata.category(ch) not in STRIPPED_CATEGORIES
    )


def scrub_words(words: list[str]) -> tuple[list[str], int]:
    """Scrub every word, dropping those left empty.

    Returns the surviving words in their original order and the number of
    words that were dropped because nothing remained after cleanup.
    """
    kept: list[str] = []
    dropped = 0
    for word in words:
        cleaned = scrub_word(word)
        if cleaned:
            kept.append(cleaned)
        else:
            dropped += 1
    return kept, dropped
