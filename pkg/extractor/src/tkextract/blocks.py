"""Packing word groups into encoder blocks.

A *group* is the run of subtoken ids produced by one word.  Blocks are filled
greedily in document order, and a group never straddles two blocks: when a
group does not fit into the space left in the current block, the block is
closed and the group starts the next one.  A group longer than a whole block
cannot be represented at all and is reported as a data error.
"""

from __future__ import annotations

from dataclasses import dataclass

from tkextract.errors import ExtractorDataError


@dataclass(frozen=True)
class WordGroup:
    """One surviving word: its position, vocabulary id, and subtoken ids."""

    word_index: int
    type_id: int
    piece_ids: tuple[int, ...]


def pack_blocks(groups: list[WordGroup], capacity: int) -> list[list[WordGroup]]:
    """Split ``groups`` into maximal blocks of at most ``capacity`` subtokens.

    Greedy, order-preserving, no overlap.  Raises ExtractorDataError when a
    single group exceeds ``capacity``.
    """
    if capacity < 1:
        raise ExtractorDataError(f"block capacity must be >= 1, got {capacity}")
    blocks: list[list[WordGroup]] = []
    current: list[WordGroup] = []
    used = 0
    for group in groups:
        size = len(group.piece_ids)
        if size > capacity:
            raise ExtractorDataError(
                f"word at index {group.word_index} spans {size} subtokens, "
                f"more than the block capacity of {capacity}"
            )
        if used + size > capacity:
            blocks.append(current)
            current = []
            used = 0
        current.append(group)
        used += size
    if current:
        blocks.append(current)
    return blocks
