"""Block packing: maximal greedy blocks that never split a word group."""

import pytest

from tkextract.blocks import WordGroup, pack_blocks
from tkextract.errors import ExtractorDataError


def groups_of(*sizes: int) -> list[WordGroup]:
    return [
        WordGroup(word_index=i, type_id=i, piece_ids=tuple(range(size)))
        for i, size in enumerate(sizes)
    ]


def block_size(block: list[WordGroup]) -> int:
    return sum(len(g.piece_ids) for g in block)


def test_group_that_does_not_fit_starts_the_next_block():
    blocks = pack_blocks(groups_of(3, 3), capacity=5)
    assert [len(b) for b in blocks] == [1, 1]
    assert [block_size(b) for b in blocks] == [3, 3]


def test_exact_fit_stays_in_one_block():
    blocks = pack_blocks(groups_of(2, 3), capacity=5)
    assert len(blocks) == 1
    assert block_size(blocks[0]) == 5


def test_group_equal_to_capacity_is_allowed():
    blocks = pack_blocks(groups_of(4), capacity=4)
    assert len(blocks) == 1


def test_group_larger_than_capacity_is_a_data_error():
    with pytest.raises(ExtractorDataError, match="spans 5 subtokens"):
        pack_blocks(groups_of(5), capacity=4)


def test_empty_input_packs_to_no_blocks():
    assert pack_blocks([], capacity=10) == []


def test_nonpositive_capacity_is_rejected():
    with pytest.raises(ExtractorDataError):
        pack_blocks(groups_of(1), capacity=0)


def test_packing_is_greedy_order_preserving_and_within_capacity():
    sizes = [1, 4, 2, 2, 3, 1, 1, 1, 5, 2, 2, 4, 1, 3]
    capacity = 6
    groups = groups_of(*sizes)
    blocks = pack_blocks(groups, capacity)

    # Order-preserving partition of the input.
    flattened = [g for block in blocks for g in block]
    assert flattened == groups

    # Every block fits.
    assert all(block_size(b) <= capacity for b in blocks)

    # Maximality: the first group of each later block would not have fit
    # into the block before it.
    for prev, nxt in zip(blocks, blocks[1:]):
        assert block_size(prev) + len(nxt[0].piece_ids) > capacity
