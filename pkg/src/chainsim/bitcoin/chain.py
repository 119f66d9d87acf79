"""A node's local view of the block tree and its tip selection."""
from __future__ import annotations

from collections import defaultdict

from chainsim.bitcoin.blocks import GENESIS, Block


def _rank(block: Block, first_seen: dict[int, int]):
    # higher is better: height, then earliest seen, then smallest id
    return (block.height, -first_seen[block.item_id], -block.item_id)


class ChainView:
    def __init__(self):
        self.known_blocks: dict[int, Block] = {GENESIS.item_id: GENESIS}
        self.orphans: dict[int, list[Block]] = defaultdict(list)
        self.orphan_ids: set[int] = set()
        self.first_seen: dict[int, int] = {GENESIS.item_id: 0}
        self.tip: int = GENESIS.item_id

    @property
    def tip_block(self) -> Block:
        return self.known_blocks[self.tip]

    @property
    def height(self) -> int:
        return self.tip_block.height

    def has(self, block_id: int) -> bool:
        """Known, either integrated or waiting as an orphan."""
        return block_id in self.known_blocks or block_id in self.orphan_ids

    def see(self, block: Block, step: int) -> bool:
        """Record first sight; False if the block was already seen."""
        if block.item_id in self.first_seen:
            return False
        self.first_seen[block.item_id] = step
        return True

    def add(self, block: Block) -> list[Block]:
        """Integrate ``block`` (already seen) and any orphans it unblocks.

        Returns the newly integrated blocks in parent-before-child order; an
        empty list means the block was parked as an orphan or was a duplicate.
        """
        if block.item_id in self.known_blocks:
            return []
        if block.parent_id not in self.known_blocks:
            if block.item_id not in self.orphan_ids:
                self.orphans[block.parent_id].append(block)
                self.orphan_ids.add(block.item_id)
            return []
        added = []
        stack = [block]
        while stack:
            b = stack.pop()
            self.known_blocks[b.item_id] = b
            self.orphan_ids.discard(b.item_id)
            added.append(b)
            children = self.orphans.pop(b.item_id, ())
            stack.extend(sorted(children, key=lambda c: c.item_id, reverse=True))
        best = self.tip_block
        for b in added:
            if _rank(b, self.first_seen) > _rank(best, self.first_seen):
                best = b
        self.tip = best.item_id
        return added

    def ancestors(self, block_id: int):
        """Yield ``block_id`` and its ancestors down to genesis."""
        while block_id in self.known_blocks:
            yield block_id
            if block_id == GENESIS.item_id:
                return
            block_id = self.known_blocks[block_id].parent_id


def choose_tip(view: ChainView) -> int:
    """Full-scan tip choice: maximal height, then earliest first-seen, then smallest id."""
    return max(view.known_blocks.values(), key=lambda b: _rank(b, view.first_seen)).item_id
