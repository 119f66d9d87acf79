"""Bitcoin nodes: honest miners with Inv/GetData/Block relay, and a selfish miner."""
from __future__ import annotations

from chainsim.bitcoin.blocks import (
    Block,
    GetDataMsg,
    InvMsg,
    MinerParams,
    ProtocolParams,
    create_block,
    mining_probability,
)
from chainsim.bitcoin.chain import ChainView
from chainsim.engine import Node, Packet
from chainsim.rng import RngStream, bernoulli_threshold, derive_rng


class Miner(Node):
    """Honest participant. Mines on its best tip and relays what it accepts."""

    def __init__(
        self,
        node_id: int,
        region: str,
        params: MinerParams,
        master_seed: int,
        protocol: ProtocolParams = ProtocolParams(),
    ):
        super().__init__(node_id, region)
        self.params = params
        self.protocol = protocol
        self.probability = mining_probability(params)
        self.threshold = bernoulli_threshold(self.probability)
        self.rng_mining: RngStream = derive_rng(master_seed, node_id, "mining")
        self.rng_txcount: RngStream = derive_rng(master_seed, node_id, "txcount")
        self.rng_txsize: RngStream = derive_rng(master_seed, node_id, "txsize")
        self.view = ChainView()
        self.requested: set[int] = set()
        self.announced: set[int] = set()
        self.source: dict[int, int] = {}
        self._next_mine: int | None = None

    # -- mining --------------------------------------------------------------

    def mines_at(self, step: int) -> bool:
        """The single Bernoulli draw for ``step``."""
        return self.threshold > 0 and self.rng_mining.bits_at(step) < self.threshold

    def next_timer(self, step: int, horizon: int) -> int | None:
        if self.threshold == 0:
            return None
        if self._next_mine is None or self._next_mine <= step:
            hit = self.rng_mining.first_success(step + 1, horizon, self.threshold)
            self._next_mine = horizon if hit is None else hit
        return None if self._next_mine >= horizon else self._next_mine

    def mining_parent(self) -> Block:
        return self.view.tip_block

    def act(self, step: int) -> None:
        if self.mines_at(step):
            block = create_block(
                self.new_item_id(),
                self.node_id,
                self.mining_parent(),
                step,
                self.rng_txcount,
                self.rng_txsize,
                self.protocol,
            )
            self.log(
                step,
                "BLOCK_MINED",
                block.item_id,
                parent=block.parent_id,
                height=block.height,
                tx_count=block.tx_count,
                size_bytes=block.size_bytes,
            )
            self.on_own_block(block, step)

    def on_own_block(self, block: Block, step: int) -> None:
        self.view.see(block, step)
        self._integrate(block, step)
        self.announce(block, step)

    # -- gossip --------------------------------------------------------------

    def announce(self, block: Block, step: int, exclude: int | None = None) -> None:
        if block.item_id in self.announced:
            return
        self.announced.add(block.item_id)
        for peer in self.peers:
            if peer == exclude:
                continue
            inv = InvMsg(self.new_item_id(), self.node_id, step, self.protocol.inv_bytes, block.item_id)
            self.send(peer, inv)
            self.log(step, "INV_SENT", block.item_id, to=peer)

    def request(self, block_id: int, peer: int, step: int) -> None:
        msg = GetDataMsg(self.new_item_id(), self.node_id, step, self.protocol.getdata_bytes, block_id)
        self.send(peer, msg)
        self.log(step, "GETDATA_SENT", block_id, to=peer)

    def receive(self, packet: Packet, step: int) -> None:
        item = packet.payload
        if isinstance(item, InvMsg):
            if not self.view.has(item.block_id) and item.block_id not in self.requested:
                self.requested.add(item.block_id)
                self.request(item.block_id, packet.sender, step)
        elif isinstance(item, GetDataMsg):
            block = self.view.known_blocks.get(item.block_id)
            if block is not None:
                self.send(packet.sender, block)
        elif isinstance(item, Block):
            self.on_block(item, packet.sender, step)

    def on_block(self, block: Block, sender: int, step: int) -> None:
        if not self.view.see(block, step):
            return
        self.source[block.item_id] = sender
        self.log(step, "BLOCK_RECEIVED", block.item_id, **{"from": sender})
        pub_height = self.view.height
        added = self._integrate(block, step)
        if not added:
            if not self.view.has(block.parent_id):
                self.requested.add(block.parent_id)
                self.request(block.parent_id, sender, step)
            return
        self.on_accepted(added, pub_height, step)

    def on_accepted(self, added: list[Block], prev_height: int, step: int) -> None:
        for b in added:
            self.announce(b, step, exclude=self.source.get(b.item_id))

    def _integrate(self, block: Block, step: int) -> list[Block]:
        old_tip = self.view.tip
        added = self.view.add(block)
        if self.view.tip != old_tip:
            self.log(step, "TIP_CHANGED", self.view.tip, height=self.view.height)
        return added


class SelfishMiner(Miner):
    """Withholds its blocks and releases them strategically.

    ``branch`` holds the private fork from the last common block; the first
    ``published`` of its blocks have been announced.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.branch: list[Block] = []
        self.published = 0

    @property
    def lead(self) -> int:
        return self.branch[-1].height - self.view.height if self.branch else 0

    def mining_parent(self) -> Block:
        return self.branch[-1] if self.branch else self.view.tip_block

    def on_own_block(self, block: Block, step: int) -> None:
        racing = bool(self.branch) and self.lead == 0
        self.branch.append(block)
        if racing:
            # the race is won by extending our own published block
            self._publish(len(self.branch), step)
            self._drop_branch()

    def on_accepted(self, added: list[Block], prev_height: int, step: int) -> None:
        if not self.branch:
            super().on_accepted(added, prev_height, step)
            return
        if self.view.height <= prev_height:
            return
        lead = self.lead
        if lead < 0:
            self._drop_branch()
            super().on_accepted(added, prev_height, step)
        elif lead == 0:
            self._publish(len(self.branch), step)
        elif lead == 1:
            self._publish(len(self.branch), step)
            self._drop_branch()
        else:
            public_height = self.view.height
            n = sum(1 for b in self.branch if b.height <= public_height)
            self._publish(n, step)

    def _publish(self, upto: int, step: int) -> None:
        for block in self.branch[self.published:upto]:
            self.view.see(block, block.created_step)
            self._integrate(block, step)
            self.announce(block, step)
        self.published = max(self.published, upto)

    def _drop_branch(self) -> None:
        self.branch = []
        self.published = 0
