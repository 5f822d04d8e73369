"""Domain types shared by every placement policy.

Accounts are identified by opaque hex strings.  The mapping service holds the
authoritative account-to-shard assignment; shard states track per-round
residual capacity and a rolling per-block load window; alignment vectors
accumulate per-shard transaction costs over the same window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

AccountId = str
ShardId = int
BlockHeight = int

EOA = "eoa"
CA = "ca"


class InsufficientCapacity(Exception):
    """Charge exceeds the shard's residual capacity for this round."""


@dataclass(frozen=True)
class Account:
    id: AccountId
    kind: str = EOA
    size: int = 1
    created_at: BlockHeight = 0

    def __post_init__(self):
        if self.kind == EOA and self.size != 1:
            raise ValueError("EOA size is fixed to 1")
        if self.size < 1:
            raise ValueError("account size must be positive")


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    arrival_index: int
    write_set: tuple
    fee: int = 1
    base_cost: int = 1

    def __post_init__(self):
        if not self.write_set:
            raise ValueError("write_set must be nonempty")
        if len(set(self.write_set)) != len(self.write_set):
            raise ValueError("write_set has duplicate accounts")
        if self.fee < 0 or self.base_cost <= 0:
            raise ValueError("fee must be nonnegative and base_cost positive")


@dataclass(frozen=True)
class MigrationOp:
    account: AccountId
    source: ShardId
    dest: ShardId
    cost: int

    def __post_init__(self):
        if self.source == self.dest:
            raise ValueError("migration source equals destination")
        if self.cost <= 0:
            raise ValueError("migration cost must be positive")


@dataclass(frozen=True)
class CostModel:
    """Per-shard transaction charges.

    An intra-shard transaction charges base_cost to its single shard; a
    cross-shard transaction charges base_cost * cross_shard_cost to every
    involved shard.
    """

    cross_shard_cost: int = 2

    def per_shard_charge(self, base_cost: int, n_shards: int) -> int:
        if n_shards <= 1:
            return base_cost
        return base_cost * self.cross_shard_cost

    def migration_cost(self, account: Account | None) -> int:
        # EOA moves cost one cross-shard interaction; CA cost scales with size.
        if account is None or account.kind == EOA:
            return self.cross_shard_cost
        return self.cross_shard_cost * account.size


class MappingService:
    """Versioned, total account-to-shard assignment (phi)."""

    def __init__(self):
        self.assignment: dict[AccountId, ShardId] = {}
        self.version = 0

    def get(self, account: AccountId) -> ShardId | None:
        return self.assignment.get(account)

    def __contains__(self, account: AccountId) -> bool:
        return account in self.assignment

    def place(self, account: AccountId, shard: ShardId) -> None:
        if account in self.assignment:
            raise ValueError(f"account {account} already placed")
        self.assignment[account] = shard
        self.version += 1

    def migrate(self, account: AccountId, dest: ShardId) -> None:
        if account not in self.assignment:
            raise KeyError(account)
        self.assignment[account] = dest
        self.version += 1


class ShardState:
    """Per-round residual capacity plus a W-block rolling load window."""

    __slots__ = ("id", "capacity_per_round", "residual", "window", "_ring", "window_sum")

    def __init__(self, shard_id: ShardId, capacity_per_round: int, window: int):
        if capacity_per_round <= 0 or window <= 0:
            raise ValueError("capacity and window must be positive")
        self.id = shard_id
        self.capacity_per_round = capacity_per_round
        self.residual = capacity_per_round
        self.window = window
        self._ring = deque([0] * window, maxlen=window)
        self.window_sum = 0

    def charge(self, amount: int) -> None:
        if amount < 0:
            raise ValueError("negative charge")
        if amount > self.residual:
            raise InsufficientCapacity(
                f"shard {self.id}: charge {amount} exceeds residual {self.residual}"
            )
        self.residual -= amount
        self._ring[-1] += amount
        self.window_sum += amount

    def advance_block(self) -> None:
        evicted = self._ring[0]
        self._ring.append(0)
        self.window_sum -= evicted
        self.residual = self.capacity_per_round

    def load_window(self) -> list[int]:
        return list(self._ring)


class AlignmentVector:
    """Sliding-window per-shard cost totals for one account.

    Buckets are kept per block and evicted lazily once they fall out of the
    W-block window.
    """

    __slots__ = ("owner", "buckets", "totals")

    def __init__(self, owner: AccountId):
        self.owner = owner
        self.buckets: deque = deque()  # (block, {shard: amount})
        self.totals: dict[ShardId, int] = {}

    def evict_before(self, min_block: int) -> None:
        while self.buckets and self.buckets[0][0] < min_block:
            _, old = self.buckets.popleft()
            for shard, amount in old.items():
                remaining = self.totals[shard] - amount
                if remaining:
                    self.totals[shard] = remaining
                else:
                    del self.totals[shard]

    def add(self, block: int, shard: ShardId, amount: int) -> None:
        if not self.buckets or self.buckets[-1][0] != block:
            self.buckets.append((block, {}))
        bucket = self.buckets[-1][1]
        bucket[shard] = bucket.get(shard, 0) + amount
        self.totals[shard] = self.totals.get(shard, 0) + amount

    def is_empty(self) -> bool:
        return not self.totals


class AlignmentBook:
    """All live alignment vectors, advanced in lockstep with the block clock.

    Vectors with all-zero totals are dropped and recreated on demand, so only
    recently active accounts occupy memory.
    """

    def __init__(self, window: int):
        if window <= 0:
            raise ValueError("window must be positive")
        self.window = window
        self.block = 0
        self._vectors: dict[AccountId, AlignmentVector] = {}

    @property
    def _min_block(self) -> int:
        return self.block - self.window + 1

    def add(self, account: AccountId, shard: ShardId, amount: int) -> None:
        if amount < 0:
            raise ValueError("negative alignment delta")
        if amount == 0:
            return
        vec = self._vectors.get(account)
        if vec is None:
            vec = self._vectors[account] = AlignmentVector(account)
        vec.add(self.block, shard, amount)

    def totals(self, account: AccountId) -> dict[ShardId, int]:
        vec = self._vectors.get(account)
        if vec is None:
            return {}
        vec.evict_before(self._min_block)
        if vec.is_empty():
            del self._vectors[account]
            return {}
        return vec.totals

    def reset(self, account: AccountId) -> None:
        # Alignment is dropped entirely when the owner migrates.
        self._vectors.pop(account, None)

    def advance_block(self) -> None:
        self.block += 1
        if self.block % self.window == 0:
            self._sweep()

    def _sweep(self) -> None:
        min_block = self._min_block
        dead = []
        for account, vec in self._vectors.items():
            vec.evict_before(min_block)
            if vec.is_empty():
                dead.append(account)
        for account in dead:
            del self._vectors[account]

    def live_accounts(self) -> set[AccountId]:
        self._sweep()
        return set(self._vectors)


def involved_shards(write_set, mapping: MappingService) -> set[ShardId]:
    """Shards of the already-placed accounts in the write set.

    Unplaced (new) accounts are skipped; the result is empty iff every
    account is new.
    """
    shards = set()
    for account in write_set:
        shard = mapping.get(account)
        if shard is not None:
            shards.add(shard)
    return shards


def update_alignments(
    tx: Transaction, mapping: MappingService, cost_model: CostModel, book: AlignmentBook
) -> None:
    """Apply the pairwise alignment rule over all ordered account pairs.

    Each account's alignment toward every counterparty's (post-migration)
    shard grows by the per-shard charge of the transaction.
    """
    shards = {acc: mapping.get(acc) for acc in tx.write_set}
    if any(s is None for s in shards.values()):
        raise ValueError("update_alignments requires a fully placed write set")
    charge = cost_model.per_shard_charge(tx.base_cost, len(set(shards.values())))
    for acc in tx.write_set:
        for other in tx.write_set:
            if other != acc:
                book.add(acc, shards[other], charge)
