"""Placement and migration policies behind a single planning interface.

Three policies are provided: a stable hash baseline, a precomputed-partition
baseline, and the load/alignment-driven scheduler.  Planning is a pure
function of the transaction plus snapshots of the mapping, the published
shard loads, and the alignment totals, so any plan can be replayed and
verified bit-for-bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .core import (
    CA,
    AccountId,
    AlignmentBook,
    CostModel,
    MappingService,
    MigrationOp,
    ShardId,
    Transaction,
    involved_shards,
)

HASH = "hash"
PARTITION = "partition"
SCHEDULER = "scheduler"
POLICY_KINDS = (HASH, PARTITION, SCHEDULER)

MODE_2PC = "2pc"
MODE_MUTEX = "mutex"
MODES = (MODE_2PC, MODE_MUTEX)


@dataclass(frozen=True)
class TxPlan:
    tx_id: str
    new_placements: dict
    migrations: tuple
    final_shards: frozenset
    per_shard_charges: dict


def hash_place(account: AccountId, k: int) -> ShardId:
    """Stable uniform placement: first 8 bytes of SHA-256 of the id, mod k.

    The id is hashed as its UTF-8 bytes and the 8-byte prefix is read
    big-endian, so the mapping is identical across runs and platforms.
    """
    if k < 1:
        raise ValueError("k must be positive")
    digest = hashlib.sha256(account.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % k


def select_main_shard(write_set, mapping: MappingService, loads: dict):
    """Least-loaded involved shard (or least-loaded overall if all-new).

    Ties break toward the lowest shard id.  Returns the main shard together
    with the placements for the write set's new accounts.
    """
    involved = involved_shards(write_set, mapping)
    candidates = involved if involved else loads.keys()
    main = min(candidates, key=lambda s: (loads[s], s))
    new_placements = {acc: main for acc in write_set if mapping.get(acc) is None}
    return main, new_placements


def should_migrate(current: ShardId, totals: dict, c_cross: int) -> bool:
    """Migrate unless the account's window alignment favors staying put.

    The account leaves iff c_cross * alignment(current) is strictly below the
    alignment accumulated toward all other shards.
    """
    own = totals.get(current, 0)
    rest = sum(totals.values()) - own
    return c_cross * own < rest


def _charges(final_shards, base_cost: int, cost_model: CostModel) -> dict:
    charge = cost_model.per_shard_charge(base_cost, len(final_shards))
    return {s: charge for s in final_shards}


class HashPolicy:
    kind = HASH

    def __init__(self, k: int):
        self.k = k

    def _place(self, account: AccountId) -> ShardId:
        return hash_place(account, self.k)

    def plan(self, tx: Transaction, mapping, loads, book, cost_model, **_) -> TxPlan:
        new_placements = {}
        final = set()
        for acc in tx.write_set:
            shard = mapping.get(acc)
            if shard is None:
                shard = self._place(acc)
                new_placements[acc] = shard
            final.add(shard)
        return TxPlan(
            tx_id=tx.tx_id,
            new_placements=new_placements,
            migrations=(),
            final_shards=frozenset(final),
            per_shard_charges=_charges(final, tx.base_cost, cost_model),
        )


class PartitionPolicy(HashPolicy):
    """Static placement from a precomputed partition, hash fallback."""

    kind = PARTITION

    def __init__(self, k: int, assignment: dict):
        super().__init__(k)
        self.assignment = assignment

    def _place(self, account: AccountId) -> ShardId:
        shard = self.assignment.get(account)
        if shard is None:
            return hash_place(account, self.k)
        return shard


class SchedulerPolicy:
    """Load-based main-shard selection plus alignment-gated migrations."""

    kind = SCHEDULER

    def __init__(self, k: int, mode: str = MODE_2PC, ca_migration: bool = False):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.k = k
        self.mode = mode
        self.ca_migration = ca_migration

    def plan(
        self,
        tx: Transaction,
        mapping: MappingService,
        loads: dict,
        book: AlignmentBook,
        cost_model: CostModel,
        accounts: dict | None = None,
    ) -> TxPlan:
        main, new_placements = select_main_shard(tx.write_set, mapping, loads)
        migrations = []
        final = {main}
        for acc in tx.write_set:
            if acc in new_placements:
                continue
            current = mapping.get(acc)
            if current == main:
                continue
            account = accounts.get(acc) if accounts else None
            is_ca = account is not None and account.kind == CA
            if self.mode == MODE_MUTEX:
                migrate = True  # mutex consensus needs every account in one shard
            elif is_ca and not self.ca_migration:
                migrate = False
            else:
                migrate = should_migrate(current, book.totals(acc), cost_model.cross_shard_cost)
            if migrate:
                migrations.append(
                    MigrationOp(acc, current, main, cost_model.migration_cost(account))
                )
            else:
                final.add(current)
        return TxPlan(
            tx_id=tx.tx_id,
            new_placements=new_placements,
            migrations=tuple(migrations),
            final_shards=frozenset(final),
            per_shard_charges=_charges(final, tx.base_cost, cost_model),
        )


def make_policy(kind: str, k: int, mode: str = MODE_2PC, partition_assignment=None,
                ca_migration: bool = False):
    if kind == HASH:
        return HashPolicy(k)
    if kind == PARTITION:
        return PartitionPolicy(k, partition_assignment or {})
    if kind == SCHEDULER:
        return SchedulerPolicy(k, mode=mode, ca_migration=ca_migration)
    raise ValueError(f"unknown policy {kind!r}")
