"""Epoch-based fee ledger decoupling fee collection from cash-in.

During an epoch, each shard's leaders lock collected fees into a per-shard
deposit with per-miner contribution accounting.  On epoch change, miners are
reshuffled uniformly at random across shards and cash in the previous
epoch's deposit of their *new* shard, pro rata to their contribution in
their *old* shard.  A naive mode (leaders pocket fees immediately) is kept
for the greedy-miner comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import ShardId

MinerId = str

DECOUPLED = "decoupled"
NAIVE = "naive"
FEE_SCHEMES = (DECOUPLED, NAIVE)


class WrongShard(Exception):
    pass


@dataclass
class ShardDeposit:
    shard: ShardId
    epoch: int
    total: int = 0
    contributions: dict = field(default_factory=dict)

    def fraction(self, miner: MinerId) -> float:
        if self.total == 0:
            return 0.0
        return self.contributions.get(miner, 0) / self.total


@dataclass(frozen=True)
class EpochAssignment:
    epoch: int
    shard_of: dict  # miner -> shard

    def miners_of(self, shard: ShardId) -> list:
        return sorted(m for m, s in self.shard_of.items() if s == shard)


def miner_ids(k: int, miners_per_shard: int) -> list:
    return [f"m{i:04d}" for i in range(k * miners_per_shard)]


def record_fee(deposit: ShardDeposit, assignment: EpochAssignment, leader: MinerId, fee: int) -> None:
    if assignment.shard_of.get(leader) != deposit.shard:
        raise WrongShard(f"{leader} is not assigned to shard {deposit.shard}")
    if fee < 0:
        raise ValueError("negative fee")
    if fee == 0:
        return
    deposit.contributions[leader] = deposit.contributions.get(leader, 0) + fee
    deposit.total += fee


def rotate_leader(assignment: EpochAssignment, shard: ShardId, round_index: int) -> MinerId:
    """Deterministic round-robin over the shard's miners."""
    miners = assignment.miners_of(shard)
    if not miners:
        raise ValueError(f"shard {shard} has no miners")
    return miners[round_index % len(miners)]


def shuffle_epoch(miners: list, k: int, epoch: int, seed: int) -> EpochAssignment:
    """Uniform reshuffle into equal-size shard groups (seeded)."""
    if len(miners) % k != 0:
        raise ValueError("miner count must divide evenly across shards")
    per_shard = len(miners) // k
    order = sorted(miners)
    # str seeds hash via sha512 inside Random, stable across interpreter runs
    random.Random(f"epoch:{seed}:{epoch}").shuffle(order)
    shard_of = {m: i // per_shard for i, m in enumerate(order)}
    return EpochAssignment(epoch, shard_of)


def split_fee(fee: int, shards) -> dict:
    """Equal split of a fee across involved shards, remainder to lowest id."""
    shards = sorted(shards)
    share, remainder = divmod(fee, len(shards))
    out = {s: share for s in shards}
    out[shards[0]] += remainder
    return {s: v for s, v in out.items() if v}


def cash_in(
    miner: MinerId,
    prev_deposits: dict,
    prev_assignment: EpochAssignment,
    new_assignment: EpochAssignment,
) -> float:
    """Pro-rata payout from the new shard's previous-epoch deposit.

    A miner absent from the previous epoch has no contribution fraction and
    is paid nothing.
    """
    old_shard = prev_assignment.shard_of.get(miner)
    if old_shard is None:
        return 0.0
    new_shard = new_assignment.shard_of[miner]
    fraction = prev_deposits[old_shard].fraction(miner)
    return fraction * prev_deposits[new_shard].total


def expected_reward(fraction: float, deposits_total: int, k: int) -> float:
    """Closed-form expected cash-in under a uniform shuffle: f * x_tot / k."""
    return fraction * deposits_total / k


class IncentiveLedger:
    """Tracks deposits, assignments, and miner balances across epochs."""

    def __init__(self, k: int, miners_per_shard: int, seed: int, scheme: str = DECOUPLED):
        if scheme not in FEE_SCHEMES:
            raise ValueError(f"unknown fee scheme {scheme!r}")
        if miners_per_shard < 1:
            raise ValueError("need at least one miner per shard")
        self.k = k
        self.scheme = scheme
        self.seed = seed
        self.miners = miner_ids(k, miners_per_shard)
        self.epoch = 0
        self.assignment = shuffle_epoch(self.miners, k, 0, seed)
        self.deposits = {s: ShardDeposit(s, 0) for s in range(k)}
        self.balances = {m: 0.0 for m in self.miners}
        self.shard_collected = {s: 0 for s in range(k)}  # lifetime, all schemes
        self.epoch_rows = []  # (epoch, shard, deposit_total, miner, contribution, payout)

    def leader(self, shard: ShardId, round_index: int) -> MinerId:
        return rotate_leader(self.assignment, shard, round_index)

    def credit(self, shard: ShardId, round_index: int, fee: int) -> None:
        if fee <= 0:
            return
        leader = self.leader(shard, round_index)
        self.shard_collected[shard] += fee
        if self.scheme == NAIVE:
            self.balances[leader] += fee
            self.deposits[shard].contributions[leader] = (
                self.deposits[shard].contributions.get(leader, 0) + fee
            )
            self.deposits[shard].total += fee
        else:
            record_fee(self.deposits[shard], self.assignment, leader, fee)

    def total_fees(self) -> int:
        return sum(self.shard_collected.values())

    def close_epoch(self) -> None:
        """Shuffle miners and, in decoupled mode, pay out the closed deposits."""
        prev_assignment = self.assignment
        prev_deposits = self.deposits
        self.epoch += 1
        self.assignment = shuffle_epoch(self.miners, self.k, self.epoch, self.seed)
        self.deposits = {s: ShardDeposit(s, self.epoch) for s in range(self.k)}
        for miner in self.miners:
            payout = 0.0
            if self.scheme == DECOUPLED:
                payout = cash_in(miner, prev_deposits, prev_assignment, self.assignment)
                self.balances[miner] += payout
            shard = prev_assignment.shard_of[miner]
            self.epoch_rows.append(
                (
                    prev_deposits[shard].epoch,
                    shard,
                    prev_deposits[shard].total,
                    miner,
                    prev_deposits[shard].contributions.get(miner, 0),
                    payout,
                )
            )
