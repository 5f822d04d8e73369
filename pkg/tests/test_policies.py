"""Placement policies: hash baseline, partition baseline, scheduler."""

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shardsim.core import (
    CA,
    Account,
    AlignmentBook,
    CostModel,
    MappingService,
    Transaction,
)
from shardsim.policies import (
    MODE_2PC,
    MODE_MUTEX,
    HashPolicy,
    PartitionPolicy,
    SchedulerPolicy,
    hash_place,
    make_policy,
    select_main_shard,
    should_migrate,
)


def _uniform_loads(k, value=0):
    return {s: value for s in range(k)}


# ---------------------------------------------------------------------------
# hash placement


def test_hash_place_frozen_values():
    # frozen sha256-prefix oracle values; placement must never drift
    assert hash_place("00ff", 16) == 14
    assert hash_place("deadbeef", 16) == 1
    assert hash_place("deadbeef", 97) == 44
    assert hash_place("0a" * 32, 8) == 3


def test_hash_place_range_and_determinism():
    rng = random.Random(0)
    for _ in range(200):
        acc = "%040x" % rng.getrandbits(160)
        s = hash_place(acc, 16)
        assert 0 <= s < 16
        assert s == hash_place(acc, 16)


def test_hash_place_rejects_bad_k():
    with pytest.raises(ValueError):
        hash_place("aa", 0)


def test_hash_place_is_roughly_uniform():
    rng = random.Random(1)
    counts = Counter(
        hash_place("%040x" % rng.getrandbits(160), 8) for _ in range(16_000)
    )
    for shard in range(8):
        assert counts[shard] == pytest.approx(2000, rel=0.15)


# ---------------------------------------------------------------------------
# main shard selection


def test_main_shard_least_loaded_involved():
    phi = MappingService()
    phi.place("aa", 0)
    phi.place("bb", 1)
    loads = {0: 90, 1: 20, 2: 0}
    main, new = select_main_shard(("aa", "bb"), phi, loads)
    assert main == 1  # shard 2 is lighter but not involved
    assert new == {}


def test_main_shard_all_new_uses_global_minimum():
    phi = MappingService()
    loads = {0: 5, 1: 3, 2: 7}
    main, new = select_main_shard(("aa", "bb"), phi, loads)
    assert main == 1
    assert new == {"aa": 1, "bb": 1}


def test_main_shard_tie_breaks_to_lowest_id():
    phi = MappingService()
    phi.place("aa", 2)
    phi.place("bb", 1)
    main, _ = select_main_shard(("aa", "bb"), phi, {0: 0, 1: 4, 2: 4})
    assert main == 1


def test_main_shard_partial_write_set():
    phi = MappingService()
    phi.place("aa", 2)
    main, new = select_main_shard(("aa", "new1"), phi, {0: 0, 1: 0, 2: 9})
    assert main == 2  # only involved shard
    assert new == {"new1": 2}


# ---------------------------------------------------------------------------
# migration predicate


def test_should_migrate_trivial_cases():
    assert should_migrate(0, {0: 3, 1: 10}, 2) is True    # 6 < 10
    assert should_migrate(0, {0: 10, 1: 5}, 2) is False   # 20 < 5 fails
    assert should_migrate(0, {}, 2) is False              # nothing anywhere
    assert should_migrate(0, {1: 1}, 5) is True           # 0 < 1


def test_should_migrate_boundary_is_strict():
    assert should_migrate(0, {0: 5, 1: 10}, 2) is False   # 10 < 10 is false


# ---------------------------------------------------------------------------
# hash / partition policies


def test_hash_policy_plan_never_migrates():
    policy = HashPolicy(16)
    phi = MappingService()
    tx = Transaction("t0", 0, ("00ff", "deadbeef"))
    plan = policy.plan(tx, phi, _uniform_loads(16), AlignmentBook(10), CostModel(2))
    assert plan.migrations == ()
    assert plan.new_placements == {"00ff": 14, "deadbeef": 1}
    assert plan.final_shards == frozenset({14, 1})
    assert plan.per_shard_charges == {14: 2, 1: 2}


def test_hash_policy_respects_existing_placement():
    policy = HashPolicy(16)
    phi = MappingService()
    phi.place("00ff", 5)  # placed elsewhere than its hash shard
    plan = policy.plan(
        Transaction("t0", 0, ("00ff",)), phi, _uniform_loads(16), AlignmentBook(10),
        CostModel(2),
    )
    assert plan.final_shards == frozenset({5})
    assert plan.per_shard_charges == {5: 1}


def test_partition_policy_uses_assignment_with_hash_fallback():
    policy = PartitionPolicy(16, {"aa": 7})
    phi = MappingService()
    plan = policy.plan(
        Transaction("t0", 0, ("aa", "deadbeef")), phi, _uniform_loads(16),
        AlignmentBook(10), CostModel(2),
    )
    assert plan.new_placements["aa"] == 7
    assert plan.new_placements["deadbeef"] == 1  # hash fallback


# ---------------------------------------------------------------------------
# scheduler policy


def test_scheduler_worked_plan_migration():
    """Hand-derived plan: a@0 under load 90, b@1 under load 20.

    a's window totals are {0: 1, 1: 8} and c_cross=2, so main is shard 1 and
    a leaves: 2*1 < 8.  The transaction lands intra-shard on shard 1.
    """
    phi = MappingService()
    phi.place("aa", 0)
    phi.place("bb", 1)
    book = AlignmentBook(10)
    book.add("aa", 0, 1)
    book.add("aa", 1, 8)
    policy = SchedulerPolicy(2)
    plan = policy.plan(
        Transaction("t0", 0, ("aa", "bb")), phi, {0: 90, 1: 20}, book, CostModel(2)
    )
    assert plan.new_placements == {}
    assert len(plan.migrations) == 1
    mig = plan.migrations[0]
    assert (mig.account, mig.source, mig.dest, mig.cost) == ("aa", 0, 1, 2)
    assert plan.final_shards == frozenset({1})
    assert plan.per_shard_charges == {1: 1}  # intra after the migration


def test_scheduler_keeps_strongly_aligned_account():
    phi = MappingService()
    phi.place("aa", 0)
    phi.place("bb", 1)
    book = AlignmentBook(10)
    book.add("aa", 0, 10)
    book.add("aa", 1, 4)
    plan = SchedulerPolicy(2).plan(
        Transaction("t0", 0, ("aa", "bb")), phi, {0: 90, 1: 20}, book, CostModel(2)
    )
    assert plan.migrations == ()
    assert plan.final_shards == frozenset({0, 1})
    assert plan.per_shard_charges == {0: 2, 1: 2}


def test_scheduler_mutex_mode_forces_single_shard():
    phi = MappingService()
    phi.place("aa", 0)
    phi.place("bb", 1)
    phi.place("cc", 2)
    book = AlignmentBook(10)
    book.add("aa", 0, 100)  # would veto the move under 2pc
    plan = SchedulerPolicy(3, mode=MODE_MUTEX).plan(
        Transaction("t0", 0, ("aa", "bb", "cc")), phi, {0: 1, 1: 0, 2: 2}, book,
        CostModel(2),
    )
    assert plan.final_shards == frozenset({1})
    assert {m.account for m in plan.migrations} == {"aa", "cc"}


def test_scheduler_ca_pinned_by_default():
    phi = MappingService()
    phi.place("ca1", 0)
    phi.place("bb", 1)
    accounts = {"ca1": Account("ca1", kind=CA, size=4)}
    book = AlignmentBook(10)
    book.add("ca1", 1, 50)  # overwhelming pull toward shard 1
    plan = SchedulerPolicy(2).plan(
        Transaction("t0", 0, ("ca1", "bb")), phi, {0: 9, 1: 0}, book, CostModel(2),
        accounts=accounts,
    )
    assert plan.migrations == ()
    assert plan.final_shards == frozenset({0, 1})


def test_scheduler_ca_migration_opt_in_scales_cost():
    phi = MappingService()
    phi.place("ca1", 0)
    phi.place("bb", 1)
    accounts = {"ca1": Account("ca1", kind=CA, size=4)}
    book = AlignmentBook(10)
    book.add("ca1", 1, 50)
    plan = SchedulerPolicy(2, ca_migration=True).plan(
        Transaction("t0", 0, ("ca1", "bb")), phi, {0: 9, 1: 0}, book, CostModel(2),
        accounts=accounts,
    )
    assert len(plan.migrations) == 1
    assert plan.migrations[0].cost == 8  # c_cross * size


def test_scheduler_all_new_write_set_is_intra():
    phi = MappingService()
    plan = SchedulerPolicy(4).plan(
        Transaction("t0", 0, ("aa", "bb")), phi, {0: 3, 1: 1, 2: 5, 3: 1},
        AlignmentBook(10), CostModel(2),
    )
    assert plan.new_placements == {"aa": 1, "bb": 1}
    assert plan.final_shards == frozenset({1})
    assert plan.per_shard_charges == {1: 1}


def test_make_policy_factory():
    assert isinstance(make_policy("hash", 4), HashPolicy)
    assert isinstance(make_policy("partition", 4), PartitionPolicy)
    assert isinstance(make_policy("scheduler", 4, mode=MODE_2PC), SchedulerPolicy)
    with pytest.raises(ValueError):
        make_policy("nope", 4)
    with pytest.raises(ValueError):
        SchedulerPolicy(4, mode="bad")


# ---------------------------------------------------------------------------
# properties


@given(seed=st.integers(min_value=0, max_value=10 ** 6),
       k=st.sampled_from([2, 4, 8]))
@settings(max_examples=150, deadline=None)
def test_scheduler_plans_are_internally_consistent(seed, k):
    """Structural plan invariants over random placements and alignments."""
    rng = random.Random(seed)
    phi = MappingService()
    book = AlignmentBook(10)
    accounts = [f"a{i}" for i in range(rng.randint(1, 5))]
    for acc in accounts:
        if rng.random() < 0.7:
            phi.place(acc, rng.randrange(k))
            for _ in range(rng.randint(0, 3)):
                book.add(acc, rng.randrange(k), rng.randint(1, 9))
    loads = {s: rng.randint(0, 50) for s in range(k)}
    model = CostModel(rng.randint(1, 4))
    plan = SchedulerPolicy(k).plan(
        Transaction("t0", 0, tuple(accounts)), phi, loads, book, model
    )
    placed_after = {}
    for acc in accounts:
        placed_after[acc] = phi.get(acc)
    placed_after.update(plan.new_placements)
    for mig in plan.migrations:
        assert placed_after[mig.account] == mig.source
        placed_after[mig.account] = mig.dest
    # final shards are exactly the post-plan shards of the write set
    assert plan.final_shards == frozenset(placed_after.values())
    # per-shard charges follow the intra/cross rule
    expected = model.per_shard_charge(1, len(plan.final_shards))
    assert plan.per_shard_charges == {s: expected for s in plan.final_shards}
    # migrations only ever target the main shard
    assert len({m.dest for m in plan.migrations}) <= 1
