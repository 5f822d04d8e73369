"""Round-based simulator for account placement and migration in sharded
account-based blockchains, with baseline policies, an alignment-driven
scheduler, an epoch-based incentive ledger, and a balanced graph
partitioner."""

from .core import (
    Account,
    AlignmentBook,
    AlignmentVector,
    CostModel,
    InsufficientCapacity,
    MappingService,
    MigrationOp,
    ShardState,
    Transaction,
    involved_shards,
    update_alignments,
)
from .engine import FinalSummary, RoundReport, SimConfig, Simulation, finalize, run
from .policies import TxPlan, hash_place, make_policy, select_main_shard, should_migrate
from .workload import SyntheticSpec, generate, load_trace

__all__ = [
    "Account",
    "AlignmentBook",
    "AlignmentVector",
    "CostModel",
    "FinalSummary",
    "InsufficientCapacity",
    "MappingService",
    "MigrationOp",
    "RoundReport",
    "ShardState",
    "SimConfig",
    "Simulation",
    "SyntheticSpec",
    "Transaction",
    "TxPlan",
    "finalize",
    "generate",
    "hash_place",
    "involved_shards",
    "load_trace",
    "make_policy",
    "run",
    "select_main_shard",
    "should_migrate",
    "update_alignments",
]
