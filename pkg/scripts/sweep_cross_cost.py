#!/usr/bin/env python3
"""Cross-shard ratio vs cross-shard cost multiplier.

Sweeps the cost multiplier on a fixed paired-accounts workload and prints
the resulting cross-shard ratio for the scheduler and the hash baseline.
The hash baseline is cost-blind (its placement never consults the cost
model), so its column stays flat; the scheduler consolidates more
aggressively as cross-shard coordination gets more expensive, so its
column should fall.

Example:
    python3 scripts/sweep_cross_cost.py --costs 1,2,4,6,8,10 --shards 16
"""

import argparse
import sys

from shardsim import SimConfig, SyntheticSpec, generate, run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--costs", default="1,2,4,6,8,10")
    parser.add_argument("--shards", type=int, default=16)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--txs", type=int, default=50_000)
    args = parser.parse_args()

    workload = generate(SyntheticSpec(
        generator="communities",
        n_accounts=4000,
        n_txs=args.txs,
        seed=args.seed,
        accounts_per_tx=3,
        n_communities=2000,
        p_inter=0.5,
        community_zipf_exponent=0.6,
    ))

    print(f"{'c_cross':>7}  {'sched_ratio':>11}  {'sched_migr':>10}  {'hash_ratio':>10}")
    for c in (int(v) for v in args.costs.split(",")):
        _, sched = run(SimConfig(k_shards=args.shards, cross_shard_cost=c,
                                 policy="scheduler", seed=args.seed), workload)
        _, hashed = run(SimConfig(k_shards=args.shards, cross_shard_cost=c,
                                  policy="hash", seed=args.seed), workload)
        print(f"{c:>7}  {sched.cross_shard_ratio:>11.4f}  "
              f"{sched.migrations:>10}  {hashed.cross_shard_ratio:>10.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
