#!/usr/bin/env python3
"""Throughput and wasted capacity vs shard count, per policy.

Runs the community-plus-hotspot workload against the hash baseline and the
scheduler for a range of shard counts and prints a comparison table.  This
is the experiment behind the headline claim: the scheduler's advantage
grows as the system is split into more shards.

Example:
    python3 scripts/sweep_shards.py --shards 4,8,16,32 --seed 0 --txs 50000
"""

import argparse
import csv
import sys

from shardsim import SimConfig, SyntheticSpec, generate, run


def make_workload(args, seed):
    return generate(SyntheticSpec(
        generator="communities",
        n_accounts=args.accounts,
        n_txs=args.txs,
        seed=seed,
        accounts_per_tx=3,
        n_communities=args.communities,
        p_inter=0.05,
        community_zipf_exponent=0.6,
        p_hotspot=0.02,
        zipf_exponent=0.8,
    ))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shards", default="4,8,16,32",
                        help="comma-separated shard counts")
    parser.add_argument("--policies", default="hash,scheduler")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--txs", type=int, default=50_000)
    parser.add_argument("--accounts", type=int, default=4000)
    parser.add_argument("--communities", type=int, default=400)
    parser.add_argument("--csv", help="optional output CSV path")
    args = parser.parse_args()

    workload = make_workload(args, args.seed)
    rows = []
    for k in (int(v) for v in args.shards.split(",")):
        for policy in args.policies.split(","):
            cfg = SimConfig(k_shards=k, policy=policy, seed=args.seed)
            _, summary = run(cfg, workload)
            rows.append({
                "shards": k,
                "policy": policy,
                "rounds": summary.rounds,
                "throughput": round(summary.throughput, 2),
                "latency": round(summary.latency, 2),
                "wasted": summary.wasted_capacity,
                "cross_ratio": round(summary.cross_shard_ratio, 4),
            })

    header = ("shards", "policy", "rounds", "throughput", "latency", "wasted",
              "cross_ratio")
    print("  ".join(f"{h:>11}" for h in header))
    for row in rows:
        print("  ".join(f"{row[h]:>11}" for h in header))

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        print(f"\nwrote {args.csv}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
