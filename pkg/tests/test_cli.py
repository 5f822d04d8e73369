"""Command-line workflows: config resolution, CSV outputs, error paths."""

import csv
import os

import pytest

from shardsim.cli import (
    build_parser,
    load_config_file,
    main,
    resolve_settings,
    sub_seed,
)
from shardsim.engine import ConfigError


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# configuration resolution


def test_sub_seed_is_stable_and_labeled():
    assert sub_seed(0, "workload") == 1612300292
    assert sub_seed(0, "workload") != sub_seed(0, "other")
    assert sub_seed(1, "workload") != sub_seed(0, "workload")


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# experiment defaults\n"
        "policy = scheduler\n"
        "shards=8\n"
        "mempool_ratio = 1.5\n"
        "economics = true\n"
        "\n"
    )
    values = load_config_file(path)
    assert values == {
        "policy": "scheduler",
        "shards": 8,
        "mempool_ratio": 1.5,
        "economics": True,
    }


def test_load_config_file_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("frobnicate=1\n")
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_load_config_file_bad_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("just a line\n")
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_flag_overrides_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("shards=8\npolicy=scheduler\n")
    parser = build_parser()
    args = parser.parse_args(
        ["run", "--config", str(path), "--shards", "4", "--synthetic",
         "zipf_hotspot", "--out", str(tmp_path)]
    )
    settings = resolve_settings(args)
    assert settings["shards"] == 4        # flag wins
    assert settings["policy"] == "scheduler"  # file beats default
    assert settings["capacity"] == 200    # default


# ---------------------------------------------------------------------------
# run command


def _run_args(tmp_path, *extra):
    return [
        "run", "--synthetic", "zipf_hotspot", "--shards", "2",
        "--capacity", "20", "--seed", "3", "--out", str(tmp_path / "out"),
        "--max-rounds", "40",
    ] + list(extra)


def test_run_writes_summary_and_rounds(tmp_path):
    assert main(_run_args(tmp_path)) == 0
    summary = _read_csv(tmp_path / "out" / "summary.csv")
    assert len(summary) == 1
    row = summary[0]
    assert row["policy"] == "hash"
    assert int(row["executed"]) > 0
    rounds = _read_csv(tmp_path / "out" / "rounds.csv")
    assert len(rounds) == int(row["rounds"])
    assert "load_s0" in rounds[0] and "load_s1" in rounds[0]


def test_run_is_byte_identical_across_invocations(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        args = [
            "run", "--synthetic", "communities", "--policy", "scheduler",
            "--shards", "4", "--capacity", "30", "--seed", "7",
            "--out", str(out),
        ]
        assert main(args) == 0
    for name in ("summary.csv", "rounds.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_economics_writes_epochs(tmp_path):
    assert main(_run_args(tmp_path, "--economics", "--epoch-length", "5")) == 0
    epochs = _read_csv(tmp_path / "out" / "epochs.csv")
    assert epochs and set(epochs[0]) == {
        "epoch", "shard", "deposit_total", "miner", "contribution", "payout"
    }


def test_run_from_trace(tmp_path):
    trace = tmp_path / "trace.txt"
    trace.write_text("0 t0 1 aa,bb\n1 t1 2 cc\n")
    args = ["run", "--trace", str(trace), "--shards", "2", "--out",
            str(tmp_path / "out")]
    assert main(args) == 0
    row = _read_csv(tmp_path / "out" / "summary.csv")[0]
    assert int(row["executed"]) == 2


# ---------------------------------------------------------------------------
# sweep command


def test_sweep_writes_per_point_and_combined(tmp_path):
    args = [
        "sweep", "--synthetic", "zipf_hotspot", "--axis", "shards",
        "--values", "2,4", "--policies", "hash,scheduler",
        "--capacity", "20", "--seed", "0", "--out", str(tmp_path / "sweep"),
        "--max-rounds", "30",
    ]
    assert main(args) == 0
    combined = _read_csv(tmp_path / "sweep" / "sweep.csv")
    assert len(combined) == 4  # 2 values x 2 policies
    assert {r["shards"] for r in combined} == {"2", "4"}
    assert os.path.isdir(tmp_path / "sweep" / "hash_shards_2")
    assert os.path.isdir(tmp_path / "sweep" / "scheduler_shards_4")


def test_sweep_cross_cost_axis(tmp_path):
    args = [
        "sweep", "--synthetic", "communities", "--axis", "cross-cost",
        "--values", "1,4", "--policies", "scheduler", "--shards", "2",
        "--capacity", "20", "--seed", "1", "--out", str(tmp_path / "s"),
        "--max-rounds", "30",
    ]
    assert main(args) == 0
    combined = _read_csv(tmp_path / "s" / "sweep.csv")
    assert [r["cross_cost"] for r in combined] == ["1", "4"]


# ---------------------------------------------------------------------------
# error paths exit with status 1


def test_missing_workload_source_errors(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == 1


def test_trace_and_synthetic_conflict(tmp_path):
    trace = tmp_path / "t.txt"
    trace.write_text("0 t0 1 aa\n")
    assert main(["run", "--trace", str(trace), "--synthetic", "zipf_hotspot",
                 "--out", str(tmp_path)]) == 1


def test_nonexistent_trace_errors(tmp_path):
    assert main(["run", "--trace", str(tmp_path / "missing.txt"),
                 "--out", str(tmp_path)]) == 1


def test_malformed_trace_errors(tmp_path):
    trace = tmp_path / "t.txt"
    trace.write_text("garbage\n")
    assert main(["run", "--trace", str(trace), "--out", str(tmp_path)]) == 1


def test_bad_flag_exits_one(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--policy", "nope", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_empty_sweep_values_error(tmp_path):
    assert main(["sweep", "--synthetic", "zipf_hotspot", "--axis", "shards",
                 "--values", ",", "--out", str(tmp_path)]) == 1
