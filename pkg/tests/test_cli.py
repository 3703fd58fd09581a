import csv

import pytest

from wsnroute.cli import main
from wsnroute.config import SimConfig, emit_config, parse_config
from wsnroute.report import ROUNDS_HEADER, read_csv


def body(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text("node_count = 12\n")
    return path


def test_run_writes_rounds_csv(tmp_path, small_cfg, capsys):
    out = tmp_path / "r"
    assert main(["run", "--config", str(small_cfg), "--strategy", "mecrt", "--seed", "7", "--out", str(out)]) == 0
    lines = body(out / "rounds.csv")
    assert lines[0] == ",".join(ROUNDS_HEADER)
    meta = read_csv(out / "rounds.csv").meta
    assert meta["strategy"] == "mecrt" and meta["seed"] == "7" and meta["node_count"] == "12"
    assert parse_config("".join(f"{k} = {v}\n" for k, v in meta.items() if k != "seeds")) == \
        SimConfig(node_count=12, seed=7)
    assert "termination=" in capsys.readouterr().out


def test_run_is_byte_identical(tmp_path, small_cfg):
    for d in ("a", "b"):
        assert main(["run", "--config", str(small_cfg), "--seed", "3", "--out", str(tmp_path / d), "--trace"]) == 0
    for name in ("rounds.csv", "trace.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_joules_have_17_significant_digits(tmp_path, small_cfg):
    main(["run", "--config", str(small_cfg), "--out", str(tmp_path)])
    row = next(r for r in csv.DictReader(body(tmp_path / "rounds.csv")) if r["delivered"] == "1")
    for key in ("consumed_j", "total_residual_j"):
        digits = row[key].split("e")[0].replace(".", "").lstrip("0")
        assert len(digits) == 17, row[key]


def test_bad_strategy_exit_2(tmp_path, capsys):
    assert main(["run", "--strategy", "bogus", "--out", str(tmp_path)]) == 2
    assert "bogus" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["unknown_key = 3\n", "tx_range_m = -1\n", "node_count = x\n"])
def test_bad_config_exit_2(tmp_path, text, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    key = text.split("=")[0].strip()
    assert key in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_set_override_and_dump(tmp_path):
    assert main(["run", "--set", "node_count=3", "--set", "max_rounds=5", "--out", str(tmp_path),
                 "--dump-deployment"]) == 0
    assert len(body(tmp_path / "rounds.csv")) == 6
    assert (tmp_path / "deployment.csv").read_text().startswith("id,x,y\n0,")


def test_sweep_outputs(tmp_path, small_cfg):
    out = tmp_path / "s"
    assert main(["sweep", "--config", str(small_cfg), "--nodes", "8,12", "--strategies", "he,mecrt",
                 "--seeds", "2", "--out", str(out)]) == 0
    sweep_rows = list(csv.DictReader(body(out / "sweep.csv")))
    assert len(sweep_rows) == 8
    assert list(sweep_rows[0]) == ["n", "strategy", "seed", "lifetime_first_death", "lifetime_termination",
                                   "rounds_delivered", "total_consumed_j"]
    agg = list(csv.DictReader(body(out / "aggregate.csv")))
    assert [(r["n"], r["strategy"]) for r in agg] == [("8", "he"), ("8", "mecrt"), ("12", "he"), ("12", "mecrt")]
    meta = read_csv(out / "aggregate.csv").meta
    assert meta["seeds"] == "0,1" and meta["nodes"] == "8,12"
    again = tmp_path / "s2"
    main(["sweep", "--config", str(small_cfg), "--nodes", "8,12", "--strategies", "he,mecrt",
          "--seeds", "2", "--out", str(again)])
    for name in ("sweep.csv", "aggregate.csv", "curves.csv"):
        assert (out / name).read_bytes() == (again / name).read_bytes()


def test_sweep_single_seed_sd_zero(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--nodes", "10", "--strategies", "mecrt", "--seeds", "1", "--out", str(out)]) == 0
    (row,) = csv.DictReader(body(out / "aggregate.csv"))
    (run_row,) = csv.DictReader(body(out / "sweep.csv"))
    assert float(row["sd_life_fd"]) == 0 and float(row["sd_life_term"]) == 0
    assert float(row["mean_life_term"]) == float(run_row["lifetime_termination"])
    assert row["strategy"] == "mecrt"


def test_sweep_bad_node_count_exit_2(tmp_path):
    assert main(["sweep", "--nodes", "0", "--seeds", "1", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--nodes", "a,b", "--out", str(tmp_path)]) == 2


def _runs(tmp_path, cfg, strategies, seed="1"):
    dirs = []
    for s in strategies:
        d = tmp_path / s
        assert main(["run", "--config", str(cfg), "--strategy", s, "--seed", seed, "--out", str(d)]) == 0
        dirs.append(str(d))
    return dirs


def test_compare_fig3_fig4_fig2(tmp_path, small_cfg, capsys):
    dirs = _runs(tmp_path, small_cfg, ["he", "mecrt", "minhop"])
    out = tmp_path / "cmp"
    assert main(["compare", *dirs, "--out", str(out)]) == 0
    assert (out / "fig3_energy.csv").read_text().splitlines()[0] == "round,residual_he,residual_mecrt"
    assert (out / "fig4_dead.csv").read_text().splitlines()[0] == "round,dead_he,dead_mecrt"
    assert (out / "fig2_energy.csv").read_text().splitlines()[0] == "round,residual_minhop,residual_mecrt"
    printed = capsys.readouterr().out
    assert "fig3" in printed and "fig4" in printed and "fig2" in printed
    rows = list(csv.reader((out / "fig3_energy.csv").read_text().splitlines()[1:]))
    he_rounds = len(body(tmp_path / "he" / "rounds.csv")) - 1
    me_rounds = len(body(tmp_path / "mecrt" / "rounds.csv")) - 1
    assert len(rows) == max(he_rounds, me_rounds)


def test_compare_sweep_fig5(tmp_path, capsys):
    out = tmp_path / "s"
    main(["sweep", "--nodes", "6,10", "--strategies", "he,mecrt", "--seeds", "2", "--out", str(out)])
    assert main(["compare", str(out), "--out", str(tmp_path / "cmp")]) == 0
    lines = (tmp_path / "cmp" / "fig5_lifetime.csv").read_text().splitlines()
    assert lines[0] == "n,life_term_he,life_term_mecrt,life_fd_he,life_fd_mecrt"
    assert [line.split(",")[0] for line in lines[1:]] == ["6", "10"]
    assert "fig5 n=6" in capsys.readouterr().out


def test_compare_mismatch_exit_3(tmp_path, small_cfg, capsys):
    a = _runs(tmp_path, small_cfg, ["he"])
    other = tmp_path / "other.cfg"
    other.write_text(emit_config(SimConfig(node_count=12, tx_range_m=12.0)))
    b = _runs(tmp_path, other, ["mecrt"])
    assert main(["compare", *a, *b, "--out", str(tmp_path / "cmp")]) == 3
    assert "tx_range_m" in capsys.readouterr().err


def test_compare_missing_input_exit_3(tmp_path):
    assert main(["compare", str(tmp_path / "nothing"), "--out", str(tmp_path / "cmp")]) == 3


def test_usage_error_exit_2(capsys):
    assert main(["frobnicate"]) == 2
