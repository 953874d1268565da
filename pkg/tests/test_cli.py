import csv
import io
import json
import math

import numpy as np
import pytest

from skeptic import PastAverage, run_game
from skeptic.analysis import check_consistency
from skeptic.cli import SWEEP_HEADER, main
from skeptic.config import KEYS, ConfigError, Settings, load, parse_text, run_config
from skeptic.csvio import SCALAR_HEADER, header_for, read_trajectory_csv, write_trajectory_csv


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_simulate_fixed_zero_keeps_capital(tmp_path):
    cfg = write_config(tmp_path, "strategy.kind = fixed_epsilon\nstrategy.epsilon = 0\nrun.horizon = 50\n")
    out = tmp_path / "t.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == SCALAR_HEADER
    assert len(rows) == 51
    assert {r[4] for r in rows[1:]} == {"1"}
    assert rows[1][6] == "" and rows[3][6] != ""


def test_simulate_reports_to_stdout_with_checks(tmp_path, capsys):
    cfg = write_config(tmp_path, "strategy.c = 0.5\nreality.kind = constant_bias\nreality.b = 0.2\n"
                                 "run.horizon = 10000\nrun.checks = consistency, capital_bound\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "t.csv")]) == 0
    lines = capsys.readouterr().out.splitlines()
    final = float(lines[0].split("=")[1])
    assert final >= 0.25 * (1e4 * 0.04 - math.log(1e4)) - 0.75
    reports = [json.loads(line) for line in lines[2:]]
    assert {r["name"] for r in reports} >= {"capital_bound", "step_rule", "move_bound"}
    assert all(r["passed"] for r in reports)


def test_simulate_to_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.horizon = 5\n")
    assert main(["simulate", "--config", cfg]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == ",".join(SCALAR_HEADER)
    assert "final_log_capital=" in captured.err


@pytest.mark.parametrize("body", [
    "strategy.kind = mixture\nrun.horizon = 300\n",
    "strategy.kind = mixture\nstrategy.mixture = dyadic\nstrategy.form = symmetric\nrun.horizon = 40\n",
    "strategy.kind = one_sided_positive\nreality.kind = uniform_noise\nrun.horizon = 2000\n",
])
def test_simulate_is_byte_identical(tmp_path, body):
    cfg = write_config(tmp_path, body)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", cfg, "--seed", "17", "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--seed", "17", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["simulate", "--config", cfg, "--seed", "18", "--out", str(c)])
    if "uniform_noise" in body:
        assert a.read_bytes() != c.read_bytes()


def test_simulate_linear_from_matrix_file(tmp_path):
    (tmp_path / "A.txt").write_text("0.3 0.1\n0.1 0.3\n")
    cfg = write_config(tmp_path, "strategy.kind = linear\nstrategy.matrix_path = A.txt\n"
                                 "reality.kind = vector_unit_ball\nreality.direction = rotating\n"
                                 "run.horizon = 500\nrun.checks = linear_bound, consistency\n")
    out = tmp_path / "v.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == header_for(2)
    assert len(rows) == 501


def test_csv_round_trip_passes_consistency(tmp_path):
    traj = run_game(PastAverage(0.5), __import__("skeptic").BiasedCoin(0.7), 500, seed=3)
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    back = read_trajectory_csv(io.StringIO(buf.getvalue()))
    for name in ("n", "x", "xbar", "bet", "capital", "log_capital"):
        np.testing.assert_array_equal(getattr(back, name), getattr(traj, name))
    np.testing.assert_allclose(back.fraction, traj.fraction, rtol=1e-15, atol=0)
    assert all(r.passed for r in check_consistency(back))


def test_vector_csv_round_trip():
    from skeptic import LinearOperatorSpec, VectorUnitBall
    traj = run_game(LinearOperatorSpec(np.diag([0.2, 0.4, 0.5])), VectorUnitBall(direction="random"),
                    200, seed=1)
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    back = read_trajectory_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_array_equal(back.x, traj.x)
    np.testing.assert_array_equal(back.bet, traj.bet)
    assert all(r.passed for r in check_consistency(back))


def test_verify_identity_small(tmp_path):
    cfg = write_config(tmp_path, "verify.paths = 50\nverify.max_length = 500\n")
    out = tmp_path / "v.jsonl"
    assert main(["verify", "identity", "--config", cfg, "--out", str(out)]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 50
    assert all(r["suite"] == "identity" and r["passed"] for r in records)


def test_verify_seed_override_changes_paths(tmp_path):
    cfg = write_config(tmp_path, "verify.paths = 3\nverify.max_length = 200\n")
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / f"v{seed}.jsonl"
        main(["verify", "identity", "--config", cfg, "--seed", seed, "--out", str(out)])
        outs.append([json.loads(line)["length"] for line in out.read_text().splitlines()])
    assert outs[0] != outs[1]


def test_verify_reduced_suites(tmp_path):
    cfg = write_config(tmp_path, "verify.horizon = 2000\nverify.seeds = 2\nverify.c = 0.5\n"
                                 "verify.rate_horizon = 20000\nverify.linear_horizon = 500\n"
                                 "verify.matrices = 2\nverify.max_dim = 3\nverify.mixture_paths = 10\n"
                                 "verify.subset_n = 6\nverify.trials = 2000\n")
    for suite in ("bound", "one-sided", "linear", "mixture", "azuma"):
        out = tmp_path / f"{suite}.jsonl"
        assert main(["verify", suite, "--config", cfg, "--out", str(out)]) == 0, suite
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert records and all(r["passed"] for r in records)


def test_verify_mixture_default_scale(tmp_path):
    out = tmp_path / "m.jsonl"
    assert main(["verify", "mixture", "--out", str(out)]) == 0
    names = [json.loads(line)["name"] for line in out.read_text().splitlines()]
    assert names == ["forms_agree/uniform_half", "forms_agree/dyadic", "uniform_moments",
                     "symmetric_vs_subsets"]


def test_sweep_monotone_in_rate(tmp_path):
    cfg = write_config(tmp_path, "reality.kind = rate_path\nsweep.a = 0.5, 1.0, 1.5\n"
                                 "sweep.c = 0.25, 0.5\nrun.horizon = 20000\nrun.record_every = 100\n")
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == SWEEP_HEADER
    assert [(r[0], r[1]) for r in rows[1:]] == [(c, a) for c in ("0.25", "0.5")
                                                for a in ("0.5", "1", "1.5")]
    for c in ("0.25", "0.5"):
        finals = [float(r[4]) for r in rows[1:] if r[0] == c]
        assert finals == sorted(finals)
    assert all(float(r[6]) >= 0 for r in rows[1:])


def test_sweep_jobs_match_serial(tmp_path):
    cfg = write_config(tmp_path, "sweep.c = 0.1, 0.5\nsweep.seed = 1, 2, 3\nrun.horizon = 3000\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_rows(a)) == 7


def test_sweep_empty_grid(tmp_path):
    cfg = write_config(tmp_path, "sweep.c =\n")
    out = tmp_path / "e.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert read_rows(out) == [SWEEP_HEADER]


@pytest.mark.parametrize("body, field", [
    ("strategy.c = 0.7\n", "strategy.c"),
    ("strategy.c = abc\n", "strategy.c"),
    ("bogus.key = 1\n", "bogus.key"),
    ("reality.kind = martingale\n", "reality.kind"),
    ("run.horizon = 0\n", "run.horizon"),
    ("run.checks = linear_bound\n", "run.checks"),
    ("run.checks = overshoot\nrun.record_every = 5\n", "run.checks"),
    ("strategy.kind = linear\n", "strategy.matrix_path"),
    ("sweep.a = 1.0\n", "sweep.a"),
    ("no equals sign\n", "line 1"),
])
def test_config_errors_exit_2(tmp_path, capsys, body, field):
    cfg = write_config(tmp_path, body)
    command = "sweep" if body.startswith("sweep") else "simulate"
    assert main([command, "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert field in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_bad_usage_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["verify", "nonsense"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--jobs", "0"])
    assert info.value.code == 2


def test_failed_check_exits_1(tmp_path, monkeypatch):
    import skeptic.analysis as A
    real = A.check_capital_bound

    def broken(traj):
        report = real(traj)
        report.passed = False
        return report

    monkeypatch.setattr(A, "check_capital_bound", broken)
    cfg = write_config(tmp_path, "run.horizon = 20\nrun.checks = capital_bound\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "t.csv")]) == 1


def test_mixture_beyond_max_n_exits_1(tmp_path):
    cfg = write_config(tmp_path, "strategy.kind = mixture\nstrategy.form = symmetric\n"
                                 "strategy.max_n = 10\nrun.horizon = 20\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "t.csv")]) == 1


def test_parse_text_and_defaults(tmp_path):
    raw = parse_text("# header\nstrategy.c = 0.25  # trailing\n\nrun.horizon=7\nrun.horizon = 9\n")
    assert raw == {"strategy.c": "0.25", "run.horizon": "9"}
    s = Settings(raw)
    assert s["strategy.c"] == 0.25 and s["run.horizon"] == 9
    assert s["run.seed"] == KEYS["run.seed"][1]
    assert "strategy.c" in s and "run.seed" not in s
    assert load(None)["verify.c"] == [0.05, 0.1, 0.25, 0.5]


def test_run_config_seed_and_paths(tmp_path):
    path = write_config(tmp_path, "run.seed = 4\nrun.out = sub/out.csv\n")
    cfg = load(path)
    assert run_config(cfg).seed == 4
    assert run_config(cfg, seed=9).seed == 9
    assert run_config(cfg).out == str(tmp_path / "sub" / "out.csv")
    with pytest.raises(ConfigError):
        run_config(Settings({"reality.kind": "vector_unit_ball"}))
