import math
import subprocess
import sys

import pytest

from extreme_bandits.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def values(out):
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


# --- run ---------------------------------------------------------------------


def test_run_preset_writes_csv(capsys, tmp_path):
    out_csv = tmp_path / "r.csv"
    code, out, _ = run(capsys, "run", "--preset", "pareto3", "--replications", "10", "--seed", "7",
                       "--out", str(out_csv), "--threads", "1")
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("policy,checkpoint,regret_mean,regret_sem,oracle_mean,pull_frac_0")
    assert len(lines) == 1 + 3 * 50
    assert "extreme_hunter" in out


def test_run_is_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p, threads in zip(paths, ("1", "2")):
        assert run(capsys, "run", "--preset", "mixture3", "--replications", "4", "--seed", "7",
                   "--horizon", "300", "--out", str(p), "--threads", threads)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_run_unknown_preset(capsys, tmp_path):
    code, _, err = run(capsys, "run", "--preset", "nosuch", "--out", str(tmp_path / "x.csv"))
    assert code == 2 and "nosuch" in err


def test_run_config_error_names_key(capsys, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("n: 10\nhorizont: 5\narms: [{kind: pareto, alpha: 2}]\npolicies: [{kind: ucb1}]\n")
    code, _, err = run(capsys, "run", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))
    assert code == 2 and "horizont" in err


def test_run_io_errors(capsys, tmp_path):
    code, _, _ = run(capsys, "run", "--preset", "pareto3", "--replications", "1", "--horizon", "50",
                     "--out", str(tmp_path / "missing_dir" / "x.csv"), "--threads", "1")
    assert code == 1
    code, _, _ = run(capsys, "run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "x.csv"))
    assert code == 1


def test_run_config_with_flag_overrides(capsys, tmp_path):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("n: 1000\nreplications: 50\nbase_seed: 1\noracle_replications: 1000\n"
                   "arms: [{kind: pareto, alpha: 2}, {kind: pareto, alpha: 3}]\n"
                   "policies: [{kind: ucb1}, {kind: oracle}]\n")
    out_csv = tmp_path / "r.csv"
    code, _, _ = run(capsys, "run", "--config", str(cfg), "--replications", "2", "--horizon", "40",
                     "--out", str(out_csv), "--threads", "1")
    assert code == 0
    rows = out_csv.read_text().splitlines()
    assert len(rows) == 1 + 2 * 40 and rows[-1].startswith("oracle,40,")


def test_run_trace_preset_with_plot(capsys, tmp_path):
    out_csv = tmp_path / "t.csv"
    code, out, _ = run(capsys, "run", "--preset", "trace", "--replications", "2", "--horizon", "400",
                       "--out", str(out_csv), "--threads", "1", "--plot")
    assert code == 0
    assert out_csv.read_text().splitlines()[0].endswith("pull_frac_4")
    png = out_csv.with_suffix(".png")
    assert png.exists() and png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_threads_env_var(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EXTREME_BANDITS_THREADS", "2")
    code, _, _ = run(capsys, "run", "--preset", "pareto3", "--replications", "2", "--horizon", "100",
                     "--out", str(tmp_path / "x.csv"))
    assert code == 0


# --- estimate ------------------------------------------------------------------


def test_estimate_hand_example(capsys, tmp_path):
    f = tmp_path / "v.txt"
    f.write_text("8\n4\n2\n1\n")
    code, out, _ = run(capsys, "estimate", str(f), "--b", "1")
    v = values(out)
    assert code == 0
    assert float(v["h_hat"]) == pytest.approx(1.38629, abs=1e-5)
    assert float(v["alpha"]) == pytest.approx(1 / (2 * math.log(2)), abs=1e-6)
    assert v["T"] == "4"


def test_estimate_empty_file(capsys, tmp_path):
    f = tmp_path / "e.txt"
    f.write_text("")
    assert run(capsys, "estimate", str(f))[0] == 2


def test_estimate_identical_values(capsys, tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("5\n5\n5\n5\n")
    v = values(run(capsys, "estimate", str(f))[1])
    assert float(v["h_hat"]) == 0.0 and v["alpha"] == "inf"


def test_estimate_parse_error(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("1\nseven\n")
    code, _, err = run(capsys, "estimate", str(f))
    assert code == 2 and "line 2" in err


def test_estimate_missing_file(capsys, tmp_path):
    assert run(capsys, "estimate", str(tmp_path / "none.txt"))[0] == 1


# --- analyze -------------------------------------------------------------------


def test_analyze_main_term(capsys):
    code, out, _ = run(capsys, "analyze", "--alpha", "2", "--C", "1", "--n", "100")
    assert code == 0 and "17.724539" in out


def test_analyze_rejects_alpha_one(capsys):
    code, _, err = run(capsys, "analyze", "--alpha", "1", "--C", "1", "--n", "100")
    assert code == 2 and "alpha must be > 1" in err


def test_analyze_second_order(capsys):
    code, out, _ = run(capsys, "analyze", "--alpha", "2", "--C", "1", "--Cprime", "1", "--beta", "1",
                       "--T", "10", "--x", "5")
    v = values(out)
    assert code == 0 and v["B_const"] == "2.828427"
    y = 10 * 5 ** -2.0
    assert float(v["M"]) == pytest.approx(4 / 10 * y ** 2 + 2 / 10 * y ** 2, abs=1e-6)


def test_analyze_usage_errors(capsys):
    assert run(capsys, "analyze", "--alpha", "2")[0] == 2
    assert run(capsys, "analyze", "--alpha", "2", "--T", "10")[0] == 2


# --- oracle --------------------------------------------------------------------


def _oracle_rows(out):
    lines = out.strip().splitlines()
    assert lines[0] == "t,oracle_mean,oracle_sem,best_arm"
    return [line.split(",") for line in lines[1:]]


def test_oracle_pareto3(capsys):
    from extreme_bandits.evt_analysis import frechet_main_term

    code, out, _ = run(capsys, "oracle", "--preset", "pareto3", "--t", "10000")
    (t, mean, sem, best), = _oracle_rows(out)
    assert code == 0 and best == "1"
    assert abs(float(mean) - frechet_main_term(10_000, 1.0, 1.1)) <= 3 * float(sem)


def test_oracle_deterministic_replay(capsys, tmp_path):
    cfg = tmp_path / "one.yaml"
    cfg.write_text("n: 100\narms: [{kind: replay, samples: [5]}]\npolicies: [{kind: ucb1}]\n")
    rows = _oracle_rows(run(capsys, "oracle", "--config", str(cfg), "--t", "1,50,100")[1])
    assert [(float(m), float(s)) for _, m, s, _ in rows] == [(5.0, 0.0)] * 3


def test_oracle_single_draw(capsys, tmp_path):
    cfg = tmp_path / "p.yaml"
    cfg.write_text("n: 10\narms: [{kind: pareto, alpha: 2}]\npolicies: [{kind: ucb1}]\n")
    (_, mean, sem, _), = _oracle_rows(run(capsys, "oracle", "--config", str(cfg), "--t", "1")[1])
    # one Pareto(2) draw has mean alpha / (alpha - 1) = 2
    assert abs(float(mean) - 2.0) <= 3 * float(sem)


def test_oracle_bad_t(capsys):
    assert run(capsys, "oracle", "--preset", "pareto3", "--t", "0")[0] == 2
    assert run(capsys, "oracle", "--preset", "pareto3", "--t", "x")[0] == 2


# --- presets, help ---------------------------------------------------------------


def test_presets(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == 0 and all(name in out for name in ("pareto3", "mixture3", "trace"))


def test_no_subcommand_is_usage_error(capsys):
    assert run(capsys)[0] == 2


@pytest.mark.parametrize("command", ["run", "oracle", "estimate", "analyze", "presets"])
def test_help_lists_all_flags(capsys, command):
    code, out, _ = run(capsys, command, "--help")
    assert code == 0
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "extreme_bandits.cli", "analyze", "--alpha", "2", "--n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "1.772454" in proc.stdout
