"""End-to-end tests of the command-line surface and its exit codes."""

import json
import math
import os
import subprocess
import sys

import pytest

from selfnorm import parse_csv
from selfnorm.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def record(line: str) -> dict:
    out = {}
    for token in line.strip().split():
        key, _, value = token.partition("=")
        out[key] = value
    return out


class TestBoundCommand:
    def test_endpoint_example(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--n", "4", "--beta", "2", "--x", "2", "--kind", "bn")
        assert code == 0
        rec = record(out)
        assert rec["value"] == "0.0625"
        assert rec["regime"] == "endpoint"

    def test_impossible_example(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--n", "4", "--beta", "2", "--x", "5", "--kind", "bn")
        assert code == 0
        rec = record(out)
        assert rec["value"] == "0"
        assert rec["regime"] == "impossible"

    def test_tstat_example(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--n", "4", "--x", "1", "--kind", "tstat")
        assert code == 0
        rec = record(out)
        assert float(rec["value"]) == pytest.approx(16.0 / 27.0, rel=1e-9)

    def test_entropy_form_agrees_with_product_form(self, capsys):
        _, out_bn, _ = run_cli(capsys, "bound", "--n", "9", "--beta", "1.5", "--s", "0.7")
        _, out_en, _ = run_cli(
            capsys, "bound", "--n", "9", "--beta", "1.5", "--s", "0.7", "--kind", "entropy"
        )
        assert float(record(out_bn)["value"]) == pytest.approx(
            float(record(out_en)["value"]), rel=1e-12
        )

    def test_s_flag_equals_x_flag(self, capsys):
        _, out_s, _ = run_cli(capsys, "bound", "--n", "4", "--beta", "2", "--s", "0.5")
        _, out_x, _ = run_cli(capsys, "bound", "--n", "4", "--beta", "2", "--x", "1")
        assert record(out_s)["value"] == record(out_x)["value"]

    def test_bernstein_kind_reports_minimizer(self, capsys):
        code, out, _ = run_cli(
            capsys, "bound", "--n", "4", "--beta", "2", "--x", "1", "--kind", "bernstein"
        )
        assert code == 0
        rec = record(out)
        assert float(rec["lambda_star"]) == pytest.approx(math.log(3.0), rel=1e-6)
        assert float(rec["value"]) == pytest.approx(16.0 / 27.0, rel=1e-9)

    def test_corollary_kind(self, capsys):
        code, out, _ = run_cli(
            capsys, "bound", "--n", "20", "--beta", "2", "--x", "2", "--kind", "corollary"
        )
        assert code == 0
        rec = record(out)
        assert float(rec["value"]) == pytest.approx(math.exp(-2.0), rel=1e-10)
        assert rec["extrapolated"] == "false"

    def test_two_sided_kind(self, capsys):
        code, out, _ = run_cli(
            capsys, "bound", "--n", "4", "--beta", "2", "--x", "1.8", "--kind", "two-sided"
        )
        assert code == 0
        assert float(record(out)["value"]) == pytest.approx(0.27654531922209656, rel=1e-9)

    def test_rescaled_kind(self, capsys):
        code, out, _ = run_cli(
            capsys,
            *"bound --n 10 --beta 3 --x 0.5 --kind rescaled --alpha 0.4".split(),
        )
        assert code == 0
        rec = record(out)
        assert rec["in_window"] == "true"
        assert float(rec["alpha_low"]) == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_rescaled_requires_alpha(self, capsys):
        code, _, err = run_cli(
            capsys, "bound", "--n", "10", "--beta", "3", "--x", "0.5", "--kind", "rescaled"
        )
        assert code == 2
        assert "alpha" in err

    def test_both_threshold_flags_rejected(self, capsys):
        code, _, err = run_cli(capsys, "bound", "--n", "4", "--x", "1", "--s", "0.5")
        assert code == 2
        assert "exactly one" in err

    def test_missing_threshold_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "bound", "--n", "4")
        assert code == 2

    def test_unknown_kind_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "bound", "--n", "4", "--x", "1", "--kind", "magic")
        assert code == 2


class TestOracleCommand:
    def test_endpoint_tightness_example(self, capsys):
        code, out, _ = run_cli(
            capsys,
            *"oracle --n 10 --beta 2 --x 3.16227766 --stat running-max".split(),
        )
        assert code == 0
        rec = record(out)
        assert float(rec["probability"]) == 1.0 / 1024.0
        assert rec["hits"] == "1"
        assert float(rec["bound"]) == pytest.approx(2.0**-10, rel=1e-6)

    def test_small_example(self, capsys):
        code, out, _ = run_cli(capsys, *"oracle --n 2 --beta 2 --x 0.5".split())
        assert code == 0
        assert float(record(out)["probability"]) == 0.5

    def test_budget_exit_code(self, capsys):
        code, _, err = run_cli(capsys, *"oracle --n 31 --beta 2 --x 1".split())
        assert code == 2
        assert "budget" in err

    def test_tstat_stat(self, capsys):
        code, out, _ = run_cli(capsys, *"oracle --n 4 --x 1 --stat tstat".split())
        assert code == 0
        rec = record(out)
        assert (rec["hits"], rec["total"], rec["degenerate"]) == ("4", "16", "2")

    def test_tstat_rejects_s_flag(self, capsys):
        code, _, _ = run_cli(capsys, *"oracle --n 4 --s 0.5 --stat tstat".split())
        assert code == 2

    def test_mags_distribution(self, capsys, tmp_path):
        path = tmp_path / "mags.txt"
        path.write_text("1.0\n2.0\n3.0\n", encoding="ascii")
        code, out, _ = run_cli(capsys, "oracle", "--dist", f"mags:{path}", "--s", "0.5")
        assert code == 0
        rec = record(out)
        assert rec["n"] == "3"
        assert float(rec["probability"]) == 0.25

    def test_random_magnitude_law_rejected(self, capsys):
        code, _, err = run_cli(capsys, *"oracle --n 4 --dist gaussian --s 0.5".split())
        assert code == 2
        assert "enumeration" in err


class TestSimulateCommand:
    def test_impossible_regime_example(self, capsys):
        code, out, _ = run_cli(
            capsys,
            *"simulate --dist rademacher --n 4 --beta 2 --x 4.1 --stat running-max --trials 1000 --seed 1".split(),
        )
        assert code == 0
        rec = record(out)
        assert rec["p_hat"] == "0"
        assert rec["respect"] == "PASS"
        assert rec["bound"] == "0"

    def test_bound_respected_on_gaussian_cell(self, capsys):
        code, out, _ = run_cli(
            capsys,
            *"simulate --dist gaussian --n 20 --beta 2 --x 2 --stat final-sum --trials 20000 --seed 42".split(),
        )
        assert code == 0
        rec = record(out)
        assert rec["respect"] == "PASS"
        assert float(rec["p_hat"]) <= float(rec["bound"])

    def test_tstat_stat(self, capsys):
        code, out, _ = run_cli(
            capsys, *"simulate --dist gaussian --n 10 --x 2 --stat tstat --trials 5000".split()
        )
        assert code == 0
        rec = record(out)
        assert rec["respect"] == "PASS"
        assert "corollary" not in rec

    def test_bad_distribution_flags(self, capsys):
        assert run_cli(capsys, *"simulate --n 4 --x 1 --dist pareto".split())[0] == 2
        assert run_cli(capsys, *"simulate --n 4 --x 1 --dist pareto:0".split())[0] == 2
        assert run_cli(capsys, *"simulate --n 4 --x 1 --dist gaussian:3".split())[0] == 2
        assert run_cli(capsys, *"simulate --n 4 --x 1 --dist cauchy".split())[0] == 2

    def test_missing_n(self, capsys):
        assert run_cli(capsys, *"simulate --x 1 --dist gaussian".split())[0] == 2


class TestSweepCommand:
    def test_csv_stdout_round_trip(self, capsys):
        code, out, _ = run_cli(
            capsys, *"sweep --n 4,32 --beta 2 --s 0.5,1.0 --trials 400 --seed 3".split()
        )
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 4
        first = rows[0]
        assert first["n"] == 4
        assert first["bound_bn"] == pytest.approx(16.0 / 27.0, rel=1e-11)
        assert first["oracle_exact"] == 0.375
        over_budget = [row for row in rows if row["n"] == 32]
        assert all(row["oracle_exact"] is None for row in over_budget)
        endpoint = next(row for row in rows if row["n"] == 4 and row["s"] == 1.0)
        assert endpoint["bound_bn"] == 0.0625
        assert endpoint["oracle_exact"] == 0.0625
        assert endpoint["bernstein_numeric"] is None

    def test_matches_written_file(self, capsys, tmp_path):
        args = "sweep --n 4 --beta 1.5,2 --s 0.25,0.75 --trials 300 --seed 5".split()
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        path = tmp_path / "sweep.csv"
        assert main(args + ["--out", str(path)]) == 0
        capsys.readouterr()
        assert path.read_text(encoding="ascii") == out

    def test_json_format(self, capsys):
        code, out, _ = run_cli(
            capsys, *"sweep --n 4 --beta 2 --s 0.5 --trials 200 --format json".split()
        )
        assert code == 0
        rows = json.loads(out)
        assert rows[0]["n"] == 4
        assert rows[0]["x"] == 1.0

    def test_exit_codes_on_bad_grids(self, capsys):
        assert run_cli(capsys, *"sweep --n 4 --s 0.9,0.3".split())[0] == 2
        assert run_cli(capsys, *"sweep --n 4 --s 0.5,1.5".split())[0] == 2
        assert run_cli(capsys, *"sweep --n 4 --s 0.5 --stat tstat".split())[0] == 2
        assert run_cli(capsys, *"sweep --n four --s 0.5".split())[0] == 2

    def test_unwritable_path(self, capsys):
        code, _, err = run_cli(
            capsys, *"sweep --n 4 --beta 2 --s 0.5 --trials 0 --out /no/such/dir/x.csv".split()
        )
        assert code == 2
        assert err.startswith("error:")

    def test_repeat_invocations_byte_identical(self, capsys):
        args = "sweep --n 6 --beta 2 --s 0.4,0.8 --trials 5000 --seed 11".split()
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second


class TestVerifyCommand:
    def test_fast_run_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--fast")
        assert code == 0
        lines = [line for line in out.splitlines() if line.startswith("PASS")]
        assert len(lines) == 21
        assert all("FAIL" not in line for line in lines)


class TestProcessLevel:
    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "selfnorm", "bound", "--n", "4", "--x", "2"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "value=0.0625" in proc.stdout

    def test_help_exits_zero(self, capsys):
        assert run_cli(capsys, "--help")[0] == 0

    def test_missing_command_exits_two(self, capsys):
        assert run_cli(capsys)[0] == 2

    def test_thread_env_does_not_change_bytes(self, tmp_path):
        outputs = []
        for threads in ("1", "2", "8"):
            env = dict(os.environ, SELFNORM_THREADS=threads)
            proc = subprocess.run(
                [sys.executable, "-m", "selfnorm", "sweep", "--n", "4,12", "--beta", "2",
                 "--s", "0.3,0.6,1.0", "--trials", "3000", "--seed", "7"],
                capture_output=True,
                env=env,
            )
            assert proc.returncode == 0
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1] == outputs[2]
