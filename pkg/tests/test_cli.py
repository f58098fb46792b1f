from __future__ import annotations

import json

from stoprule import dice, win_probability, threshold
from stoprule.cli import main


def run_cli(capsys, *argv: str) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestThresholdCommand:
    def test_dice_table(self, capsys):
        code, out = run_cli(capsys, "threshold", "--model", "dice", "--n", "10", "--faces", "6")
        assert code == 0
        assert "threshold              6" in out
        assert "0.401878" in out

    def test_json_round_trips_full_precision(self, capsys):
        code, out = run_cli(
            capsys, "threshold", "--model", "dice", "--n", "10", "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        exact = win_probability(dice(10, 6), threshold(dice(10, 6)))
        assert payload["win_probability"] == exact  # bitwise equal after re-parse

    def test_byte_identical_invocations(self, capsys):
        _, first = run_cli(capsys, "threshold", "--model", "secretary", "--n", "50")
        _, second = run_cli(capsys, "threshold", "--model", "secretary", "--n", "50")
        assert first == second

    def test_inline_probs_with_availability(self, capsys):
        code, out = run_cli(
            capsys,
            "threshold",
            "--p", "0.5,0.5",
            "--availability", "0.5,1.0",
            "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["n"] == 2


class TestExitCodes:
    def test_invalid_input_is_one(self, capsys):
        assert main(["threshold", "--p", "1.5"]) == 1
        assert main(["threshold"]) == 1
        assert main(["value", "--model", "dice", "--n", "5", "--s", "9"]) == 1

    def test_assumption_violation_is_two(self, capsys):
        assert main(["markov", "--alpha", "0.3", "--beta", "0.0", "--N", "5"]) == 2
        assert main(["mth-last", "--p", "1.0,0.5", "--m", "1"]) == 2
        assert (
            main(["markov", "--tamaki", "--alphas", "0.2,0.3", "--betas", "0.5,0.6"]) == 2
        )

    def test_guard_is_three(self, capsys):
        probs = ",".join(["0.5"] * 16)
        assert main(["oracle-check", "--p", probs, "--objective", "mth-last", "--m", "2"]) == 3

    def test_unknown_flag_is_one(self, capsys):
        assert main(["threshold", "--nonsense"]) == 1


class TestProblemFiles:
    def test_file_input(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        path.write_text(
            json.dumps({"schema_version": 1, "model": {"kind": "dice", "n": 10, "faces": 6}})
        )
        code, out = run_cli(capsys, "threshold", "--file", str(path), "--format", "json")
        assert code == 0
        assert json.loads(out)["threshold"] == 6

    def test_schema_rejection_is_one(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"schema_version": 1, "model": {"kind": "dice"}}))
        assert main(["threshold", "--file", str(path)]) == 1
        path.write_text(json.dumps({"schema_version": 9, "model": {"kind": "dice", "n": 5}}))
        assert main(["threshold", "--file", str(path)]) == 1

    def test_markov_file(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        path.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "model": {"kind": "markov", "N": 12, "alpha": 0.1, "beta": 0.6},
                }
            )
        )
        code, out = run_cli(capsys, "markov", "--file", str(path), "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["islands"] == ["0..8"]
        assert abs(payload["dp_gap"]) < 1e-10


class TestRuleCommands:
    def test_value_with_override(self, capsys):
        code, out = run_cli(
            capsys, "value", "--model", "dice", "--n", "10", "--s", "4", "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["threshold"] == 4 and payload["optimal_threshold"] == 6

    def test_last_m(self, capsys):
        code, out = run_cli(
            capsys, "last-m", "--model", "dice", "--n", "10", "--m", "2", "--format", "json"
        )
        payload = json.loads(out)
        assert code == 0 and payload["threshold"] == 3

    def test_multi_select(self, capsys):
        code, out = run_cli(
            capsys, "multi-select", "--model", "dice", "--n", "10", "--chances", "2",
            "--format", "json",
        )
        payload = json.loads(out)
        assert code == 0 and payload["thresholds"] == [6, 3]

    def test_ferguson(self, capsys):
        code, out = run_cli(
            capsys, "ferguson", "--model", "dice", "--n", "10", "--m", "2", "--format", "json"
        )
        payload = json.loads(out)
        assert code == 0 and payload["derivations_agree"] is True

    def test_markov_nonhomogeneous_flags(self, capsys):
        code, out = run_cli(
            capsys,
            "markov",
            "--N", "2",
            "--alphas", "0.3,0.3,0.3",
            "--betas", "0.7,0.7,0.7",
            "--format", "json",
        )
        payload = json.loads(out)
        assert code == 0 and payload["islands"] == ["0..2"]

    def test_markov_tamaki_flags(self, capsys):
        code, out = run_cli(
            capsys,
            "markov", "--tamaki",
            "--alphas", "0.3,0.3,0.3,0.3",
            "--betas", "0.7,0.7,0.7,0.7",
            "--format", "json",
        )
        payload = json.loads(out)
        assert code == 0 and payload["threshold"] == 2 and payload["dp_gap"] > 0


class TestSimulationCommands:
    def test_lap_play(self, capsys):
        code, out = run_cli(
            capsys, "lap", "--T", "1", "--times", "0.55,0.9", "--format", "json"
        )
        payload = json.loads(out)
        assert code == 0 and payload["stopped_at"] == 1 and payload["win"] is False

    def test_lap_estimate_seeded(self, capsys):
        args = ("lap", "--T", "2", "--thin-p", "0.5", "--trials", "8192", "--seed", "5",
                "--format", "json")
        _, first = run_cli(capsys, *args)
        _, second = run_cli(capsys, *args)
        assert first == second

    def test_simulate_threshold_policy(self, capsys):
        code, out = run_cli(
            capsys,
            "simulate", "--model", "dice", "--n", "10",
            "--policy", "threshold", "--s", "6",
            "--trials", "8192", "--seed", "2", "--format", "json",
        )
        payload = json.loads(out)
        assert code == 0
        assert abs(payload["estimate"] - (5 / 6) ** 5) < 4 * payload["stderr"]

    def test_simulate_seed_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("STOPRULE_SEED", "77")
        code, out = run_cli(
            capsys, "simulate", "--model", "dice", "--n", "6", "--trials", "512",
            "--format", "json",
        )
        assert code == 0 and json.loads(out)["seed"] == 77

    def test_oracle_check_match(self, capsys):
        code, out = run_cli(capsys, "oracle-check", "--model", "dice", "--n", "10")
        assert code == 0
        assert "match" in out


class TestReportCommand:
    def test_quick_report(self, tmp_path, capsys):
        code, out = run_cli(
            capsys, "report", "--out", str(tmp_path / "rep"), "--quick", "--seed", "0"
        )
        assert code == 0
        produced = {p.name for p in (tmp_path / "rep").iterdir()}
        assert {
            "tamaki_discrepancy.csv",
            "tamaki_discrepancy.png",
            "hy_grid.csv",
            "hy_grid.png",
            "secretary_asymptotics.csv",
            "secretary_asymptotics.png",
            "lap_win_rates.csv",
            "lap_win_rates.png",
        } <= produced
