"""Tests for the multichain-pma command line."""

import csv
import json

import pytest
from typer.testing import CliRunner

from multichain_pma.average_reward.models import FixtureName
from multichain_pma.cli import EXIT_INFEASIBLE, EXIT_INVALID_MDP, app, parse_params, solve
from multichain_pma.average_reward.core.errors import InfeasibleConfigError

runner = CliRunner()


def _invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


class TestParseParams:
    """Test key=value parsing."""

    def test_json_and_list_values(self):
        """Test numbers, JSON lists and bare comma lists."""
        params = parse_params(["n=4", "sizes=[2, 3]", "ks=1,10,100", "name=abc"])

        assert params == {"n": 4, "sizes": [2, 3], "ks": [1, 10, 100], "name": "abc"}

    def test_missing_equals(self):
        """Test items without '=' are rejected."""
        with pytest.raises(InfeasibleConfigError):
            parse_params(["n4"])


@pytest.mark.integration
class TestCommands:
    """Test each command end to end."""

    def test_gen_writes_fixture(self, tmp_path):
        """Test gen writes <name>.json."""
        result = _invoke("gen", "--name", "twochain", "--out", tmp_path)

        assert result.exit_code == 0, result.output
        data = json.loads((tmp_path / "twochain.json").read_text())
        assert data["n_states"] == 3 and data["n_actions"] == 2

    def test_solve_twochain(self, tmp_path):
        """Test solve writes the state table with J = (0.5, 1, 0) under the uniform policy."""
        result = _invoke("solve", "--fixture", "twochain", "--out", tmp_path)

        assert result.exit_code == 0, result.output
        with open(tmp_path / "states.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert [float(r["J"]) for r in rows] == pytest.approx([0.5, 1.0, 0.0])
        assert [float(r["V"]) for r in rows] == pytest.approx([-0.5, 0.0, 0.0])
        for name in ("K", "Q", "G", "policy", "summary", "config"):
            assert any(p.stem == name for p in tmp_path.iterdir())

    def test_solve_returns_artifact(self, tmp_path):
        """Test the command function reports every file it wrote."""
        artifact = solve(
            mdp=None, fixture=FixtureName.TWOCHAIN, param=[], policy=None, mu="uniform", seed=0, out=tmp_path,
        )

        assert artifact.trace_csv is None
        assert sorted(artifact.tables) == ["G", "K", "Q", "policy", "states"]
        assert all(p.exists() for p in artifact.paths())
        assert artifact.summary["n_classes"] == 2

    def test_solve_from_generated_file(self, tmp_path):
        """Test solve reads an MDP written by gen."""
        _invoke("gen", "--name", "ergodic_ring", "--param", "n=4", "--seed", 2, "--out", tmp_path)

        result = _invoke("solve", "--mdp", tmp_path / "ergodic_ring.json", "--out", tmp_path / "run")

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "run" / "summary.json").read_text())
        assert summary["n_classes"] == 1

    def test_invalid_mdp_exit_code(self, tmp_path):
        """Test a row summing to 0.9 exits with code 2 and names the row."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n_states": 1, "n_actions": 1, "reward_bound": 1.0,
            "kernel": [[[0.9]]], "reward": [[0.0]],
        }))

        result = _invoke("solve", "--mdp", path, "--out", tmp_path)

        assert result.exit_code == EXIT_INVALID_MDP
        assert "P[0][0] sums to" in result.output

    def test_infeasible_floor_exit_code(self, tmp_path):
        """Test alpha >= 1/|A| exits with code 3."""
        result = _invoke("pma", "--fixture", "twochain", "--alpha", 0.6, "--iters", 2, "--out", tmp_path)

        assert result.exit_code == EXIT_INFEASIBLE

    def test_missing_source_exit_code(self, tmp_path):
        """Test a command without --mdp or --fixture exits with code 3."""
        result = _invoke("solve", "--out", tmp_path)

        assert result.exit_code == EXIT_INFEASIBLE

    def test_project(self):
        """Test project prints the worked Euclidean example."""
        result = _invoke("project", "--q", "1,0", "--alpha", 0.2, "--div", "euclid")

        assert result.exit_code == 0, result.output
        values = [float(x) for x in result.output.strip().split(",")]
        assert values == pytest.approx([0.8, 0.2], abs=1e-15)

    def test_pma_is_deterministic(self, tmp_path):
        """Test two pma runs with one seed write identical traces and summaries."""
        for run in ("a", "b"):
            result = _invoke("pma", "--fixture", "twochain", "--iters", 20, "--seed", 3, "--out", tmp_path / run)
            assert result.exit_code == 0, result.output

        for name in ("trace.csv", "final_policy.json", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        with open(tmp_path / "a" / "trace.csv", newline="") as f:
            assert len(list(csv.reader(f))) == 1 + 21

    def test_spma_sample_totals(self, tmp_path):
        """Test three sampled steps charge three critic calls of 216 samples."""
        result = _invoke(
            "spma", "--fixture", "twochain", "--iters", 3, "--n", 3, "--horizon", 5, "--n2", 3, "--horizon2", 5,
            "--out", tmp_path,
        )

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["samples_per_iteration"] == 216
        assert summary["samples_used"] == 648
        assert (tmp_path / "trace.csv").read_text().splitlines()[0].endswith(",g_error")

    def test_critic_twochain(self, tmp_path):
        """Test critic reports the exact sample count."""
        result = _invoke(
            "critic", "--fixture", "twochain", "--n", 5, "--horizon", 10, "--n2", 5, "--horizon2", 10,
            "--out", tmp_path,
        )

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["transitions"] == 600
        assert summary["samples_used"] == 660

    def test_classify_sampled(self, tmp_path):
        """Test sampled classification agrees with the exact one on twochain."""
        result = _invoke("classify", "--fixture", "twochain", "--sampled", "--out", tmp_path)

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "classification.json").read_text())
        assert summary["agrees"] is True
        assert summary["recurrent_classes"] == [[1], [2]]

    def test_check_proj(self, tmp_path):
        """Test a passing suite exits 0 and writes its report."""
        result = _invoke("check", "--suite", "proj", "--param", "n_cases=50", "--out", tmp_path)

        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "check_proj.json").read_text())
        assert report["passed"] is True

    def test_check_unknown_param(self):
        """Test a bad suite parameter exits with code 3."""
        result = _invoke("check", "--suite", "proj", "--param", "bogus=1")

        assert result.exit_code == EXIT_INFEASIBLE
