"""Tests for the fixture generators and the JSON/CSV exporters."""

import csv
import json

import numpy as np
import pytest

from multichain_pma.average_reward.core.chain_analysis import classify
from multichain_pma.average_reward.core.errors import (
    DimensionMismatchError,
    InfeasibleConfigError,
    InvalidMdpError,
    InvalidPolicyError,
)
from multichain_pma.average_reward.core.mdp_core import validate_mdp
from multichain_pma.average_reward.core.pma import run_pma
from multichain_pma.average_reward.core.sampling import GenerativeModel, run_spma
from multichain_pma.average_reward.models import (
    CriticConfig,
    DivergenceKind,
    ExperimentConfig,
    FixtureName,
    Policy,
    StepSchedule,
)
from multichain_pma.average_reward.utils.exporters import (
    DataExporter,
    load_distribution,
    load_mdp,
    load_policy,
)
from multichain_pma.average_reward.utils.fixtures import gen_fixture

UNIFORM3 = np.full(3, 1.0 / 3.0)


class TestFixtures:
    """Test the seeded MDP generators."""

    @pytest.mark.parametrize("name", list(FixtureName))
    def test_every_family_is_valid(self, name):
        """Test each generator returns an MDP that passes validation."""
        m = gen_fixture(name, seed=5)

        assert validate_mdp(m).ok

    @pytest.mark.parametrize("name", list(FixtureName))
    def test_same_seed_same_mdp(self, name):
        """Test generation depends only on the family, params and seed."""
        first = gen_fixture(name, seed=9)
        second = gen_fixture(name, seed=9)

        np.testing.assert_array_equal(first.kernel, second.kernel)
        np.testing.assert_array_equal(first.reward, second.reward)

    def test_weakly_comm_structure(self, weakly_comm):
        """Test the core is one class and the fringe is transient."""
        c = classify(weakly_comm)

        assert c.recurrent_classes == [[0, 1, 2]]
        assert c.transient == [3, 4]

    def test_unshuffled_multichain_layout(self):
        """Test classes occupy the leading states when shuffling is off."""
        m = gen_fixture(FixtureName.RANDOM_MULTICHAIN, {"sizes": [1, 3], "transient": 1, "shuffle": 0}, seed=2)
        c = classify(m)

        assert c.recurrent_classes == [[0], [1, 2, 3]]
        assert c.transient == [4]

    def test_unknown_parameter(self):
        """Test misspelled parameters are rejected."""
        with pytest.raises(InfeasibleConfigError):
            gen_fixture(FixtureName.ERGODIC_RING, {"size": 4})

    def test_invalid_parameter_value(self):
        """Test out-of-range values are rejected."""
        with pytest.raises(InfeasibleConfigError):
            gen_fixture(FixtureName.WEAKLY_COMM, {"n_actions": 1})

    def test_unknown_family(self):
        """Test an unknown fixture name is rejected."""
        with pytest.raises(InfeasibleConfigError):
            gen_fixture("threechain")


class TestExporters:
    """Test writing and reading run artifacts."""

    def test_mdp_round_trip(self, tmp_path, multichain):
        """Test an exported MDP loads back unchanged."""
        path = DataExporter(tmp_path).export_mdp(multichain, "m")

        loaded = load_mdp(path)

        np.testing.assert_array_equal(loaded.kernel, multichain.kernel)
        np.testing.assert_array_equal(loaded.reward, multichain.reward)
        assert set(json.loads(path.read_text())) == {"n_states", "n_actions", "reward_bound", "kernel", "reward"}

    def test_missing_field(self, tmp_path):
        """Test a document without a kernel raises InvalidMdpError."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_states": 1, "n_actions": 1, "reward_bound": 1.0, "reward": [[0.0]]}))

        with pytest.raises(InvalidMdpError) as info:
            load_mdp(path)

        assert info.value.violations == ["missing field 'kernel'"]

    def test_inconsistent_shapes(self, tmp_path):
        """Test a kernel of the wrong shape raises InvalidMdpError."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n_states": 2, "n_actions": 1, "reward_bound": 1.0,
            "kernel": [[[1.0]]], "reward": [[0.0], [0.0]],
        }))

        with pytest.raises(InvalidMdpError):
            load_mdp(path)

    def test_policy_loading(self, tmp_path):
        """Test dict and bare-table policy documents, plus shape checks."""
        (tmp_path / "p.json").write_text(json.dumps({"table": [[0.25, 0.75]], "floor": 0.1}))
        (tmp_path / "bare.json").write_text(json.dumps([[0.5, 0.5]]))
        (tmp_path / "bad.json").write_text(json.dumps([[0.5, 0.6]]))

        assert load_policy(tmp_path / "p.json", 1, 2).floor == 0.1
        assert load_policy(tmp_path / "bare.json").table.shape == (1, 2)
        with pytest.raises(DimensionMismatchError):
            load_policy(tmp_path / "bare.json", 2, 2)
        with pytest.raises(InvalidPolicyError):
            load_policy(tmp_path / "bad.json")

    def test_distribution_loading(self, tmp_path):
        """Test both accepted distribution layouts."""
        (tmp_path / "a.json").write_text(json.dumps({"mu": [0.2, 0.8]}))
        (tmp_path / "b.json").write_text(json.dumps([0.2, 0.8]))

        np.testing.assert_array_equal(load_distribution(tmp_path / "a.json"), [0.2, 0.8])
        np.testing.assert_array_equal(load_distribution(tmp_path / "b.json"), [0.2, 0.8])

    def test_trace_has_one_row_per_iterate(self, tmp_path, twochain):
        """Test the trace CSV holds K + 1 rows with the fixed headers."""
        trace = run_pma(twochain, UNIFORM3, 0.05, StepSchedule(eta0=0.5), iters=7)

        path = DataExporter(tmp_path).export_trace(trace)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))

        assert rows[0] == ["k", "J_mu", "gap", "eta", "divergence_to_ref", "samples_cum"]
        assert len(rows) == 1 + 8
        assert rows[-1][3] == ""
        assert float(rows[1][1]) == trace.records[0].j_mu

    def test_stochastic_trace_adds_error_column(self, tmp_path, twochain):
        """Test generative-model traces carry g_error."""
        trace = run_spma(
            GenerativeModel(twochain, seed=1), UNIFORM3, 0.05, StepSchedule(eta0=0.5), DivergenceKind.KL, 2,
            CriticConfig(n=2, h=5, n2=2, h2=5),
        )

        path = DataExporter(tmp_path).export_trace(trace)

        assert path.read_text().splitlines()[0].endswith(",g_error")

    def test_byte_identical_reruns(self, tmp_path, multichain):
        """Test two runs with one seed write identical files."""
        mu = np.full(multichain.n_states, 1.0 / multichain.n_states)
        outputs = []
        for run in ("a", "b"):
            exporter = DataExporter(tmp_path / run)
            trace = run_pma(multichain, mu, 0.05, StepSchedule(eta0=0.5), DivergenceKind.KL, iters=10)
            exporter.export_trace(trace)
            exporter.export_policy(Policy(table=trace.final.policy, floor=0.05), "final_policy")
            exporter.export_config(ExperimentConfig(fixture=FixtureName.RANDOM_MULTICHAIN, seed=3))
            outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).iterdir())})

        assert outputs[0] == outputs[1]
        assert set(outputs[0]) == {"trace.csv", "final_policy.json", "config.json"}

    def test_action_table_columns(self, tmp_path):
        """Test one column per action after the state index."""
        path = DataExporter(tmp_path).export_action_table(np.array([[0.5, 0.25, 0.25]]), "G")

        assert path.read_text().splitlines() == ["state,a0,a1,a2", "0,0.5,0.25,0.25"]
