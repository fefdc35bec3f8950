import math
import pickle
import pytest

import senate_simulator.settings as settings
from senate_simulator.exception import ConfigurationError
from senate_simulator.model import RangingModel
from . import SAMPLE


def test_defaults():
    config = settings.ScenarioConfig()
    assert config.n_nodes == 100
    assert config.n_candidates == 50
    assert config.n_senators == 7
    assert config.agreement_fault_budget == 2
    assert config.ranging.is_perfect
    assert config.symmetry_tol == settings.MIN_SYMMETRY_TOL
    assert config.attack.sybil_seats == 1
    assert config.attack.ba_strategy == "extreme"


def test_sample_file():
    config = settings.ScenarioConfig.from_file(SAMPLE)
    defaults = settings.ScenarioConfig()
    assert dict(config.items()) == dict(defaults.items())


def test_file_format(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("# comment\n\nn_nodes = 30  # inline\n"
                    "n_candidates = 12\nn_senators = 7\n"
                    "ranging = toa:1.0\nattack.sybil_seats=3\n")
    config = settings.ScenarioConfig.from_file(str(path), {"n_faulty": "4"})
    assert config.n_nodes == 30
    assert config.n_faulty == 4
    assert config.n_candidates == 12
    assert config.n_senators == 7
    assert config.ranging == RangingModel.toa(1.0)
    assert config.attack.sybil_seats == 3

    path.write_text("n_nodes = 30\nthis line is wrong\n")
    with pytest.raises(ConfigurationError, match=":2:"):
        settings.load_config_file(str(path))

    path.write_text("n_nodes = 30\nn_nodes = 40\n")
    with pytest.raises(ConfigurationError, match="duplicate"):
        settings.load_config_file(str(path))


def test_unknown_and_invalid_values():
    with pytest.raises(ConfigurationError, match="unknown"):
        settings.ScenarioConfig({"n_node": 10})
    with pytest.raises(ConfigurationError, match="tx_cost"):
        settings.ScenarioConfig({"tx_cost": "1.5"})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"wnc_error_blend": 0})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"attack.ba_strategy": "bribe"})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"n_nodes": "none"})


def test_cross_field_invariants():
    with pytest.raises(ConfigurationError, match="3"):
        settings.ScenarioConfig({"n_senators": 6})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"n_candidates": 5})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"n_nodes": 40})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"n_faulty": 101})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"chorus_slots": 1})
    with pytest.raises(ConfigurationError):
        settings.ScenarioConfig({"removal_factor": 1})


def test_updated():
    config = settings.ScenarioConfig({"n_nodes": 60, "attack.sybil_seats": 2})
    other = config.updated(n_faulty=10)
    assert other.n_faulty == 10
    assert other.n_nodes == 60
    assert other.attack.sybil_seats == 2
    assert config.n_faulty == 0
    third = other.updated({"attack.shout_offset": 100})
    assert third.attack.shout_offset == 100
    assert third.n_faulty == 10


def test_pickle():
    config = settings.ScenarioConfig({"ranging": "rss:0.1", "n_faulty": 3})
    other = pickle.loads(pickle.dumps(config))
    assert dict(other.items()) == dict(config.items())


def test_default_symmetry_tol():
    toa = settings.default_symmetry_tol(RangingModel.toa(1.0), 200)
    assert toa == pytest.approx(6 * 2 * math.sqrt(2) * math.sqrt(2) * 200)
    rss = settings.default_symmetry_tol(RangingModel.rss(0.1), 200)
    assert rss == pytest.approx(6 * 2 * math.sqrt(2) * 2 * 200**2 * 0.1)
    config = settings.ScenarioConfig({"ranging": "toa:1.0"})
    assert config.symmetry_tol == pytest.approx(toa)
    config = settings.ScenarioConfig({
        "ranging": "toa:1.0",
        "symmetry_tol": "5"
    })
    assert config.symmetry_tol == 5


def test_parse_overrides():
    assert settings.parse_overrides(iter(["n_nodes=10", "seed = 3"])) == {
        "n_nodes": "10",
        "seed": "3"
    }
    with pytest.raises(ConfigurationError):
        settings.parse_overrides(iter(["n_nodes"]))


def test_validators():
    assert settings.Interval()("99, 101") == (99.0, 101.0)
    assert settings.Boolean()("Yes") is True
    assert settings.Boolean()("off") is False
    with pytest.raises(ValueError):
        settings.Interval()("2, 1")
    with pytest.raises(ValueError):
        settings.Boolean()("maybe")
    with pytest.raises(ValueError):
        settings.Seed(-1)
    with pytest.raises(ValueError):
        settings.Real("nan")
