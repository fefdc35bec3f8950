import dataclasses
import pytest

import senate_simulator.harness as harness
import senate_simulator.selection as selection
import senate_simulator.settings as settings
from senate_simulator.exception import ConfigurationError
from . import small_scenario


def test_all_good_episode():
    config = small_scenario(n_nodes=10, n_candidates=6)
    for seed in range(5):
        result = harness.run_episode(config, seed)
        assert result.failure is None
        assert result.valid_senate
        assert len(result.senators) == 4
        assert result.agreement_ok
        assert result.median_valid
        assert result.median_valid_actual
        assert result.removed == ()
        assert result.sybil_seats == 0
        assert result.faulty_senators == 0
        assert -1 <= result.decision <= 1
        assert sum(count for _, count in result.seats_per_owner) == 6


def test_forced_quorum_failure(monkeypatch):
    def elect(coordinates, assignments, ids, k):
        return selection.SenateRoster((), tuple(assignments), False)

    monkeypatch.setattr(harness.selection, "elect_senators", elect)
    result = harness.run_episode(small_scenario(), 0)
    assert not result.valid_senate
    assert result.failure == "quorum"
    assert result.decision is None
    assert not result.agreement_ok and not result.median_valid


def test_determinism():
    config = small_scenario(n_faulty=4, **{"attack.sybil_seats": 2})
    assert harness.run_episode(config, 17) == harness.run_episode(config, 17)


def test_trace():
    trace = harness.EpisodeTrace()
    result = harness.run_episode(small_scenario(), 1, trace)
    assert result.failure is None
    assert len(trace.wnc) == 10 * result.wnc_rounds
    assert len(trace.agreement) == 2
    assert [item[0] for item in trace.agreement] == [1, 2]


def test_disabled_attack_matches_all_good_world():
    honest = small_scenario()
    disabled = small_scenario(
        n_faulty=6,
        faulty_values="-1, 1",
        **{
            "attack.chorus_always_transmit": False,
            "attack.ba_strategy": "honest",
        })
    for seed in range(5):
        first = harness.run_episode(honest, seed)
        second = harness.run_episode(disabled, seed)
        assert first.senators == second.senators
        assert first.removed == second.removed
        assert first.slots == second.slots
        assert first.decision == second.decision


def test_every_node_faulty():
    config = small_scenario(n_faulty=20)
    result = harness.run_episode(config, 0)
    assert result.failure is not None
    assert result.faulty_senators == len(result.senators)
    assert not result.median_valid
    result = harness.run_baseline_episode(config, 0)
    assert result.failure == "no-good-values"
    assert not result.median_valid


def test_baseline_episode():
    result = harness.run_baseline_episode(small_scenario(), 0)
    assert result.failure is None
    assert result.agreement_ok and result.median_valid

    config = small_scenario(n_faulty=3, **{"attack.sybil_seats": 4})
    result = harness.run_baseline_episode(config, 0)
    assert result.sybil_seats == 0
    assert result.faulty_senators == 3
    assert result.median_valid
    result = harness.run_baseline_episode(config, 0, sybil=True)
    assert result.sybil_seats == 9
    assert result.faulty_senators == 12


def test_episode_result_invariants():
    with pytest.raises(ValueError):
        harness.EpisodeResult(seed=0, n_faulty=0)
    with pytest.raises(ValueError):
        harness.EpisodeResult(seed=0, n_faulty=0, decision=1.0,
                              failure="quorum")
    with pytest.raises(ValueError):
        harness.EpisodeResult(seed=0, n_faulty=0, decision=1.0,
                              median_valid=True)


def test_run_sweep():
    config = small_scenario()
    rows = harness.run_sweep(config, [0, 20], episodes=3)
    assert [row.faulty_count for row in rows] == [0, 20]
    assert rows[0].episodes == 3
    assert rows[0].valid_rate == 1.0
    assert rows[0].consensus_rate == 1.0
    assert rows[0].mean_sybil_seats == 0
    assert rows[1].valid_rate == 0.0
    assert not any(row.baseline for row in rows)
    assert all(row.seed == config.seed for row in rows)
    assert rows == harness.run_sweep(config, [0, 20], episodes=3)


def test_run_sweep_seeds():
    config = small_scenario(seed=40)
    rows = harness.run_sweep(config, [2], episodes=2)
    results = [
        harness.run_episode(config.updated(n_faulty=2), seed)
        for seed in (40, 41)
    ]
    assert rows[0] == harness.reduce_episodes(2, results, False, 40)


def test_run_sweep_invalid_count():
    with pytest.raises(ConfigurationError):
        harness.run_sweep(small_scenario(), [0, 21], episodes=1)


def test_run_baseline():
    config = small_scenario(**{"attack.sybil_seats": 3})
    rows = harness.run_baseline(config, [0, 2], episodes=3)
    assert all(row.baseline for row in rows)
    assert rows[0].valid_rate == 1.0
    assert rows[1].valid_rate == 1.0
    assert rows[1].mean_sybil_seats == 0
    rows = harness.run_baseline(config, [2], episodes=3, sybil=True)
    assert rows[0].mean_sybil_seats == 4


def test_baseline_honest_majority():
    config = small_scenario(**{"attack.sybil_seats": 2})
    rows = harness.run_baseline(config, [9, 11], episodes=3)
    assert [row.valid_rate for row in rows] == [1.0, 0.0]
    assert all(row.consensus_rate == 1.0 for row in rows)
    # With their pseudonyms, 7 faulty nodes out of 20 hold 14 of the 27 identities.
    rows = harness.run_baseline(config, [6, 7], episodes=3, sybil=True)
    assert [row.valid_rate for row in rows] == [1.0, 0.0]


def test_senate_matches_baseline_under_sybil_attack():
    config = settings.ScenarioConfig({
        "attack.sybil_seats": 3,
        "attack.shout_offset": 100.0
    })
    counts = [0, 20, 30]
    senate = harness.run_sweep(config, counts, episodes=40)
    baseline = harness.run_baseline(config, counts, episodes=40)
    sybil = harness.run_baseline(config, counts, episodes=40, sybil=True)
    for row, reference in zip(senate, baseline):
        assert reference.valid_rate == 1.0
        assert row.valid_rate >= reference.valid_rate - 0.1
    assert sybil[2].valid_rate < 0.2
    for row in senate[1:]:
        assert row.mean_sybil_seats > 0
        assert row.mean_faulty_senators < config.n_senators / 3


def test_reduce_episodes():
    results = [
        harness.EpisodeResult(seed=0,
                              n_faulty=1,
                              decision=0.1,
                              agreement_ok=True,
                              median_valid=True,
                              sybil_seats=2,
                              faulty_senators=1),
        harness.EpisodeResult(seed=1, n_faulty=1, failure="quorum"),
    ]
    row = harness.reduce_episodes(1, results, False, 0)
    assert row.consensus_rate == 0.5
    assert row.valid_rate == 0.5
    assert row.valid_rate_actual == 0
    assert row.mean_sybil_seats == 1
    assert row.mean_faulty_senators == 0.5
    assert dataclasses.astuple(row)[0] == 1
    with pytest.raises(ValueError):
        harness.reduce_episodes(1, [], False, 0)
