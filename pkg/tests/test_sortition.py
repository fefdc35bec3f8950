import numpy as np
import pytest

import senate_simulator.adversary as adversary
import senate_simulator.model as model
import senate_simulator.sortition as sortition
from senate_simulator.exception import DomainError, SortitionTimeout
from . import small_scenario

COSTS = [round(0.05 * ix, 2) for ix in range(1, 20)]


def world_of(config, seed):
    return model.spawn_world(config, np.random.default_rng(seed))


def test_nash_probability():
    assert sortition.nash_probability(0.25, 3) == pytest.approx(0.5)
    assert sortition.nash_probability(1, 10) == 0
    assert sortition.nash_probability(0.01, 2) == pytest.approx(0.99)
    assert 0 < sortition.nash_probability(0.3, 10.7) < 1
    for c, n in [(0, 5), (-0.1, 5), (1.2, 5), (0.3, 1.5)]:
        with pytest.raises(DomainError):
            sortition.nash_probability(c, n)


def test_transmit_payoff():
    assert sortition.transmit_payoff(0, 0.3, 7, 0.4) == 0
    assert sortition.transmit_payoff(1, 0.5, 3, 0.25) == pytest.approx(0)
    assert sortition.transmit_payoff(1, 0, 5, 0.2) == pytest.approx(0.8)


def test_indifference():
    for c in COSTS:
        for n in range(2, 51):
            p = sortition.nash_probability(c, n)
            assert abs(sortition.transmit_payoff(1, p, n, c)) < 1e-12


def test_best_response():
    for c in COSTS[::3]:
        for n in range(2, 51, 7):
            p = sortition.nash_probability(c, n)
            for q in np.linspace(0, 1, 11):
                assert abs(sortition.transmit_payoff(q, p, n, c)) < 1e-12


def test_chorus_single_node():
    config = small_scenario(n_nodes=1,
                            n_candidates=1,
                            n_senators=1,
                            agreement_fault_budget=0)
    reports = sortition.run_chorus(world_of(config, 0), 10,
                                   adversary.AttackProfile(),
                                   np.random.default_rng(0))
    assert len(reports) == 1
    assert reports[0].observed_transmitters == 0
    assert reports[0].population_estimate == 1


def test_chorus_estimate():
    config = small_scenario(n_nodes=10, n_candidates=5)
    reports = sortition.run_chorus(world_of(config, 1), 10,
                                   adversary.AttackProfile(),
                                   np.random.default_rng(1))
    assert len(reports) == 10
    for item in reports:
        assert 1 <= item.receive_slot <= 10
        assert item.population_estimate == pytest.approx(
            1 + 10 / 9 * item.observed_transmitters)
        # The node and the others listening in its slot are silent.
        assert item.observed_transmitters <= 9
    alone = [item for item in reports if item.observed_transmitters == 9]
    for item in alone:
        assert item.population_estimate == pytest.approx(11)


def test_chorus_always_transmit():
    config = small_scenario(n_faulty=5)
    world = world_of(config, 2)
    reports = sortition.run_chorus(world, 200, adversary.AttackProfile(),
                                   np.random.default_rng(2))
    faulty = {item.id for item in world if item.is_faulty}
    assert len(reports) == 15
    assert not faulty & {item.node_id for item in reports}

    reports = sortition.run_chorus(world, 200,
                                   adversary.AttackProfile.disabled(),
                                   np.random.default_rng(2))
    assert len(reports) == 20


def test_chorus_bound():
    n_nodes, n_faulty, slots = 100, 20, 2000
    config = small_scenario(n_nodes=n_nodes,
                            n_faulty=n_faulty,
                            chorus_slots=slots)
    world = world_of(config, 0)
    rng = np.random.default_rng(2020)
    estimates = np.array([
        np.mean([
            item.population_estimate for item in sortition.run_chorus(
                world, slots, config.attack, rng)
        ]) for _ in range(1000)
    ])
    mean = estimates.mean()
    error = estimates.std(ddof=1) / np.sqrt(estimates.size)
    assert n_nodes - 1 <= mean
    assert mean <= n_nodes + n_faulty / (slots - 1) + 3 * error


def test_aloha_single_node():
    config = small_scenario(n_nodes=1,
                            n_candidates=1,
                            n_senators=1,
                            agreement_fault_budget=0)
    world = world_of(config, 0)
    rng = np.random.default_rng(0)
    reports = sortition.run_chorus(world, 10, config.attack, rng)
    outcome = sortition.run_aloha(world, reports, 1, 0.3, config.attack, rng)
    assert outcome.size == 1
    assert outcome.candidates[0].seat == 1
    assert outcome.candidates[0].owner == 0
    assert outcome.slots_elapsed == 1


def test_aloha_two_nodes():
    config = small_scenario(n_nodes=2,
                            n_candidates=2,
                            n_senators=1,
                            agreement_fault_budget=0)
    world = world_of(config, 4)
    rng = np.random.default_rng(4)
    reports = sortition.run_chorus(world, 10, config.attack, rng)
    outcome = sortition.run_aloha(world, reports, 2, 0.3, config.attack, rng)
    assert sorted(item.owner for item in outcome.candidates) == [0, 1]
    distances = outcome.pilot_distances()
    expected = model.true_distance(world[0], world[1])
    assert distances[0, 1] == pytest.approx(expected)
    assert distances[1, 0] == pytest.approx(expected)


def replay_aloha(world, estimates, seats, c, rng):
    """Straightforward lottery among good nodes only."""
    waiting = {
        node.id: sortition.nash_probability(c, estimates[node.id])
        if estimates[node.id] >= 2 else 1.0
        for node in world
    }
    winners, slot = [], 0
    while len(winners) < seats:
        slot += 1
        competing = sorted(waiting)
        draws = rng.random(len(competing))
        transmitters = [
            node_id for node_id, draw in zip(competing, draws)
            if draw < waiting[node_id]
        ]
        if len(transmitters) == 1:
            winners.append(transmitters[0])
            del waiting[transmitters[0]]
    return winners, slot


def test_aloha_replay():
    config = small_scenario(n_nodes=10, n_candidates=5)
    for seed in range(20):
        world = world_of(config, seed)
        reports = sortition.run_chorus(world, config.chorus_slots,
                                       config.attack,
                                       np.random.default_rng(seed))
        outcome = sortition.run_aloha(world, reports, 5, 0.3, config.attack,
                                      np.random.default_rng(seed + 1))
        estimates = {item.node_id: item.population_estimate
                     for item in reports}
        winners, slots = replay_aloha(world, estimates, 5, 0.3,
                                      np.random.default_rng(seed + 1))
        assert [item.owner for item in outcome.candidates] == winners
        assert outcome.slots_elapsed == slots


def test_seat_accounting():
    config = small_scenario(n_faulty=5, **{"attack.sybil_seats": 3})
    world = world_of(config, 9)
    rng = np.random.default_rng(9)
    reports = sortition.run_chorus(world, config.chorus_slots, config.attack,
                                   rng)
    outcome = sortition.run_aloha(world, reports, 10, config.tx_cost,
                                  config.attack, rng)
    assert outcome.size == 10
    assert [item.seat for item in outcome.candidates] == list(range(1, 11))
    seats = outcome.seats_per_owner()
    assert len(seats) <= 10
    for owner, count in seats.items():
        assert count <= (3 if world[owner].is_faulty else 1)
    for item in outcome.candidates:
        assert item.pseudonym == (item.identity.index > 0)
        assert not item.pseudonym or world[item.owner].is_faulty
    slots = [item.slot for item in outcome.candidates]
    assert slots == sorted(slots)
    assert len(set(slots)) == len(slots)


def test_sortition_timeout():
    config = small_scenario()
    world = world_of(config, 0)
    rng = np.random.default_rng(0)
    reports = sortition.run_chorus(world, config.chorus_slots, config.attack,
                                   rng)
    with pytest.raises(SortitionTimeout):
        sortition.run_aloha(world, reports, 5, 0.3, config.attack, rng,
                            slot_cap=1)
    with pytest.raises(SortitionTimeout):
        sortition.run_aloha(world, reports, 21, 0.3, config.attack, rng)
