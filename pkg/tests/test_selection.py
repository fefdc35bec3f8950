import numpy as np
import pytest

import senate_simulator.adversary as adversary
import senate_simulator.geometry as geometry
import senate_simulator.model as model
import senate_simulator.selection as selection
import senate_simulator.sortition as sortition
from senate_simulator.exception import (DegenerateGeometryError, NoDataError,
                                        QuorumError)

#: Coordinate generation settings used by the scenarios
WNC = dict(step=0.05, blend=0.5, factor=3.0, max_rounds=200)


def seated(world, profile, rng=None):
    """Seat every node of ``world``, in order, with all its identities."""
    rng = rng or np.random.default_rng(0)
    candidates = []
    for node in world:
        identities = adversary.pseudonym_positions(
            node, profile, rng) if node.is_faulty else [
                adversary.honest_identity(node)
            ]
        for identity in identities:
            candidates.append(
                sortition.Seat(len(candidates) + 1, node.id,
                               identity.is_sybil, identity,
                               len(candidates) + 1))
    return sortition.SortitionOutcome(tuple(candidates),
                                      len(candidates))


def random_world(rng, good, faulty=0):
    xy = rng.uniform(0, 200, (good + faulty, 2))
    return [
        model.NodeTruth(ix, (float(xy[ix, 0]), float(xy[ix, 1])), ix >= good,
                        0.0, 1 if ix >= good else 0)
        for ix in range(good + faulty)
    ]


def feedback(world, profile, ranging=model.RangingModel.perfect(),
             seed=0):
    outcome = seated(world, profile)
    return selection.collect_feedback(outcome, world, ranging, profile,
                                      np.random.default_rng(seed))


def test_feedback_all_good():
    rng = np.random.default_rng(0)
    world = random_world(rng, 12)
    table = feedback(world, adversary.AttackProfile())
    expected = geometry.edm_from_coords(model.positions(world))
    assert np.allclose(table.edm.values, expected.values)
    assert np.all(np.diag(table.reports) == 0)
    assert table.valid.all()


def test_feedback_shout():
    rng = np.random.default_rng(1)
    world = random_world(rng, 6, 1)
    profile = adversary.AttackProfile(shout_offset=30.0,
                                      offset_mode="shared")
    table = feedback(world, profile)
    truth = np.sqrt(
        geometry.edm_from_coords(model.positions(world)).values)
    assert np.allclose(table.edm.values, table.edm.values.T)
    assert np.allclose(table.reports[6, :6], truth[6, :6] + 30)
    assert np.allclose(table.reports[:6, 6], truth[:6, 6] + 30)
    assert np.allclose(table.reports[:6, :6], truth[:6, :6])


def test_feedback_asymmetric_lie():
    rng = np.random.default_rng(2)
    world = random_world(rng, 6, 1)
    profile = adversary.AttackProfile(shout_offset=30.0,
                                      offset_mode="shared",
                                      asymmetric_lie=True)
    table = feedback(world, profile)
    truth = np.sqrt(
        geometry.edm_from_coords(model.positions(world)).values)
    residual = np.abs(table.edm.values - table.edm.values.T)
    assert np.allclose(residual[6, :6],
                       np.abs((truth[6, :6] + 30)**2 - truth[6, :6]**2))
    assert np.allclose(residual[:6, :6], 0)


def test_symmetry_verify():
    edm = geometry.edm_from_coords(np.random.default_rng(3).normal(size=(5,
                                                                         2)))
    assert selection.symmetry_verify(edm, 1e-6) == edm

    values = np.array([[0, 25, 4], [36, 0, 9], [4, 9, 0]], dtype=float)
    result = selection.symmetry_verify(geometry.Edm(values), 5)
    assert not result.valid[0, 1] and not result.valid[1, 0]
    assert result.valid[0, 2] and result.valid[2, 1]
    assert result.valid.diagonal().all()

    values[1, 0] = 26
    result = selection.symmetry_verify(geometry.Edm(values), 5)
    assert result.valid.all()


def test_symmetry_verify_idempotent():
    rng = np.random.default_rng(4)
    world = random_world(rng, 8, 2)
    profile = adversary.AttackProfile(shout_offset=20.0,
                                      asymmetric_lie=True)
    table = feedback(world, profile, model.RangingModel.toa(1.0))
    once = selection.symmetry_verify(table.edm, 50)
    assert selection.symmetry_verify(once, 50) == once
    assert not once.complete


def test_shout_passes_symmetry():
    rng = np.random.default_rng(5)
    world = random_world(rng, 10, 2)
    table = feedback(world, adversary.AttackProfile(shout_offset=100.0))
    assert selection.symmetry_verify(table.edm, 1e-6).complete


def test_robust_wnc_triangle():
    edm = geometry.edm_from_coords([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    outcome = selection.robust_wnc(edm, rng=np.random.default_rng(0), **WNC)
    assert outcome.terminated
    assert outcome.removed == ()
    predicted = geometry.edm_from_coords(outcome.coordinates.points)
    mask = ~np.eye(3, dtype=bool)
    assert np.all(
        np.abs(np.sqrt(predicted.values[mask]) - np.sqrt(edm.values[mask])) <=
        0.01 * np.sqrt(edm.values[mask]))


def test_robust_wnc_all_good():
    mask = ~np.eye(20, dtype=bool)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        edm = geometry.edm_from_coords(rng.uniform(0, 200, (20, 2)))
        outcome = selection.robust_wnc(edm, rng=rng, **WNC)
        assert outcome.terminated
        assert outcome.removed == ()
        assert np.array_equal(outcome.coordinates.index, np.arange(20))
        predicted = np.sqrt(
            geometry.edm_from_coords(outcome.coordinates.points).values)
        truth = np.sqrt(edm.values)
        assert np.max(np.abs(predicted - truth)[mask] / truth[mask]) < 0.05


def test_robust_wnc_removes_shouter():
    episodes, caught, clean = 500, 0, 0
    for seed in range(episodes):
        rng = np.random.default_rng(seed)
        world = random_world(rng, 20, 1)
        table = feedback(world,
                         adversary.AttackProfile(shout_offset=100.0,
                                                 offset_mode="shared"),
                         seed=seed)
        edm = selection.symmetry_verify(table.edm, 1e-6)
        outcome = selection.robust_wnc(edm, rng=rng, **WNC)
        caught += 20 in outcome.removed
        clean += all(item == 20 for item in outcome.removed)
        # Monotone shrinkage
        assert sorted(outcome.coordinates.index.tolist() +
                      list(outcome.removed)) == list(range(21))
    assert caught >= 0.95 * episodes
    assert clean >= 0.8 * episodes


def test_robust_wnc_removes_several_shouters():
    mask = ~np.eye(20, dtype=bool)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        world = random_world(rng, 20, 5)
        table = feedback(world,
                         adversary.AttackProfile(shout_offset=100.0,
                                                 offset_mode="shared"),
                         seed=seed)
        edm = selection.symmetry_verify(table.edm, 1e-6)
        outcome = selection.robust_wnc(edm, rng=rng, **WNC)
        assert outcome.terminated
        assert sorted(outcome.removed) == [20, 21, 22, 23, 24]
        # The good candidates keep their exact relative positions.
        truth = np.sqrt(
            geometry.edm_from_coords(
                model.positions(world[:20])).values)
        predicted = np.sqrt(
            geometry.edm_from_coords(outcome.coordinates.points).values)
        assert np.allclose(predicted[mask], truth[mask], rtol=1e-6)


def test_robust_wnc_trace():
    rng = np.random.default_rng(6)
    edm = geometry.edm_from_coords(rng.uniform(0, 200, (6, 2)))
    trace = []
    outcome = selection.robust_wnc(edm, rng=rng, trace=trace, **WNC)
    assert len(trace) == 6 * outcome.rounds
    assert {item[1] for item in trace} == set(range(6))
    assert all(item[0] >= 1 and item[4] >= 0 for item in trace)


def test_robust_wnc_jitter_start():
    rng = np.random.default_rng(7)
    edm = geometry.edm_from_coords(rng.uniform(0, 200, (8, 2)))
    outcome = selection.robust_wnc(edm,
                                   rng=rng,
                                   init="jitter",
                                   **dict(WNC, max_rounds=5))
    assert outcome.rounds <= 5
    assert outcome.coordinates.size + len(outcome.removed) == 8
    with pytest.raises(ValueError):
        selection.robust_wnc(edm, rng=rng, init="origin", **WNC)


def test_robust_wnc_errors():
    rng = np.random.default_rng(8)
    with pytest.raises(DegenerateGeometryError):
        selection.robust_wnc(
            geometry.edm_from_coords([(0.0, 0.0), (1.0, 1.0)]),
            rng=rng,
            **WNC)
    edm = geometry.edm_from_coords(rng.uniform(0, 200, (5, 2)))
    with pytest.raises(NoDataError):
        selection.robust_wnc(edm.invalidate(np.ones((5, 5), dtype=bool)),
                             rng=rng,
                             **WNC)


def test_kmeans_singletons():
    rng = np.random.default_rng(9)
    points = rng.uniform(0, 200, (7, 2))
    labels, centroids = selection.kmeans(points, 7, rng)
    assert sorted(labels.tolist()) == list(range(7))
    assert np.allclose(centroids[labels], points)


def test_kmeans_blobs():
    rng = np.random.default_rng(10)
    first = rng.normal(0, 1, (15, 2))
    second = rng.normal(0, 1, (15, 2)) + (100, 0)
    labels, _ = selection.kmeans(np.vstack([first, second]), 2, rng)
    assert len(set(labels[:15].tolist())) == 1
    assert len(set(labels[15:].tolist())) == 1
    assert labels[0] != labels[15]


def test_kmeans_restart_oracle():
    points = np.random.default_rng(11).uniform(0, 200, (50, 2))
    labels, centroids = selection.kmeans(points, 7,
                                         np.random.default_rng(12))
    cost = selection.clustering_cost(points, labels, centroids)
    restarts = []
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        start = points[rng.choice(50, 7, replace=False)]
        for _ in range(100):
            assign = np.argmin(
                ((points[:, None, :] - start[None, :, :])**2).sum(axis=2),
                axis=1)
            start = np.array([
                points[assign == k].mean(axis=0)
                if np.any(assign == k) else start[k] for k in range(7)
            ])
        restarts.append(selection.clustering_cost(points, assign, start))
    assert cost <= 1.1 * np.median(restarts)


def test_kmeans_quorum():
    with pytest.raises(QuorumError):
        selection.kmeans(np.zeros((3, 2)), 4, np.random.default_rng(0))


def test_kmeans_non_empty_clusters():
    points = np.vstack([np.zeros((5, 2)), np.ones((3, 2)) * 50])
    labels, _ = selection.kmeans(points, 4, np.random.default_rng(13))
    assert sorted(set(labels.tolist())) == [0, 1, 2, 3]


def test_elect_senators():
    points = np.array([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)])
    coords = geometry.CoordinateSet(points, np.zeros(4), np.arange(4))
    roster = selection.elect_senators(coords, [0, 1, 2, 3], [5, 6, 7, 8], 4)
    assert roster.senators == (5, 6, 7, 8)
    assert roster.valid_senate

    roster = selection.elect_senators(coords, [0, 0, 1, 1], [5, 6, 7, 8], 3)
    assert not roster.valid_senate

    roster = selection.elect_senators(coords, [0, 0, 1, 1], [8, 6, 7, 5], 2)
    # Both members are as close to the centroid: the lowest identity wins.
    assert roster.senators == (6, 5)
    assert roster.valid_senate


def test_sybil_pair_single_senator():
    rng = np.random.default_rng(14)
    points = rng.uniform(0, 200, (20, 2))
    points[19] = points[18]
    coords = geometry.CoordinateSet(points, np.zeros(20), np.arange(20))
    for seed in range(20):
        labels, _ = selection.kmeans(points, 7, np.random.default_rng(seed))
        roster = selection.elect_senators(coords, labels, list(range(20)), 7)
        assert roster.valid_senate
        assert not {18, 19} <= set(roster.senators)


def test_election_rigid_motion():
    rng = np.random.default_rng(15)
    points = rng.uniform(0, 200, (30, 2))
    angle = np.pi / 6
    rotation = np.array([[np.cos(angle), -np.sin(angle)],
                         [np.sin(angle), np.cos(angle)]])
    moved = points @ rotation.T + (500.0, -20.0)
    ids = list(range(100, 130))
    for seed in range(10):
        labels, _ = selection.kmeans(points, 7, np.random.default_rng(seed))
        other, _ = selection.kmeans(moved, 7, np.random.default_rng(seed))
        assert np.array_equal(labels, other)
        first = selection.elect_senators(
            geometry.CoordinateSet(points, np.zeros(30), np.arange(30)),
            labels, ids, 7)
        second = selection.elect_senators(
            geometry.CoordinateSet(moved, np.zeros(30), np.arange(30)), other,
            ids, 7)
        assert first.senators == second.senators


def test_election_rounding_tie():
    points = np.array([(-1.0, 0.0), (1.0 + 1e-10, 0.0), (0.0, 100.0),
                       (0.0, -100.0)])
    coords = geometry.CoordinateSet(points, np.zeros(4), np.arange(4))
    # The first point is closer to the centroid by one part in 1e10 only.
    roster = selection.elect_senators(coords, [0, 0, 0, 0], [9, 3, 1, 2], 1)
    assert roster.senators == (3, )
    roster = selection.elect_senators(coords, [0, 0, 0, 0], [3, 9, 1, 2], 1)
    assert roster.senators == (3, )
