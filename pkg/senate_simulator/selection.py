# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Senator selection
-----------------

The candidates feed back the distances they estimated from the pilots of
the lottery. Inconsistent pairs are discarded, wireless network coordinates
are generated while the candidate whose local error stands out is removed
(seesaw test), then the survivors are clustered and the candidate closest
to each centroid becomes a senator.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple
import dataclasses
import logging
import math
import numba as nb
import numpy as np
import scipy.spatial.distance
from . import adversary
from . import geometry
from .exception import DegenerateGeometryError, NoDataError, QuorumError
from .model import NodeTruth, RangingModel, estimate_distance
from .sortition import SortitionOutcome

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Maximum number of Lloyd iterations
MAX_ITERATIONS = 100


@dataclasses.dataclass(frozen=True, eq=False)
class FeedbackTable:
    """Distances fed back by the candidates.

    Args:
        reports (numpy.ndarray): S×S plain distances, row i being the
            vector reported by candidate i.
        edm (geometry.Edm): Squared reports with their validity.
    """
    reports: np.ndarray
    edm: geometry.Edm

    @property
    def valid(self) -> np.ndarray:
        return self.edm.valid


@dataclasses.dataclass(frozen=True)
class SenateRoster:
    """Outcome of the election.

    Args:
        senators (tuple): Identities of the senators, one per cluster.
        assignments (tuple): Cluster of each surviving candidate.
        valid_senate (bool): True if K senators from K distinct clusters
            were elected.
    """
    senators: Tuple[int, ...]
    assignments: Tuple[int, ...]
    valid_senate: bool


class WncOutcome(NamedTuple):
    """Result of the robust coordinate generation."""
    #: Coordinates of the surviving candidates.
    coordinates: geometry.CoordinateSet
    #: Removed candidates, as positions in the original list, in order.
    removed: Tuple[int, ...]
    #: False if the round budget ran out before the errors evened out.
    terminated: bool
    #: Rounds played.
    rounds: int


def collect_feedback(outcome: SortitionOutcome, world: Sequence[NodeTruth],
                     ranging: RangingModel, attack: adversary.AttackProfile,
                     rng: np.random.Generator) -> FeedbackTable:
    """Build the table of distances reported by the candidates.

    Candidate i estimates its distance to candidate j from the pilot j sent
    when seated, which already carries j's forgery. Good candidates report
    their estimates; identities of faulty nodes apply their forgery to
    their reports too, so that a shout keeps the table symmetric unless the
    liar only inflates its reports. Estimates are drawn in row-major order.

    Args:
        outcome (SortitionOutcome): Seated candidates.
        world (list): Nodes, indexed by identifier.
        ranging (RangingModel): Ranging error model.
        attack (adversary.AttackProfile): Attack profile.
        rng (numpy.random.Generator): Random stream.

    Returns:
        FeedbackTable: The reports and their EDM.
    """
    pilots = outcome.pilot_distances()
    size = outcome.size
    reports = np.zeros((size, size))
    for i, seat in enumerate(outcome.candidates):
        liar = world[seat.owner].is_faulty
        for j in range(size):
            if i == j:
                continue
            measured = estimate_distance(pilots[i, j], ranging, rng)
            reports[i, j] = seat.identity.distort(
                measured) if liar else measured
    LOGGER.debug("feedback of %d candidates (asymmetric lie: %s)", size,
                 attack.asymmetric_lie)
    return FeedbackTable(reports, geometry.Edm(reports**2))


def symmetry_verify(edm: geometry.Edm, tolerance: float) -> geometry.Edm:
    """Discard the pairs whose two squared reports differ by ``tolerance``
    or more; both directions are discarded since the liar cannot be told
    apart.

    Args:
        edm (geometry.Edm): Squared reports.
        tolerance (float): Tolerance ε in m².

    Returns:
        geometry.Edm: The EDM with updated validity.
    """
    paired = edm.valid & edm.valid.T
    residual = np.abs(edm.values - edm.values.T)
    rejected = ~paired | (residual >= tolerance)
    result = edm.invalidate(rejected)
    LOGGER.debug("symmetry verification discarded %d entries",
                 int(edm.valid.sum() - result.valid.sum()))
    return result


@nb.njit(cache=True, nogil=True)
def _sweep(points: np.ndarray, error: np.ndarray, distance: np.ndarray,
           usable: np.ndarray, step: float, blend: float,
           angles: np.ndarray) -> None:
    """One row-major pass over the usable ordered pairs (i, j), moving
    x_i only."""
    size = points.shape[0]
    for i in range(size):
        for j in range(size):
            if not usable[i, j]:
                continue
            dx = points[i, 0] - points[j, 0]
            dy = points[i, 1] - points[j, 1]
            predicted = math.sqrt(dx * dx + dy * dy)
            if predicted > 0:
                ux = dx / predicted
                uy = dy / predicted
            else:
                ux = math.cos(angles[i, j])
                uy = math.sin(angles[i, j])
            total = error[i] + error[j]
            weight = error[i] / total if total > 0 else 0.5
            target = distance[i, j]
            relative = (predicted - target) / target
            error[i] = abs(relative) * blend * weight + (
                1.0 - blend * weight) * error[i]
            move = step * weight * (target - predicted)
            points[i, 0] += move * ux
            points[i, 1] += move * uy


def _fill_reports(values: np.ndarray, known: np.ndarray,
                  usable: np.ndarray) -> np.ndarray:
    """Symmetric squared reports, discarded entries replaced by the median
    of the usable ones."""
    both = known & known.T
    filled = np.where(both, 0.5 * (values + values.T),
                      np.where(known, values, values.T))
    missing = ~(known | known.T)
    np.fill_diagonal(missing, False)
    filled = np.where(missing, np.median(values[usable]), filled)
    np.fill_diagonal(filled, 0)
    return filled


def _centered_gram(filled: np.ndarray, index: np.ndarray) -> np.ndarray:
    return geometry.gram_from_edm(
        geometry.Edm(filled[np.ix_(index, index)]), anchor=None)


def _peel(filled: np.ndarray) -> np.ndarray:
    """Candidates kept to compute the start.

    While the kept reports leak out of the plane, the candidate whose
    departure leaves the smallest leakage is set aside. A strict majority
    of the candidates, and at least three, are always kept.
    """
    kept = np.arange(filled.shape[0])
    floor = max(3, filled.shape[0] // 2 + 1)
    while kept.size > floor:
        if geometry.low_rank_leakage(_centered_gram(filled, kept), 2) == 0:
            break
        leakage = [
            geometry.low_rank_leakage(
                _centered_gram(filled, np.delete(kept, ix)), 2)
            for ix in range(kept.size)
        ]
        kept = np.delete(kept, int(np.argmin(leakage)))
    return kept


def _trilaterate(anchors: np.ndarray, squared: np.ndarray) -> np.ndarray:
    """Least-squares position at the squared distances ``squared`` from
    ``anchors``, the circle equations being linearized around their
    mean."""
    norms = np.sum(anchors**2, axis=1)
    lhs = -2.0 * (anchors - anchors.mean(axis=0))
    rhs = squared - squared.mean() - (norms - norms.mean())
    return np.linalg.lstsq(lhs, rhs, rcond=None)[0]


def _mds_start(values: np.ndarray, known: np.ndarray,
               usable: np.ndarray) -> np.ndarray:
    """Classical MDS of the reports of the candidates that embed in the
    plane; the candidates set aside are trilaterated from them."""
    filled = _fill_reports(values, known, usable)
    kept = _peel(filled)
    points = np.zeros((filled.shape[0], 2))
    points[kept] = geometry.classical_mds(_centered_gram(filled, kept),
                                          dim=2).points
    aside = np.setdiff1d(np.arange(filled.shape[0]), kept)
    for ix in aside:
        points[ix] = _trilaterate(points[kept], filled[ix, kept])
    if aside.size:
        LOGGER.debug("start computed without candidates %s", aside.tolist())
    return points


def _local_error(points: np.ndarray, distance: np.ndarray,
                 usable: np.ndarray) -> np.ndarray:
    """Median over the usable pairs of each candidate of the relative error
    between predicted and reported distances."""
    predicted = scipy.spatial.distance.squareform(
        scipy.spatial.distance.pdist(points))
    relative = np.abs(predicted - distance) / np.where(usable, distance, 1.0)
    return np.ma.filled(
        np.ma.median(np.ma.masked_array(relative, mask=~usable), axis=1),
        0.0)


def robust_wnc(edm: geometry.Edm,
               step: float,
               blend: float,
               factor: float,
               max_rounds: int,
               rng: np.random.Generator,
               sweeps: int = 20,
               error_floor: float = 0.001,
               init: str = "mds",
               trace: Optional[List[Tuple]] = None) -> WncOutcome:
    """Generate wireless network coordinates while removing location
    forgers.

    Each round runs ``sweeps`` row-major passes over the usable pairs. For
    pair (i, j) the weight is w = e_i / (e_i + e_j); the local error e_i
    blends the relative error |r| with factor δw and x_i is pushed away
    from x_j when the reported distance exceeds the predicted one, pulled
    otherwise, by γ·w times the gap. After a round, the local error of each
    candidate is measured again as the median relative error over its usable
    pairs. The candidate with the largest local error is then removed if
    that error exceeds both β times the mean error and ``error_floor``;
    otherwise the generation terminates.

    The MDS start greedily sets aside the candidates whose reports leak out
    of the plane, keeping at least a strict majority, embeds the others and
    trilaterates those set aside; the local errors start at their measure
    on that start. The jitter start begins with unit errors.

    Args:
        edm (geometry.Edm): Verified squared reports.
        step (float): Step γ.
        blend (float): Error blending δ.
        factor (float): Removal factor β.
        max_rounds (int): Maximum number of rounds.
        rng (numpy.random.Generator): Random stream.
        sweeps (int): Pair sweeps per round.
        error_floor (float): Local error under which nobody is removed.
        init (str): ``mds`` to start from the classical MDS of the reports,
            ``jitter`` for uniform points in [-1, 1]².
        trace (list, optional): Receives a ``(round, candidate, x, y, e)``
            tuple per candidate and round.

    Returns:
        WncOutcome: Coordinates of the survivors, removals and termination.

    Raises:
        DegenerateGeometryError: If fewer than three candidates are (or
            would be left) to embed.
        NoDataError: If no usable distance remains.
    """
    size = edm.size
    if size < 3:
        raise DegenerateGeometryError(
            f"{size} candidates cannot be embedded in the plane")
    usable = edm.valid & (edm.values > 0)
    np.fill_diagonal(usable, False)
    if not usable.any():
        raise NoDataError("every distance feedback was discarded")
    values = np.where(edm.valid, edm.values, 0.0)
    distance = np.sqrt(values)

    if init == "mds":
        points = _mds_start(values, edm.valid, usable)
        error = _local_error(points, distance, usable)
    elif init == "jitter":
        points = rng.uniform(-1.0, 1.0, size=(size, 2))
        error = np.ones(size)
    else:
        raise ValueError(f"unknown initialization {init!r}")
    alive = np.arange(size)
    removed: List[int] = []
    terminated = False

    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        angles = rng.uniform(0.0, 2 * np.pi, size=(alive.size, alive.size))
        for _ in range(sweeps):
            _sweep(points, error, distance, usable, step, blend, angles)
        error = _local_error(points, distance, usable)
        if trace is not None:
            trace.extend((rounds, int(alive[ix]), float(points[ix, 0]),
                          float(points[ix, 1]), float(error[ix]))
                         for ix in range(alive.size))

        worst = int(np.argmax(error))
        if error[worst] <= max(factor * error.mean(), error_floor):
            terminated = True
            break
        if alive.size <= 3:
            raise DegenerateGeometryError(
                "removing a candidate would leave fewer than 3 candidates")
        LOGGER.debug("round %d: candidate %d removed (error %.4g, mean %.4g)",
                     rounds, alive[worst], error[worst], error.mean())
        removed.append(int(alive[worst]))
        keep = np.delete(np.arange(alive.size), worst)
        alive = alive[keep]
        points = np.ascontiguousarray(points[keep])
        error = np.ascontiguousarray(error[keep])
        distance = np.ascontiguousarray(distance[np.ix_(keep, keep)])
        usable = np.ascontiguousarray(usable[np.ix_(keep, keep)])
        if not usable.any():
            raise NoDataError("no usable distance left between survivors")

    return WncOutcome(geometry.CoordinateSet(points, error, alive),
                      tuple(removed), terminated, rounds)


def _fill_empty(labels: np.ndarray, distances: np.ndarray,
                k: int) -> np.ndarray:
    """Reseed every empty cluster with the point farthest from its
    centroid among the clusters holding more than one point."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for cluster in np.flatnonzero(counts == 0):
        own = distances[np.arange(labels.size), labels].copy()
        own[counts[labels] <= 1] = -np.inf
        farthest = int(np.argmax(own))
        counts[labels[farthest]] -= 1
        labels[farthest] = cluster
        counts[cluster] = 1
    return labels


def _seed(points: np.ndarray, k: int,
          rng: np.random.Generator) -> np.ndarray:
    """K-means++ seeding."""
    n_points = points.shape[0]
    chosen = [int(rng.integers(n_points))]
    for _ in range(1, k):
        nearest = scipy.spatial.distance.cdist(points, points[chosen],
                                               "sqeuclidean").min(axis=1)
        total = nearest.sum()
        if total > 0:
            chosen.append(int(rng.choice(n_points, p=nearest / total)))
        else:
            chosen.append(int(rng.integers(n_points)))
    return points[chosen].copy()


def kmeans(points: np.ndarray, k: int,
           rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Partition points into ``k`` clusters.

    Lloyd iterations from a k-means++ seeding until the assignments are
    stable or :data:`MAX_ITERATIONS` is reached; a cluster left empty is
    reseeded with the farthest point.

    Args:
        points (numpy.ndarray): (n, 2) coordinates.
        k (int): Number of clusters.
        rng (numpy.random.Generator): Random stream.

    Returns:
        tuple: Cluster of each point and the (k, 2) centroids.

    Raises:
        QuorumError: If there are fewer points than clusters.
    """
    points = np.asarray(points, dtype="float64")
    if k < 1:
        raise ValueError("at least one cluster is required")
    if points.shape[0] < k:
        raise QuorumError(
            f"{points.shape[0]} candidates cannot form {k} clusters")
    centroids = _seed(points, k, rng)
    labels = None
    for _ in range(MAX_ITERATIONS):
        distances = scipy.spatial.distance.cdist(points, centroids,
                                                 "sqeuclidean")
        update = _fill_empty(np.argmin(distances, axis=1), distances, k)
        if labels is not None and np.array_equal(update, labels):
            break
        labels = update
        centroids = np.array(
            [points[labels == cluster].mean(axis=0) for cluster in range(k)])
    return labels, centroids


def clustering_cost(points: np.ndarray, labels: np.ndarray,
                    centroids: np.ndarray) -> float:
    """Sum of the squared distances of the points to their centroid."""
    points = np.asarray(points, dtype="float64")
    return float(np.sum((points - centroids[labels])**2))


def elect_senators(coordinates: geometry.CoordinateSet,
                   assignments: np.ndarray, ids: Sequence[int],
                   k: int) -> SenateRoster:
    """Elect, in each cluster, the candidate closest to the centroid.

    Args:
        coordinates (geometry.CoordinateSet): Surviving candidates.
        assignments (numpy.ndarray): Cluster of each survivor.
        ids (list): Identity of each survivor; ties go to the lowest.
        k (int): Number of senators K.

    Returns:
        SenateRoster: The senators, one per cluster, in cluster order.
    """
    assignments = np.asarray(assignments, dtype="int64")
    ids = np.asarray(ids, dtype="int64")
    if coordinates.size < k:
        return SenateRoster((), tuple(assignments.tolist()), False)

    senators = []
    for cluster in range(k):
        members = np.flatnonzero(assignments == cluster)
        if members.size == 0:
            continue
        points = coordinates.points[members]
        centroid = points.mean(axis=0)
        gap = np.sum((points - centroid)**2, axis=1)
        # Gaps equal up to rounding are ties.
        near = np.isclose(gap, gap.min(), rtol=1e-9, atol=0.0)
        senators.append(int(ids[members[near]].min()))
    return SenateRoster(tuple(senators), tuple(assignments.tolist()),
                        len(set(senators)) == k)
