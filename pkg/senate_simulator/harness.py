# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Episodes and sweeps
-------------------

An episode plays the three phases (sortition, senator selection and
agreement) on a freshly spawned world; a sweep repeats episodes for several
numbers of faulty nodes and reduces them into rows. The baseline skips the
first two phases: every node takes part in the agreement.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple
import dataclasses
import logging
import numpy as np
import dask.distributed
from . import adversary
from . import agreement
from . import dispatch
from . import geometry
from . import logbook
from . import selection
from . import sortition
from .exception import (ConsensusFailedError, NoGoodValuesError,
                        QuorumError, SimulationError)
from .model import NodeTruth, spawn_world
from .settings import ScenarioConfig

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Phases drawing from their own random stream, in spawning order
PHASES = ("world", "chorus", "aloha", "feedback", "wnc", "kmeans",
          "agreement")


@dataclasses.dataclass(frozen=True)
class EpisodeResult:
    """Outcome of an episode.

    Seats and senators are identified by their seat number in the lottery.
    Failures are recorded with the slug of the phase error that interrupted
    the episode; the fields of the phases that did not run keep their
    default value.
    """
    seed: int
    n_faulty: int
    seats_per_owner: Tuple[Tuple[int, int], ...] = ()
    sybil_seats: int = 0
    faulty_seats: int = 0
    removed: Tuple[int, ...] = ()
    removed_faulty: int = 0
    senators: Tuple[int, ...] = ()
    valid_senate: bool = False
    faulty_senators: int = 0
    decision: Optional[float] = None
    failure: Optional[str] = None
    agreement_ok: bool = False
    median_valid: bool = False
    median_valid_actual: bool = False
    slots: int = 0
    wnc_rounds: int = 0
    whisper_evidence: bool = False

    def __post_init__(self):
        if (self.decision is None) == (self.failure is None):
            raise ValueError("an episode either decides or fails")
        if self.median_valid and not self.agreement_ok:
            raise ValueError("a median-valid episode must agree")


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """Episodes of a sweep reduced for one number of faulty nodes."""
    faulty_count: int
    episodes: int
    consensus_rate: float
    valid_rate: float
    mean_sybil_seats: float
    mean_faulty_senators: float
    baseline: bool
    seed: int
    valid_rate_actual: float


@dataclasses.dataclass(frozen=True)
class EpisodeTrace:
    """Traces requested for an episode."""
    wnc: List[Tuple] = dataclasses.field(default_factory=list)
    agreement: List[Tuple] = dataclasses.field(default_factory=list)


def phase_streams(seed: int) -> Dict[str, np.random.Generator]:
    """Independent random streams of the phases of an episode."""
    children = np.random.SeedSequence(seed).spawn(len(PHASES))
    return {
        name: np.random.default_rng(child)
        for name, child in zip(PHASES, children)
    }


def _whisper_evidence(edm: geometry.Edm) -> bool:
    """True if the verified distances between the candidates reporting a
    complete row cannot be embedded in a Euclidean space."""
    index = np.flatnonzero(edm.valid.all(axis=1))
    if index.size < 3:
        return False
    embedding = geometry.classical_mds(
        geometry.gram_from_edm(edm.subset(index)))
    if not embedding.embeddable:
        LOGGER.debug("triangle inequality violated: smallest eigenvalue %g",
                     embedding.eigenvalues[-1])
    return not embedding.embeddable


def _score(decision: float, good_values: Sequence[float], n: int, f: int,
           t: int) -> bool:
    low, high = agreement.median_valid_interval(sorted(good_values), n, f, t)
    return low <= decision <= high


def _strategies(world: Sequence[NodeTruth], owners: Sequence[int],
                profile: adversary.AttackProfile
                ) -> List[Optional[adversary.Strategy]]:
    return [
        adversary.make_strategy(profile, world[owner])
        if world[owner].is_faulty else None for owner in owners
    ]


def _broadcast_decisions(transcript: agreement.AgreementTranscript,
                         strategies: Sequence[Optional[adversary.Strategy]],
                         values: Sequence[float],
                         rng: np.random.Generator) -> List[Optional[float]]:
    """Decision every participant broadcasts to the network."""
    current = transcript.rounds[-1].current if transcript.rounds else None
    result = []
    for seat, strategy in enumerate(strategies):
        if strategy is None:
            result.append(transcript.decisions[transcript.ids[seat]])
            continue
        context = adversary.RoundContext("decide",
                                         len(transcript.rounds) + 1,
                                         seat,
                                         values[seat],
                                         acceptable=transcript.acceptable,
                                         current=current)
        result.append(adversary.ba_emit(strategy, context, rng))
    return result


def run_episode(config: ScenarioConfig,
                seed: int,
                trace: Optional[EpisodeTrace] = None) -> EpisodeResult:
    """Play one episode.

    Args:
        config (settings.ScenarioConfig): Scenario.
        seed (int): Seed of the episode.
        trace (EpisodeTrace, optional): Receives the WNC and agreement
            traces.

    Returns:
        EpisodeResult: The outcome; phase errors are recorded as the
        failure reason.
    """
    streams = phase_streams(seed)
    world = spawn_world(config, streams["world"])
    record: Dict[str, Any] = dict(seed=seed, n_faulty=config.n_faulty)
    try:
        reports = sortition.run_chorus(world, config.chorus_slots,
                                       config.attack, streams["chorus"])
        outcome = sortition.run_aloha(world, reports, config.n_candidates,
                                      config.tx_cost, config.attack,
                                      streams["aloha"], config.slot_cap)
        seats = outcome.seats_per_owner()
        record.update(
            slots=outcome.slots_elapsed,
            seats_per_owner=tuple(seats.items()),
            sybil_seats=sum(1 for item in outcome.candidates
                            if item.pseudonym),
            faulty_seats=sum(count for owner, count in seats.items()
                             if world[owner].is_faulty))

        feedback = selection.collect_feedback(outcome, world, config.ranging,
                                              config.attack,
                                              streams["feedback"])
        edm = selection.symmetry_verify(feedback.edm, config.symmetry_tol)
        record.update(whisper_evidence=_whisper_evidence(edm))

        wnc = selection.robust_wnc(
            edm,
            config.wnc_step,
            config.wnc_error_blend,
            config.removal_factor,
            config.max_wnc_rounds,
            streams["wnc"],
            sweeps=config.wnc_sweeps,
            error_floor=config.wnc_error_floor,
            init=config.wnc_init,
            trace=None if trace is None else trace.wnc)
        removed = [outcome.candidates[ix] for ix in wnc.removed]
        record.update(removed=tuple(item.seat for item in removed),
                      removed_faulty=sum(1 for item in removed
                                         if world[item.owner].is_faulty),
                      wnc_rounds=wnc.rounds)

        survivors = [outcome.candidates[ix] for ix in wnc.coordinates.index]
        labels, _ = selection.kmeans(wnc.coordinates.points,
                                     config.n_senators, streams["kmeans"])
        roster = selection.elect_senators(wnc.coordinates, labels,
                                          [item.seat for item in survivors],
                                          config.n_senators)
        senators = [outcome.candidates[seat - 1] for seat in roster.senators]
        owners = [item.owner for item in senators]
        record.update(senators=roster.senators,
                      valid_senate=roster.valid_senate,
                      faulty_senators=sum(1 for owner in owners
                                          if world[owner].is_faulty))
        if not roster.valid_senate:
            raise QuorumError("the senate could not be elected")

        decision, scores = _agree(config, world, owners, roster.senators,
                                  streams["agreement"], trace)
        record.update(decision=decision, **scores)
    except SimulationError as exc:
        LOGGER.debug("episode %d failed: %s", seed, exc)
        record.update(failure=exc.reason, decision=None)
    return EpisodeResult(**record)


def _agree(config: ScenarioConfig, world: Sequence[NodeTruth],
           owners: Sequence[int], ids: Sequence[int],
           rng: np.random.Generator,
           trace: Optional[EpisodeTrace]) -> Tuple[float, Dict[str, bool]]:
    """Run the agreement among the senators and the final broadcast."""
    values = [world[owner].initial_value for owner in owners]
    strategies = _strategies(world, owners, config.attack)
    good_values = [
        value for value, item in zip(values, strategies) if item is None
    ]
    if not good_values:
        raise NoGoodValuesError("every senator is faulty")
    faulty = len(values) - len(good_values)
    budget = config.agreement_fault_budget
    params = agreement.AgreementParams(len(values), budget, faulty)

    transcript = agreement.run_agreement(values, strategies, params, rng,
                                         ids)
    if trace is not None:
        trace.agreement.extend(transcript.trace())
    adopted = agreement.finalize_network(
        _broadcast_decisions(transcript, strategies, values, rng), world)
    if not adopted:
        raise NoGoodValuesError("no good node to adopt the decision")
    decision = next(iter(adopted.values()))
    agreement_ok = transcript.agreement and len(set(adopted.values())) == 1
    return decision, dict(
        agreement_ok=agreement_ok,
        median_valid=agreement_ok and _score(decision, good_values, len(
            values), faulty, budget),
        median_valid_actual=agreement_ok
        and _score(decision, good_values, len(values), faulty, faulty))


def run_baseline_episode(config: ScenarioConfig,
                         seed: int,
                         sybil: bool = False) -> EpisodeResult:
    """Play an episode where every node takes part in the agreement.

    The nodes run the one-shot broadcast agreement; validity is scored with
    the honest-majority budget ceil(n / 2) - 1.

    Args:
        config (settings.ScenarioConfig): Scenario.
        seed (int): Seed of the episode.
        sybil (bool): Let faulty nodes join with all their pseudonyms.

    Returns:
        EpisodeResult: The outcome, ``faulty_senators`` counting the faulty
        participants.
    """
    streams = phase_streams(seed)
    world = spawn_world(config, streams["world"])
    owners = []
    for node in world:
        copies = node.pseudonym_budget if sybil and node.is_faulty else 1
        owners += [node.id] * copies
    values = [world[owner].initial_value for owner in owners]
    strategies = _strategies(world, owners, config.attack)
    faulty = sum(1 for item in strategies if item is not None)
    record: Dict[str, Any] = dict(seed=seed,
                                  n_faulty=config.n_faulty,
                                  sybil_seats=len(owners) - len(world),
                                  faulty_seats=faulty,
                                  faulty_senators=faulty)
    try:
        good_values = [
            value for value, item in zip(values, strategies) if item is None
        ]
        if not good_values:
            raise NoGoodValuesError("every node is faulty")
        transcript = agreement.run_broadcast_agreement(
            values, strategies, streams["agreement"], owners)
        decision = transcript.decision
        if decision is None:
            raise ConsensusFailedError("the participants disagree")
        agreement_ok = transcript.agreement
        budget = agreement.majority_budget(len(owners))
        record.update(
            decision=decision,
            agreement_ok=agreement_ok,
            median_valid=agreement_ok and _score(decision, good_values, len(
                owners), faulty, budget),
            median_valid_actual=agreement_ok and _score(
                decision, good_values, len(owners), faulty, faulty))
    except SimulationError as exc:
        record.update(failure=exc.reason, decision=None)
    return EpisodeResult(**record)


def _episode_task(task: Tuple[int, int],
                  config: ScenarioConfig,
                  baseline: bool = False,
                  sybil: bool = False,
                  logging_server: Optional[Tuple[str, int, int]] = None
                  ) -> EpisodeResult:
    """Play the episode ``(faulty_count, seed)``."""
    if logging_server is not None:
        logbook.setup_worker_logging(logging_server)
    faulty_count, seed = task
    scenario = config.updated(n_faulty=faulty_count)
    if baseline:
        return run_baseline_episode(scenario, seed, sybil)
    return run_episode(scenario, seed)


def reduce_episodes(faulty_count: int, results: Sequence[EpisodeResult],
                    baseline: bool, seed: int) -> SweepRow:
    """Summarize the episodes played for one number of faulty nodes."""
    if not results:
        raise ValueError("no episode to reduce")

    def mean(name: str) -> float:
        return float(np.mean([float(getattr(item, name))
                              for item in results]))

    return SweepRow(faulty_count=faulty_count,
                    episodes=len(results),
                    consensus_rate=mean("agreement_ok"),
                    valid_rate=mean("median_valid"),
                    mean_sybil_seats=mean("sybil_seats"),
                    mean_faulty_senators=mean("faulty_senators"),
                    baseline=baseline,
                    seed=seed,
                    valid_rate_actual=mean("median_valid_actual"))


def _sweep(config: ScenarioConfig,
           faulty_counts: Sequence[int],
           episodes: Optional[int],
           client: Optional[dask.distributed.Client],
           logging_server: Optional[Tuple[str, int, int]],
           baseline: bool,
           sybil: bool = False) -> List[SweepRow]:
    episodes = episodes or config.episodes
    if episodes < 1:
        raise ValueError("at least one episode is required")
    # Invalid counts are rejected before anything is dispatched.
    for count in faulty_counts:
        config.updated(n_faulty=count)
    tasks = [(count, config.seed + ix) for count in faulty_counts
             for ix in range(episodes)]
    kwargs = dict(config=config,
                  baseline=baseline,
                  sybil=sybil,
                  logging_server=logging_server)
    if client is None:
        results = [_episode_task(item, **kwargs) for item in tasks]
    else:
        results = dispatch.compute(client, _episode_task, iter(tasks),
                                   **kwargs)

    rows = []
    for ix, count in enumerate(faulty_counts):
        row = reduce_episodes(count,
                              results[ix * episodes:(ix + 1) * episodes],
                              baseline, config.seed)
        LOGGER.info(
            "%s F=%d: consensus %.3f, valid %.3f, sybil seats %.2f, "
            "faulty senators %.2f", "baseline" if baseline else "senate",
            count, row.consensus_rate, row.valid_rate, row.mean_sybil_seats,
            row.mean_faulty_senators)
        rows.append(row)
    return rows


def run_sweep(config: ScenarioConfig,
              faulty_counts: Sequence[int],
              episodes: Optional[int] = None,
              client: Optional[dask.distributed.Client] = None,
              logging_server: Optional[Tuple[str, int, int]] = None
              ) -> List[SweepRow]:
    """Play ``episodes`` episodes for every number of faulty nodes.

    Episode ``i`` is seeded with ``config.seed + i`` whatever the number of
    faulty nodes; rows are reduced in the order of ``faulty_counts``, so the
    result does not depend on the cluster used.

    Args:
        config (settings.ScenarioConfig): Scenario.
        faulty_counts (list): Numbers of faulty nodes.
        episodes (int, optional): Episodes per row, defaults to
            ``config.episodes``.
        client (dask.distributed.Client, optional): Client connected to a
            Dask cluster; episodes are played sequentially without one.
        logging_server (tuple, optional): Log server connection settings.

    Returns:
        list: One row per number of faulty nodes.
    """
    return _sweep(config, faulty_counts, episodes, client, logging_server,
                  baseline=False)


def run_baseline(config: ScenarioConfig,
                 faulty_counts: Sequence[int],
                 episodes: Optional[int] = None,
                 client: Optional[dask.distributed.Client] = None,
                 logging_server: Optional[Tuple[str, int, int]] = None,
                 sybil: bool = False) -> List[SweepRow]:
    """Same as :func:`run_sweep` for the baseline agreement among all the
    nodes; with ``sybil``, faulty nodes join with all their pseudonyms."""
    return _sweep(config,
                  faulty_counts,
                  episodes,
                  client,
                  logging_server,
                  baseline=True,
                  sybil=sybil)
