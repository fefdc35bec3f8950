# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Sortition
---------

Population estimation by chorus followed by the selfish slotted-ALOHA
lottery electing the candidates.
"""
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import collections
import dataclasses
import logging
import math
import numpy as np
from . import adversary
from .exception import DomainError, SortitionTimeout
from .model import NodeTruth

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Expected number of successes, per seat, the slot cap allows for
SLOT_CAP_FACTOR = 50


@dataclasses.dataclass(frozen=True)
class ChorusReport:
    """What a node learned while listening during the chorus.

    Args:
        node_id (int): Listening node.
        receive_slot (int): Slot, in 1..T, the node listened in.
        observed_transmitters (int): Physical transmitters counted.
        population_estimate (float): Unbiased population estimate.
    """
    node_id: int
    receive_slot: int
    observed_transmitters: int
    population_estimate: float


@dataclasses.dataclass(frozen=True)
class Seat:
    """A seat won during the lottery.

    Args:
        seat (int): Rank of the collision-free success, from 1.
        owner (int): Physical node holding the seat.
        pseudonym (bool): True if the seat is an additional identity of its
            owner.
        identity (adversary.Pseudonym): Identity under which the seat was
            taken; its pilot is heard by every node.
        slot (int): Slot of the success.
    """
    seat: int
    owner: int
    pseudonym: bool
    identity: adversary.Pseudonym
    slot: int


@dataclasses.dataclass(frozen=True)
class SortitionOutcome:
    """Result of the lottery.

    Args:
        candidates (tuple): Seats in order of success.
        slots_elapsed (int): Slots played.
        reports (tuple): Chorus reports the lottery was played with.
    """
    candidates: Tuple[Seat, ...]
    slots_elapsed: int
    reports: Tuple[ChorusReport, ...] = ()

    @property
    def size(self) -> int:
        return len(self.candidates)

    def seats_per_owner(self) -> Dict[int, int]:
        """Number of seats held by each physical owner."""
        return dict(
            sorted(
                collections.Counter(item.owner
                                    for item in self.candidates).items()))

    def pilot_distances(self) -> np.ndarray:
        """Path lengths measured between candidates: entry (i, j) is what
        candidate i hears from the pilot of candidate j before ranging
        errors."""
        size = self.size
        result = np.zeros((size, size))
        for i, receiver in enumerate(self.candidates):
            for j, sender in enumerate(self.candidates):
                if i == j:
                    continue
                distance = math.hypot(
                    receiver.identity.position[0] -
                    sender.identity.position[0],
                    receiver.identity.position[1] -
                    sender.identity.position[1])
                result[i, j] = sender.identity.pilot(distance)
        return result


def nash_probability(c: float, n: float) -> float:
    """Symmetric equilibrium transmission probability 1 - c^(1/(n-1)).

    Args:
        c (float): Cost of one transmission, in ]0, 1].
        n (float): Population, possibly fractional.

    Returns:
        float: The probability, in [0, 1[.

    Raises:
        DomainError: If ``c`` is not in ]0, 1] or ``n`` is less than 2.
    """
    if not 0 < c <= 1:
        raise DomainError(f"the cost must be in ]0, 1], not {c!r}")
    if n < 2:
        raise DomainError(f"the population must be at least 2, not {n!r}")
    return 1.0 - c**(1.0 / (n - 1.0))


def transmit_payoff(p_self: float, p_other: float, n: float,
                    c: float) -> float:
    """Expected payoff, per slot, of a node transmitting with probability
    ``p_self`` while the ``n - 1`` others transmit with ``p_other``."""
    alone = (1.0 - p_other)**(n - 1.0)
    return p_self * ((1.0 - c) * alone - c * (1.0 - alone))


def run_chorus(world: Sequence[NodeTruth], slots: int,
               attack: adversary.AttackProfile,
               rng: np.random.Generator) -> List[ChorusReport]:
    """Play the chorus: every node listens in one slot drawn uniformly and
    transmits a pilot in the others.

    Physical transmitters are counted, so pseudonyms never inflate the
    estimate. Faulty nodes transmitting in every slot never listen and
    receive no report. A slot is drawn for every node whatever its role.

    Args:
        world (list): Nodes.
        slots (int): Number of slots T.
        attack (adversary.AttackProfile): Attack profile.
        rng (numpy.random.Generator): Random stream.

    Returns:
        list: The reports of the listening nodes.
    """
    if slots < 2:
        raise ValueError("the chorus needs at least two slots")
    n_nodes = len(world)
    receive = rng.integers(1, slots + 1, size=n_nodes)
    listening = np.array([
        not (item.is_faulty and attack.chorus_always_transmit)
        for item in world
    ], dtype=bool)
    receivers = np.bincount(receive[listening], minlength=slots + 1)

    reports = []
    for ix, node in enumerate(world):
        if not listening[ix]:
            continue
        observed = n_nodes - int(receivers[receive[ix]])
        reports.append(
            ChorusReport(node_id=node.id,
                         receive_slot=int(receive[ix]),
                         observed_transmitters=observed,
                         population_estimate=1.0 + slots /
                         (slots - 1.0) * observed))
    LOGGER.debug("chorus: %d listeners over %d slots", len(reports), slots)
    return reports


def _transmit_probability(estimate: float, c: float) -> float:
    # A node believing it is alone cannot collide.
    return 1.0 if estimate < 2 else nash_probability(c, estimate)


def run_aloha(world: Sequence[NodeTruth],
              estimates: Union[Sequence[ChorusReport], Mapping[int, float]],
              seats: int,
              c: float,
              attack: adversary.AttackProfile,
              rng: np.random.Generator,
              slot_cap: Optional[int] = None) -> SortitionOutcome:
    """Play the selfish slotted-ALOHA lottery until ``seats`` seats are
    taken.

    In each slot, every node still competing draws one uniform number, in
    increasing node order, and transmits if it falls under its equilibrium
    probability computed from its own population estimate (faulty nodes
    that did not listen use the true population). A slot with a single
    transmitter seats it; good nodes then leave the game while faulty nodes
    keep playing under their next identity until their budget is spent.

    Args:
        world (list): Nodes.
        estimates (list or dict): Chorus reports or estimates by node id.
        seats (int): Number of seats S.
        c (float): Cost of one transmission.
        attack (adversary.AttackProfile): Attack profile.
        rng (numpy.random.Generator): Random stream.
        slot_cap (int, optional): Maximum number of slots. Defaults to
            ``50·S/p̄``, p̄ being the mean transmission probability.

    Returns:
        SortitionOutcome: The seats won.

    Raises:
        SortitionTimeout: If the slot cap is reached, or nobody is left to
            compete, before every seat is taken.
    """
    if seats < 1:
        raise ValueError("at least one seat is required")
    if not isinstance(estimates, Mapping):
        reports = tuple(estimates)
        estimates = {item.node_id: item.population_estimate for item in reports}
    else:
        reports = ()

    population = float(len(world))
    probability = {}
    identities: Dict[int, List[adversary.Pseudonym]] = {}
    for node in world:
        probability[node.id] = _transmit_probability(
            estimates.get(node.id, population), c)
        identities[node.id] = adversary.pseudonym_positions(
            node, attack, rng) if node.is_faulty else [
                adversary.honest_identity(node)
            ]

    if slot_cap is None:
        mean = float(np.mean(list(probability.values()))) if probability \
            else 0.0
        slot_cap = int(math.ceil(SLOT_CAP_FACTOR * seats /
                                 mean)) if mean > 0 else 0

    candidates: List[Seat] = []
    slot = 0
    while len(candidates) < seats:
        competing = sorted(key for key, value in identities.items() if value)
        if not competing or slot >= slot_cap:
            raise SortitionTimeout(
                f"{len(candidates)} of {seats} seats taken after {slot} "
                "slots")
        slot += 1
        draws = rng.random(len(competing))
        transmitters = [
            node_id for node_id, draw in zip(competing, draws)
            if draw < probability[node_id]
        ]
        # One radio per physical node: nobody transmits twice in a slot.
        assert len(set(transmitters)) == len(transmitters)
        if len(transmitters) != 1:
            continue
        winner = transmitters[0]
        identity = identities[winner].pop(0)
        candidates.append(
            Seat(seat=len(candidates) + 1,
                 owner=winner,
                 pseudonym=identity.is_sybil,
                 identity=identity,
                 slot=slot))

    LOGGER.debug("lottery: %d seats in %d slots", seats, slot)
    return SortitionOutcome(tuple(candidates), slot, reports)
