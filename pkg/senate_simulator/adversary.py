# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Faulty node behavior
--------------------

A faulty node obeys the medium (it transmits only in its own slots and
never blocks anybody) but is free on content: it may keep playing the
lottery to win several seats, forge its apparent location by shouting or
whispering, lie in its distance reports and send any value during the
agreement.
"""
from typing import List, Optional, Tuple
import dataclasses
import logging
import math
import numpy as np
from .model import NodeTruth

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Names of the agreement strategies
BA_STRATEGIES = ("extreme", "silent", "random", "honest")

#: Coordination modes of the shout offsets
OFFSET_MODES = ("independent", "shared")


@dataclasses.dataclass(frozen=True)
class AttackProfile:
    """Behavior shared by every faulty node of a scenario.

    Args:
        chorus_always_transmit (bool): Faulty nodes transmit in every chorus
            slot instead of listening in one of them.
        sybil_seats (int): Number of seats a faulty node competes for.
        shout_offset (float): Meters added to every distance of a forged
            identity, negative for a whisper. In ``independent`` mode each
            pseudonym draws its own offset in ``(0, shout_offset]``.
        shout_gain (float): Multiplicative forgery, every distance is scaled
            by ``1 + shout_gain``.
        offset_mode (str): ``independent`` or ``shared``.
        asymmetric_lie (bool): The forgery is applied to the reports only,
            pilots stay honest.
        ba_strategy (str): One of :data:`BA_STRATEGIES`.
        vote_range (tuple): Interval of the values sent by ``random``.
    """
    chorus_always_transmit: bool = True
    sybil_seats: int = 1
    shout_offset: float = 0.0
    shout_gain: float = 0.0
    offset_mode: str = "independent"
    asymmetric_lie: bool = False
    ba_strategy: str = "extreme"
    vote_range: Tuple[float, float] = (-100.0, 100.0)

    def __post_init__(self):
        if self.sybil_seats < 1:
            raise ValueError("a faulty node holds at least one seat")
        if not (math.isfinite(self.shout_offset)
                and math.isfinite(self.shout_gain)):
            raise ValueError("shout offsets must be finite")
        if self.shout_gain <= -1:
            raise ValueError("shout_gain must be greater than -1")
        if self.offset_mode not in OFFSET_MODES:
            raise ValueError(f"unknown offset mode {self.offset_mode!r}")
        if self.ba_strategy not in BA_STRATEGIES:
            raise ValueError(f"unknown strategy {self.ba_strategy!r}")
        if self.vote_range[0] > self.vote_range[1]:
            raise ValueError("vote_range must be ordered")

    @classmethod
    def disabled(cls) -> "AttackProfile":
        """Profile of faulty nodes behaving exactly like good ones."""
        return cls(chorus_always_transmit=False, ba_strategy="honest")

    @property
    def forges_location(self) -> bool:
        return self.shout_offset != 0 or self.shout_gain != 0


@dataclasses.dataclass(frozen=True)
class Pseudonym:
    """Identity under which a node takes a seat.

    Args:
        owner (int): Physical node.
        index (int): Rank of the identity among those of its owner.
        position (tuple): Physical position of the owner.
        offset (float): Additive forgery in meters.
        gain (float): Multiplicative forgery.
        forges_pilot (bool): True if the pilots carry the forgery too.
    """
    owner: int
    index: int
    position: Tuple[float, float]
    offset: float = 0.0
    gain: float = 0.0
    forges_pilot: bool = True

    def distort(self, distance: float) -> float:
        """Apply the forgery to a distance; whispers stop at zero."""
        return max(distance * (1.0 + self.gain) + self.offset, 0.0)

    def pilot(self, distance: float) -> float:
        """Path length others measure from a pilot of this identity."""
        return self.distort(distance) if self.forges_pilot else distance

    @property
    def is_sybil(self) -> bool:
        return self.index > 0


def honest_identity(node: NodeTruth) -> Pseudonym:
    """The single identity of a node that does not forge anything."""
    return Pseudonym(node.id, 0, node.position, forges_pilot=False)


def pseudonym_positions(node: NodeTruth, profile: AttackProfile,
                        rng: np.random.Generator) -> List[Pseudonym]:
    """Identities under which a faulty node competes, in seating order.

    Every identity sits at the physical position of its owner; the forgery
    is applied uniformly to all its pairwise distances. The stream is only
    consumed when independent offsets are drawn.

    Args:
        node (NodeTruth): Faulty node.
        profile (AttackProfile): Attack profile.
        rng (numpy.random.Generator): Random stream.

    Returns:
        list: One identity per seat of the budget.
    """
    if not node.is_faulty:
        raise ValueError(f"node {node.id} is not faulty")
    seats = node.pseudonym_budget or profile.sybil_seats
    draw = profile.forges_location and profile.offset_mode == "independent"
    result = []
    for index in range(seats):
        scale = 1.0 - rng.random() if draw else 1.0
        result.append(
            Pseudonym(owner=node.id,
                      index=index,
                      position=node.position,
                      offset=profile.shout_offset * scale,
                      gain=profile.shout_gain * scale,
                      forges_pilot=not profile.asymmetric_lie))
    return result


@dataclasses.dataclass(frozen=True)
class RoundContext:
    """What a senator knows when it has to speak.

    Args:
        stage (str): ``setup``, ``propose``, ``lead``, ``vote`` or
            ``decide`` (final broadcast to the network).
        round (int): Search round, 0 during the setup.
        seat (int): Seat of the senator.
        initial_value (float): Value of the senator's owner.
        acceptable (tuple, optional): Interval accepted by good senators.
        current (float, optional): Current value of good senators.
        proposal (float, optional): Value an honest leader would send.
        leader_value (float, optional): Value sent by the leader.
    """
    stage: str
    round: int
    seat: int
    initial_value: float
    acceptable: Optional[Tuple[float, float]] = None
    current: Optional[float] = None
    proposal: Optional[float] = None
    leader_value: Optional[float] = None


class Strategy:
    """Interface of the behaviors of a faulty senator."""
    def emit(self, context: RoundContext,
             rng: np.random.Generator) -> Optional[float]:
        """Value broadcast, None to stay silent."""
        raise NotImplementedError

    def vote(self, context: RoundContext,
             rng: np.random.Generator) -> Optional[bool]:
        """Accept bit broadcast, None to stay silent."""
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class ExtremeValue(Strategy):
    """Send the same value at every stage and back any leader."""
    value: float

    def emit(self, context, rng):
        return self.value

    def vote(self, context, rng):
        return True


@dataclasses.dataclass(frozen=True)
class Silent(Strategy):
    """Never send anything."""
    def emit(self, context, rng):
        return None

    def vote(self, context, rng):
        return None


@dataclasses.dataclass(frozen=True)
class RandomVote(Strategy):
    """Send uniform values in ``[low, high]`` and random accept bits."""
    low: float = -100.0
    high: float = 100.0

    def emit(self, context, rng):
        return float(rng.uniform(self.low, self.high))

    def vote(self, context, rng):
        return bool(rng.random() < 0.5)


@dataclasses.dataclass(frozen=True)
class Honest(Strategy):
    """Follow the protocol like a good senator."""
    def emit(self, context, rng):
        if context.stage == "setup":
            return context.initial_value
        if context.stage == "lead":
            return context.proposal
        return context.current

    def vote(self, context, rng):
        if context.leader_value is None or context.acceptable is None:
            return False
        low, high = context.acceptable
        return low <= context.leader_value <= high


def make_strategy(profile: AttackProfile, node: NodeTruth) -> Strategy:
    """Agreement strategy of a faulty node under ``profile``."""
    if profile.ba_strategy == "extreme":
        return ExtremeValue(node.initial_value)
    if profile.ba_strategy == "silent":
        return Silent()
    if profile.ba_strategy == "random":
        return RandomVote(*profile.vote_range)
    return Honest()


def ba_emit(strategy: Strategy, context: RoundContext,
            rng: np.random.Generator) -> Optional[float]:
    """Value broadcast by a faulty senator, None for silence."""
    value = strategy.emit(context, rng)
    return None if value is None else float(value)


def ba_vote(strategy: Strategy, context: RoundContext,
            rng: np.random.Generator) -> Optional[bool]:
    """Accept bit broadcast by a faulty senator, None for silence."""
    return strategy.vote(context, rng)
