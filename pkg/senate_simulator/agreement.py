# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Byzantine agreement
-------------------

Rotating-leader agreement among the senators over an equivocation-free
broadcast medium, followed by the majority broadcast adopted by the whole
network.

During the setup every senator broadcasts its initial value; the sorted
multiset of the values heard is common to all good senators. Each of the
t + 1 search rounds starts with every senator broadcasting its current
value, the leader of the round then proposes a value and every senator
votes on it. A value backed by k - t accepts becomes the current value of
the good senators.

The median of a multiset is always its lower median, R[ceil(|R| / 2) - 1],
so that the proposal is one of the values heard.

The whole network can also agree without a senate: since every good node
hears the same multiset, deciding its lower median is valid as long as the
faulty nodes are a minority. This one-shot rule is the reference the
senate is compared with.
"""
from typing import Dict, List, Optional, Sequence, Tuple
import collections
import dataclasses
import logging
import math
import numpy as np
from . import adversary
from .exception import (ConfigurationError, ConsensusFailedError,
                        NoGoodValuesError)
from .model import NodeTruth

#: Module logger
LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class AgreementParams:
    """Size of the agreement.

    Args:
        k (int): Number of participants.
        t (int): Number of faults tolerated by design.
        f (int): Actual number of faulty participants; only used to score
            the outcome.

    Raises:
        ConfigurationError: If ``k < 3t + 1``.
    """
    k: int
    t: int
    f: int = 0

    def __post_init__(self):
        if self.t < 0 or self.f < 0:
            raise ConfigurationError("fault counts cannot be negative")
        if self.k < 3 * self.t + 1:
            raise ConfigurationError(
                f"{self.k} participants cannot tolerate {self.t} faults "
                f"(at least {3 * self.t + 1} are required)")
        if self.f > self.k:
            raise ConfigurationError(
                "more faulty participants than participants")


@dataclasses.dataclass(frozen=True)
class AgreementRound:
    """One search round.

    Args:
        round (int): Rank of the round, from 1.
        leader (int): Identity of the leader.
        proposal (float, optional): Value sent by the leader, None if it
            stayed silent.
        votes (tuple): Accept bit of every participant, None for silence.
        accepts (int): Number of accepts.
        current (float): Current value of the good participants after the
            round.
        broadcasts (tuple): Value broadcast by every participant at the
            start of the round, None for silence.
    """
    round: int
    leader: int
    proposal: Optional[float]
    votes: Tuple[Optional[bool], ...]
    accepts: int
    current: float
    broadcasts: Tuple[Optional[float], ...]


@dataclasses.dataclass(frozen=True)
class AgreementTranscript:
    """Everything broadcast during an agreement.

    Args:
        ids (tuple): Identity of every participant, in seat order.
        received (tuple): Sorted values heard during the setup.
        acceptable (tuple, optional): Interval accepted by good
            participants, None when nothing was heard.
        rounds (tuple): The search rounds.
        decisions (dict): Decision of every good participant.
    """
    ids: Tuple[int, ...]
    received: Tuple[float, ...]
    acceptable: Optional[Tuple[float, float]]
    rounds: Tuple[AgreementRound, ...]
    decisions: Dict[int, float]

    @property
    def agreement(self) -> bool:
        """True if every good participant decided the same value."""
        return len(set(self.decisions.values())) <= 1

    @property
    def decision(self) -> Optional[float]:
        """The common decision of the good participants, if any."""
        values = set(self.decisions.values())
        return values.pop() if len(values) == 1 else None

    def trace(self) -> List[Tuple[int, int, Optional[float], int]]:
        """Rows ``(round, leader, proposal, accepts)``."""
        return [(item.round, item.leader, item.proposal, item.accepts)
                for item in self.rounds]


def lower_median(values: Sequence[float]) -> float:
    """Lower median of a non-empty sequence."""
    ordered = sorted(values)
    return ordered[math.ceil(len(ordered) / 2) - 1]


def acceptable_interval(received: Sequence[float],
                        t: int) -> Tuple[float, float]:
    """The t + 1 central order statistics of the sorted values heard.

    When exactly 3t + 1 values are heard, this is [R[t], R[|R| - 1 - t]],
    the interval left after trimming t values at each end. With more values
    (k > 3t + 1) or fewer (silent senators) the two differ: trimming t
    values out of k > 3t + 1 keeps order statistics more than t positions
    away from the median, which a faulty leader could get accepted outside
    the median-valid interval. The central statistics stay within t
    positions of the lower median whatever the size of R.

    Args:
        received (list): Values heard, sorted in ascending order.
        t (int): Fault budget.

    Returns:
        tuple: Bounds of the interval.

    Raises:
        NoGoodValuesError: If nothing was heard.
    """
    if not received:
        raise NoGoodValuesError("no value was heard")
    size = len(received)
    low = min(max(math.ceil((size - t) / 2) - 1, 0), size - 1)
    high = min(low + t, size - 1)
    return (received[low], received[high])


def median_valid_interval(good_sorted: Sequence[float], n: int, f: int,
                          t: int) -> Tuple[float, float]:
    """Values within t sorted positions of the median of the good values.

    Args:
        good_sorted (list): Initial values of the good participants, sorted
            in ascending order.
        n (int): Number of participants.
        f (int): Number of faulty participants.
        t (int): Fault budget.

    Returns:
        tuple: Bounds of the interval; indices falling outside the good
        values are clamped.

    Raises:
        NoGoodValuesError: If there is no good value.
    """
    if len(good_sorted) == 0:
        raise NoGoodValuesError("no good value to validate against")
    last = len(good_sorted) - 1
    center = math.ceil((n - f) / 2) - 1
    low = min(max(center - t, 0), last)
    high = min(max(center + t, 0), last)
    return (float(good_sorted[low]), float(good_sorted[high]))


def _clip(value: float, interval: Tuple[float, float]) -> float:
    return min(max(value, interval[0]), interval[1])


def run_agreement(values: Sequence[float],
                  strategies: Sequence[Optional[adversary.Strategy]],
                  params: AgreementParams,
                  rng: np.random.Generator,
                  ids: Optional[Sequence[int]] = None
                  ) -> AgreementTranscript:
    """Run the agreement.

    Args:
        values (list): Initial value of every participant, in seat order.
        strategies (list): Strategy of every participant, None for a good
            one.
        params (AgreementParams): Size of the agreement.
        rng (numpy.random.Generator): Random stream of the faulty
            participants.
        ids (list, optional): Identity of every participant, defaults to
            the seat.

    Returns:
        AgreementTranscript: What was broadcast and the decisions.
    """
    if len(values) != params.k or len(strategies) != params.k:
        raise ValueError(f"expected {params.k} participants")
    ids = tuple(range(params.k)) if ids is None else tuple(ids)
    good = [seat for seat, item in enumerate(strategies) if item is None]

    def speak(seat: int, context: adversary.RoundContext,
              honest: Optional[float]) -> Optional[float]:
        strategy = strategies[seat]
        if strategy is None:
            return honest
        return adversary.ba_emit(strategy, context, rng)

    received = sorted(value for value in (speak(
        seat, adversary.RoundContext("setup", 0, seat, values[seat]),
        values[seat]) for seat in range(params.k)) if value is not None)
    if not received:
        LOGGER.debug("nothing heard during the setup")
        return AgreementTranscript(ids, (), None, (), {})

    acceptable = acceptable_interval(received, params.t)
    current = lower_median(received)

    rounds = []
    for number in range(1, params.t + 2):
        leader = number - 1
        broadcasts = tuple(
            speak(
                seat,
                adversary.RoundContext("propose",
                                       number,
                                       seat,
                                       values[seat],
                                       acceptable=acceptable,
                                       current=current), current)
            for seat in range(params.k))
        heard = [item for item in broadcasts if item is not None]
        proposal = _clip(lower_median(heard), acceptable)
        proposed = speak(
            leader,
            adversary.RoundContext("lead",
                                   number,
                                   leader,
                                   values[leader],
                                   acceptable=acceptable,
                                   current=current,
                                   proposal=proposal), proposal)

        votes: List[Optional[bool]] = []
        for seat in range(params.k):
            if proposed is None:
                votes.append(None)
                continue
            context = adversary.RoundContext("vote",
                                             number,
                                             seat,
                                             values[seat],
                                             acceptable=acceptable,
                                             current=current,
                                             proposal=proposal,
                                             leader_value=proposed)
            strategy = strategies[seat]
            votes.append(
                acceptable[0] <= proposed <= acceptable[1] if strategy is
                None else adversary.ba_vote(strategy, context, rng))
        accepts = sum(1 for item in votes if item)
        if proposed is not None and accepts >= params.k - params.t:
            current = proposed
        rounds.append(
            AgreementRound(number, ids[leader], proposed, tuple(votes),
                           accepts, current, broadcasts))
        LOGGER.debug("round %d: leader %d proposed %s, %d accepts", number,
                     ids[leader], proposed, accepts)

    return AgreementTranscript(ids, tuple(received), acceptable,
                               tuple(rounds),
                               {ids[seat]: current
                                for seat in good})


def majority_budget(n: int) -> int:
    """Largest minority of ``n`` participants: ceil(n / 2) - 1."""
    return max((n - 1) // 2, 0)


def run_broadcast_agreement(values: Sequence[float],
                            strategies: Sequence[Optional[adversary.Strategy]],
                            rng: np.random.Generator,
                            ids: Optional[Sequence[int]] = None
                            ) -> AgreementTranscript:
    """One-shot agreement of the whole network over the broadcast medium.

    Every participant broadcasts its initial value once; every good
    participant decides the lower median of the common multiset heard. The
    decision lies between two good values whenever fewer than half of the
    participants are faulty.

    Args:
        values (list): Initial value of every participant, in seat order.
        strategies (list): Strategy of every participant, None for a good
            one.
        rng (numpy.random.Generator): Random stream of the faulty
            participants.
        ids (list, optional): Identity of every participant, defaults to
            the seat.

    Returns:
        AgreementTranscript: The values heard and the decisions; there is
        no search round and ``acceptable`` is the interval left after
        trimming :func:`majority_budget` values at each end.
    """
    if len(values) != len(strategies):
        raise ValueError("expected a strategy per participant")
    ids = tuple(range(len(values))) if ids is None else tuple(ids)
    received = []
    for seat, strategy in enumerate(strategies):
        if strategy is None:
            received.append(float(values[seat]))
            continue
        value = adversary.ba_emit(
            strategy, adversary.RoundContext("setup", 0, seat, values[seat]),
            rng)
        if value is not None:
            received.append(value)
    received.sort()
    if not received:
        LOGGER.debug("nothing heard during the broadcast")
        return AgreementTranscript(ids, (), None, (), {})

    trim = majority_budget(len(received))
    decision = lower_median(received)
    return AgreementTranscript(
        ids, tuple(received),
        (received[trim], received[len(received) - 1 - trim]), (),
        {ids[seat]: decision
         for seat, item in enumerate(strategies) if item is None})


def finalize_network(broadcasts: Sequence[Optional[float]],
                     world: Sequence[NodeTruth]) -> Dict[int, float]:
    """Value adopted by every good node from the senators' decisions.

    Args:
        broadcasts (list): Decision broadcast by every senator, None for
            silence.
        world (list): Nodes.

    Returns:
        dict: Adopted value by good node identifier: the most frequent
        decision, ties going to the smallest value.

    Raises:
        ConsensusFailedError: If no senator broadcast anything.
    """
    counter = collections.Counter(item for item in broadcasts
                                  if item is not None)
    if not counter:
        raise ConsensusFailedError("no senator broadcast a decision")
    value = min(counter.items(), key=lambda item: (-item[1], item[0]))[0]
    return {node.id: value for node in world if not node.is_faulty}
