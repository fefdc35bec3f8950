# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Ground truth of the simulated world
-----------------------------------

Nodes, their positions and initial values, and the ranging error models
turning a geographic distance into the estimate a receiver derives from a
pilot symbol.
"""
from typing import List, Sequence, Tuple, TYPE_CHECKING
import dataclasses
import logging
import math
import numpy as np

if TYPE_CHECKING:
    from .settings import ScenarioConfig

#: Module logger
LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class RangingModel:
    """Net effect of the ranging estimation on a distance.

    Args:
        kind (str): ``perfect``, ``toa`` (additive Gaussian error, ``std`` in
            meters) or ``rss`` (log-normal shadowing, ``std`` is the standard
            deviation of the log-distance error).
        std (float): Standard deviation of the error.
    """
    kind: str = "perfect"
    std: float = 0.0

    KINDS = ("perfect", "toa", "rss")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown ranging model {self.kind!r}")
        if not math.isfinite(self.std) or self.std < 0:
            raise ValueError(
                f"the ranging standard deviation must be a non-negative "
                f"number, not {self.std!r}")
        if self.kind == "perfect" and self.std != 0:
            raise ValueError("a perfect ranging model has no error")

    @classmethod
    def perfect(cls) -> "RangingModel":
        """Ranging without any error."""
        return cls()

    @classmethod
    def toa(cls, std: float) -> "RangingModel":
        """Time of arrival ranging; ``toa(0)`` is the perfect model."""
        return cls() if std == 0 else cls("toa", float(std))

    @classmethod
    def rss(cls, std: float) -> "RangingModel":
        """Received signal strength ranging."""
        return cls() if std == 0 else cls("rss", float(std))

    @classmethod
    def parse(cls, text: str) -> "RangingModel":
        """Parse the ``perfect``, ``toa:<std>`` or ``rss:<std>`` notation
        used in configuration files."""
        if isinstance(text, RangingModel):
            return text
        kind, _, std = str(text).strip().lower().partition(":")
        if kind == "perfect" and not std:
            return cls.perfect()
        if kind in ("toa", "rss") and std:
            return getattr(cls, kind)(float(std))
        raise ValueError(f"invalid ranging model {text!r}")

    @property
    def is_perfect(self) -> bool:
        return self.kind == "perfect"

    def variance(self) -> float:
        return self.std**2

    def __str__(self) -> str:
        return "perfect" if self.is_perfect else f"{self.kind}:{self.std:g}"


@dataclasses.dataclass(frozen=True)
class NodeTruth:
    """Ground-truth state of a node.

    Args:
        id (int): Ordinal of the node.
        position (tuple): Position (x, y) in meters.
        is_faulty (bool): True if the node is byzantine.
        initial_value (float): Value the consensus is about.
        pseudonym_budget (int): Number of seats the node may try to take.
    """
    id: int
    position: Tuple[float, float]
    is_faulty: bool
    initial_value: float
    pseudonym_budget: int = 0

    def __post_init__(self):
        if not self.is_faulty and self.pseudonym_budget != 0:
            raise ValueError(f"good node {self.id} cannot hold pseudonyms")


def true_distance(a: NodeTruth, b: NodeTruth) -> float:
    """Euclidean distance between two nodes in meters."""
    return math.hypot(a.position[0] - b.position[0],
                      a.position[1] - b.position[1])


def estimate_distance(d: float, model: RangingModel,
                      rng: np.random.Generator) -> float:
    """Distance estimated by a receiver.

    Args:
        d (float): Geographic (or forged) distance in meters.
        model (RangingModel): Ranging error model.
        rng (numpy.random.Generator): Random stream of the episode.

    Returns:
        float: The estimate, never negative.
    """
    if d < 0:
        raise ValueError(f"a distance cannot be negative: {d!r}")
    if model.is_perfect:
        return float(d)
    if model.kind == "toa":
        return max(float(d) + rng.normal(0.0, model.std), 0.0)
    return float(d) * math.exp(rng.normal(0.0, model.std))


def positions(world: Sequence[NodeTruth]) -> np.ndarray:
    """Positions of the nodes as a (N, 2) array."""
    return np.array([item.position for item in world],
                    dtype="float64").reshape(-1, 2)


def spawn_world(config: "ScenarioConfig",
                rng: np.random.Generator) -> List[NodeTruth]:
    """Create the nodes of an episode.

    Positions are uniform in the deployment square, faulty nodes are chosen
    uniformly. The stream is consumed identically whatever the number of
    faulty nodes, so two scenarios differing only by ``n_faulty`` share
    their geography.

    Args:
        config (settings.ScenarioConfig): Scenario.
        rng (numpy.random.Generator): Random stream of the world.

    Returns:
        list: The nodes sorted by identifier.
    """
    n_nodes = config.n_nodes
    xy = rng.uniform(0.0, config.area_side, size=(n_nodes, 2))
    draws = rng.random(n_nodes)
    faulty = set(rng.permutation(n_nodes)[:config.n_faulty].tolist())

    world = []
    for ix in range(n_nodes):
        is_faulty = ix in faulty
        low, high = config.faulty_values if is_faulty else config.good_values
        world.append(
            NodeTruth(id=ix,
                      position=(float(xy[ix, 0]), float(xy[ix, 1])),
                      is_faulty=is_faulty,
                      initial_value=float(low + (high - low) * draws[ix]),
                      pseudonym_budget=config.attack.sybil_seats
                      if is_faulty else 0))
    LOGGER.debug("world of %d nodes, %d faulty", n_nodes, len(faulty))
    return world
