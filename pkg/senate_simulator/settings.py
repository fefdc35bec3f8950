# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Settings handling
-----------------
"""
from typing import Any, Callable, Dict, Iterator, Optional, Tuple
import copy
import logging
import math
from . import AREA_SIDE, FAULTY_VALUES, GOOD_VALUES, MIN_SYMMETRY_TOL
from . import adversary
from .exception import ConfigurationError
from .model import RangingModel

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Prefix of the keys describing the attack profile
ATTACK_PREFIX = "attack."


class Count(int):
    """Handle a non-negative count"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if result < 0:
            raise ValueError(f"{value!r} is not a count")
        return result


class PositiveCount(Count):
    """Handle a count of at least one"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if result < 1:
            raise ValueError(f"{value!r} must be at least 1")
        return result


class Seed(int):
    """Handle a 64-bit seed"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if not 0 <= result < 2**64:
            raise ValueError(f"{value!r} is not a 64-bit seed")
        return result


class Real(float):
    """Handle a finite real number"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if not math.isfinite(result):
            raise ValueError(f"{value!r} is not finite")
        return result


class Positive(Real):
    """Handle a strictly positive number"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if result <= 0:
            raise ValueError(f"{value!r} must be strictly positive")
        return result


class NonNegative(Real):
    """Handle a number greater than or equal to zero"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if result < 0:
            raise ValueError(f"{value!r} must not be negative")
        return result


class Cost(Real):
    """Handle a transmission cost in ]0, 1["""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if not 0 < result < 1:
            raise ValueError(f"{value!r} is not in ]0, 1[")
        return result


class Blend(Real):
    """Handle a blending factor in ]0, 1]"""
    def __new__(cls, value, *args, **kwargs):
        result = super().__new__(cls, value, *args, **kwargs)  # type: ignore
        if not 0 < result <= 1:
            raise ValueError(f"{value!r} is not in ]0, 1]")
        return result


class Boolean:
    """Handle a boolean written as true/false, yes/no, on/off or 1/0."""
    TRUE = ("true", "yes", "on", "1")
    FALSE = ("false", "no", "off", "0")

    def __call__(self, value: Any) -> bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in self.TRUE:
            return True
        if text in self.FALSE:
            return False
        raise ValueError(f"{value!r} is not a boolean")


class Interval:
    """Handle a closed interval written ``low, high``."""
    def __call__(self, value: Any) -> Tuple[float, float]:
        if isinstance(value, str):
            value = value.split(",")
        low, high = (Real(item) for item in value)
        if low > high:
            raise ValueError(f"{value!r} is not an ordered interval")
        return (float(low), float(high))


class Choice:
    """Handle a value taken from a fixed set of names."""
    def __init__(self, *names: str):
        self.names = names

    def __call__(self, value: Any) -> str:
        text = str(value).strip().lower()
        if text not in self.names:
            raise ValueError(
                f"{value!r} is not one of {', '.join(self.names)}")
        return text


def default_symmetry_tol(ranging: RangingModel, area_side: float) -> float:
    """Tolerance of the symmetry verification when none is configured.

    Six standard deviations of the discrepancy between the two squared
    reports of a pair at the diagonal of the deployment area.
    """
    diagonal = math.sqrt(2) * area_side
    if ranging.kind == "toa":
        spread = 2 * math.sqrt(2) * diagonal * ranging.std
    elif ranging.kind == "rss":
        spread = 2 * math.sqrt(2) * diagonal**2 * ranging.std
    else:
        spread = 0.0
    return max(6 * spread, MIN_SYMMETRY_TOL)


def _parse_lines(lines: Iterator[str], origin: str) -> Dict[str, str]:
    result: Dict[str, str] = {}
    for line_number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(
                f"{origin}:{line_number}: expected 'key = value', "
                f"got {line!r}")
        if key in result:
            raise ConfigurationError(
                f"{origin}:{line_number}: duplicate config value {key!r}")
        result[key] = value.strip()
    return result


def load_config_file(filename: str) -> Dict[str, str]:
    """Read a configuration file made of ``key = value`` lines.

    Args:
        filename (str): Path to the file.

    Returns:
        dict: The raw values read, indexed by key.

    Raises:
        ConfigurationError: If a line is malformed or a key is repeated.
    """
    with open(filename, "r", encoding="utf-8") as stream:
        return _parse_lines(iter(stream), filename)


def parse_overrides(items: Iterator[str]) -> Dict[str, str]:
    """Parse ``key=value`` overrides given on the command line."""
    return _parse_lines(iter(items), "--set")


class ScenarioConfig:
    """
    Scenario parameter management.

    The parameters are read from a flat ``key = value`` file, see the
    sample below. Missing keys take their default value; unknown keys are
    rejected.

    .. literalinclude:: ../scenario.cfg

    Args:
        overrides (dict, optional): Values overriding the defaults, either
            raw strings read from a file or Python values.

    Raises:
        ConfigurationError: If a key is unknown, a value invalid or the
            scenario inconsistent.
    """
    #: Known parameters.
    CONFIG_VALUES: Dict[str, Tuple[Any, Callable]] = {
        "n_nodes": (100, PositiveCount),
        "n_faulty": (0, Count),
        "n_candidates": (50, PositiveCount),
        "n_senators": (7, PositiveCount),
        "chorus_slots": (2000, Count),
        "tx_cost": (0.3, Cost),
        "symmetry_tol": (None, Positive),
        "wnc_step": (0.05, Positive),
        "wnc_error_blend": (0.5, Blend),
        "removal_factor": (3.0, Positive),
        "max_wnc_rounds": (200, PositiveCount),
        "wnc_sweeps": (20, PositiveCount),
        "wnc_error_floor": (0.001, NonNegative),
        "wnc_init": ("mds", Choice("mds", "jitter")),
        "area_side": (AREA_SIDE, Positive),
        "ranging": (RangingModel(), RangingModel.parse),
        "agreement_fault_budget": (2, Count),
        "seed": (0, Seed),
        "episodes": (200, PositiveCount),
        "good_values": (GOOD_VALUES, Interval()),
        "faulty_values": (FAULTY_VALUES, Interval()),
        "slot_cap": (None, PositiveCount),
        "attack.chorus_always_transmit": (True, Boolean()),
        "attack.sybil_seats": (1, PositiveCount),
        "attack.shout_offset": (0.0, Real),
        "attack.shout_gain": (0.0, Real),
        "attack.offset_mode": ("independent",
                               Choice(*adversary.OFFSET_MODES)),
        "attack.asymmetric_lie": (False, Boolean()),
        "attack.ba_strategy": ("extreme", Choice(*adversary.BA_STRATEGIES)),
        "attack.vote_range": ((-100.0, 100.0), Interval()),
    }

    def __init__(self, overrides: Optional[Dict[str, Any]] = None):
        self._overrides = dict(overrides or {})
        settings = self._init_user_parameters(self._overrides)

        attack = {}
        for name, value in settings.items():
            if name.startswith(ATTACK_PREFIX):
                attack[name[len(ATTACK_PREFIX):]] = value
            else:
                setattr(self, name, value)
        try:
            self.attack = adversary.AttackProfile(**attack)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

        if self.symmetry_tol is None:
            self.symmetry_tol = default_symmetry_tol(self.ranging,
                                                     self.area_side)
        self._check()

    @classmethod
    def from_file(cls,
                  filename: str,
                  overrides: Optional[Dict[str, Any]] = None
                  ) -> "ScenarioConfig":
        """Load a scenario from a file, then apply ``overrides``."""
        values: Dict[str, Any] = load_config_file(filename)
        values.update(overrides or {})
        return cls(values)

    def _convert_overrides(self, name: str, value: Any) -> Any:
        converter = self.CONFIG_VALUES[name][1]
        if value is None or (isinstance(value, str)
                             and value.strip().lower() == "none"):
            if self.CONFIG_VALUES[name][0] is None:
                return None
            raise ConfigurationError(f"config value {name!r} is required")
        try:
            return converter(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(
                f"invalid value {value!r} for config value {name!r}: "
                f"{exc}") from exc

    def _init_user_parameters(self, overrides: Dict[str, Any]
                              ) -> Dict[str, Any]:
        # To avoid side effects, default values are copied.
        settings = dict((key, copy.copy(value[0]))
                        for key, value in self.CONFIG_VALUES.items())
        for name, value in overrides.items():
            if name not in settings:
                raise ConfigurationError(f"unknown config value {name!r}")
            settings[name] = self._convert_overrides(name, value)
        return settings

    def _check(self) -> None:
        budget = self.agreement_fault_budget
        if self.n_senators < 3 * budget + 1:
            raise ConfigurationError(
                f"n_senators ({self.n_senators}) must be at least "
                f"3 * agreement_fault_budget + 1 ({3 * budget + 1})")
        if self.n_candidates < self.n_senators:
            raise ConfigurationError(
                "n_candidates must be greater than or equal to n_senators")
        if self.n_nodes < self.n_candidates:
            raise ConfigurationError(
                "n_nodes must be greater than or equal to n_candidates")
        if self.n_faulty > self.n_nodes:
            raise ConfigurationError(
                "n_faulty must be less than or equal to n_nodes")
        if self.chorus_slots < 2:
            raise ConfigurationError("chorus_slots must be at least 2")
        if self.removal_factor <= 1:
            raise ConfigurationError("removal_factor must be greater than 1")

    def updated(self,
                overrides: Optional[Dict[str, Any]] = None,
                **kwargs) -> "ScenarioConfig":
        """Returns a copy of this scenario with some values replaced.

        Keys of the attack profile contain a dot and must be passed in
        ``overrides``.
        """
        values = dict(self._overrides)
        values.update(overrides or {})
        values.update(kwargs)
        return type(self)(values)

    def items(self) -> Iterator[Tuple[str, Any]]:
        """Iterate over every setting, attack profile included."""
        for name in self.CONFIG_VALUES:
            if name.startswith(ATTACK_PREFIX):
                yield name, getattr(self.attack, name[len(ATTACK_PREFIX):])
            else:
                yield name, getattr(self, name)

    def __repr__(self) -> str:
        return "\n".join(f"{name} = {value}" for name, value in self.items())
