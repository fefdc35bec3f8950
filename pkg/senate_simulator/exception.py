# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Exception handlers
------------------
"""
from typing import List
import linecache
import os
import traceback


class ConfigurationError(ValueError):
    """Raised when a scenario or a command line option is invalid."""


class DomainError(ValueError):
    """Raised when a closed form is evaluated outside its domain."""


class SimulationError(RuntimeError):
    """Base class of the errors interrupting a phase of an episode.

    The ``reason`` slug is what an episode records as its failure reason.
    """
    reason = "error"


class SortitionTimeout(SimulationError):
    """The ALOHA lottery did not fill every seat before the slot cap."""
    reason = "sortition-timeout"


class IncompleteMatrixError(SimulationError):
    """A computation needs a distance matrix without invalid entries."""
    reason = "incomplete-matrix"


class NoDataError(SimulationError):
    """Every distance feedback was discarded."""
    reason = "no-data"


class DegenerateGeometryError(SimulationError):
    """Fewer than three candidates are left to embed."""
    reason = "geometry"


class QuorumError(SimulationError):
    """Not enough surviving candidates to elect the senate."""
    reason = "quorum"


class NoGoodValuesError(SimulationError):
    """No good value is available to judge or adopt a decision."""
    reason = "no-good-values"


class ConsensusFailedError(SimulationError):
    """No senator broadcast a decision."""
    reason = "consensus-failed"


def _source_excerpt(source: str, line_number: int,
                    context: int) -> List[str]:
    """Returns the numbered source lines around ``line_number``."""
    lines = linecache.getlines(source)
    start = max(line_number - context - 1, 0)
    result = []
    for idx, item in enumerate(lines[start:line_number + context]):
        where = start + idx + 1
        marker = "----> " if where == line_number else "      "
        result.append(f"{marker}{where} {item.rstrip()}")
    return result


def structured_traceback(exc: Exception,
                         call_stack: traceback.StackSummary,
                         context: int = 2) -> str:
    """Return a nice text describing the call stack which threw an
    exception.

    Args:
        exc (Exception): Exception raised.
        call_stack (traceback.StackSummary): Exception call stack thrown out.
        context (int, optional): Number of source lines displayed on each
            side of the incriminated line.

    Returns:
        str: The text representing the call stack of the thrown exception.
    """
    module = getattr(exc, "__module__", None)
    exc_name = f"{module}.{type(exc).__name__}" if module else type(
        exc).__name__
    message = [f"{exc_name} - Traceback (most recent call last):"]

    for frame in call_stack:
        message.append(f"{os.path.abspath(frame.filename)} in {frame.name}")
        message += _source_excerpt(frame.filename, frame.lineno, context)
        message.append("")

    message.append(f"{exc_name}: {exc}")
    return "\n".join(message)
