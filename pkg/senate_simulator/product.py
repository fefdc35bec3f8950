# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Result products
---------------

Tables produced by the simulator are stored as :class:`xarray.Dataset`
along a ``row`` dimension, then written as CSV preceded by the line
``schema=<version>``.
"""
from typing import Any, Dict, Iterable, Optional, Sequence, TextIO
import dataclasses
import numpy as np
import xarray as xr
from . import CSV_SCHEMA
from . import version

#: Columns of a sweep
SWEEP_COLUMNS = ("faulty_count", "episodes", "consensus_rate", "valid_rate",
                 "mean_sybil_seats", "mean_faulty_senators", "baseline",
                 "seed", "valid_rate_actual")

#: Columns of an episode summary
EPISODE_COLUMNS = ("seed", "n_faulty", "sybil_seats", "faulty_seats",
                   "removed", "removed_faulty", "senators", "valid_senate",
                   "faulty_senators", "decision", "failure", "agreement_ok",
                   "median_valid", "median_valid_actual", "slots",
                   "wnc_rounds", "whisper_evidence")

#: Columns of the coordinate generation trace
WNC_COLUMNS = ("round", "candidate", "x", "y", "e")

#: Columns of the agreement trace
AGREEMENT_COLUMNS = ("round", "leader", "proposal", "accepts")

#: Columns of the leakage Monte-Carlo estimates
LEAKAGE_COLUMNS = ("m_good", "sigma2", "varsigma2", "dim", "trials",
                   "theory", "gram_schmidt", "gram_schmidt_se", "eigen",
                   "eigen_se")

#: Columns of the equilibrium audit
NASH_COLUMNS = ("c", "n", "p", "payoff", "max_deviation")


def _column(values: Sequence[Any]) -> np.ndarray:
    if any(isinstance(item, str) for item in values):
        return np.array(["" if item is None else item for item in values],
                        dtype=object)
    if any(item is None for item in values):
        return np.array([np.nan if item is None else item for item in values],
                        dtype="float64")
    return np.array(values)


def table_dataset(records: Iterable[Sequence[Any]],
                  columns: Sequence[str],
                  attrs: Optional[Dict[str, Any]] = None) -> xr.Dataset:
    """Create a dataset from records holding one value per column.

    Args:
        records (iterable): The rows of the table.
        columns (list): Names of the columns.
        attrs (dict, optional): Global attributes.

    Returns:
        xarray.Dataset: One variable per column along ``row``.
    """
    records = [tuple(item) for item in records]
    for item in records:
        if len(item) != len(columns):
            raise ValueError(f"expected {len(columns)} values, got {item!r}")
    data_vars = {}
    for ix, name in enumerate(columns):
        values = [item[ix] for item in records]
        data_vars[name] = xr.DataArray(
            _column(values) if values else np.array([], dtype="float64"),
            dims=("row", ))
    result = xr.Dataset(data_vars)
    result.attrs.update(attrs or {})
    result.attrs["schema"] = CSV_SCHEMA
    result.attrs["software"] = f"senate_simulator {version.release()}"
    return result


def sweep_dataset(rows: Sequence[Any]) -> xr.Dataset:
    """Dataset of the rows of a sweep."""
    return table_dataset(
        ([getattr(item, name) for name in SWEEP_COLUMNS] for item in rows),
        SWEEP_COLUMNS)


def _join(values: Sequence[int]) -> str:
    return ";".join(str(item) for item in values)


def episode_dataset(results: Sequence[Any]) -> xr.Dataset:
    """Dataset summarizing episodes; seat lists are joined with ``;``."""
    records = []
    for item in results:
        values = dataclasses.asdict(item)
        values["removed"] = _join(item.removed)
        values["senators"] = _join(item.senators)
        records.append([values[name] for name in EPISODE_COLUMNS])
    return table_dataset(records, EPISODE_COLUMNS)


def write_csv(dataset: xr.Dataset,
              stream: TextIO,
              columns: Optional[Sequence[str]] = None) -> None:
    """Write a table as CSV.

    Args:
        dataset (xarray.Dataset): Table created by :func:`table_dataset`.
        stream (io): Output stream.
        columns (list, optional): Columns written, in order. Defaults to
            every variable of the dataset.
    """
    columns = list(columns or dataset.data_vars)
    frame = dataset[columns].to_dataframe()
    for name in columns:
        if frame[name].dtype == bool:
            frame[name] = frame[name].astype("int64")
    stream.write(f"schema={dataset.attrs.get('schema', CSV_SCHEMA)}\n")
    frame.to_csv(stream, index=False)
