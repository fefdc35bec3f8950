# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Dispatch tasks on the workers
=============================
"""
from typing import Any, Callable, Dict, Iterator, List
import dask.distributed

#: Tasks kept in flight per worker
TASKS_PER_WORKER = 2


def compute(client: dask.distributed.Client, func: Callable, seq: Iterator,
            *args, **kwargs) -> List[Any]:
    """Distribute the execution of functions to the workers, keeping a
    bounded number of tasks in flight.

    Args:
        client (dask.distributed.Client): Client connected to the Dask
            cluster.
        func (callable): Function to execute
        seq (iterable): The sequence of arguments handled by ``func``.
        *args, **kwargs : any
            Extra arguments and keyword arguments to pass to ``func``.

    Returns:
        list: The results, in the order of ``seq`` whatever the order of
        completion.
    """
    limit = TASKS_PER_WORKER * max(len(client.scheduler_info()["workers"]),
                                   1)
    completed = dask.distributed.as_completed()
    position: Dict[str, int] = {}
    result: Dict[int, Any] = {}

    for ix, item in enumerate(seq):
        future = client.submit(func, item, *args, pure=False, **kwargs)
        position[future.key] = ix
        completed.add(future)
        # The computation queue is full, we consume a finished job to be
        # able to continue.
        if completed.count() >= limit:
            done = next(completed)
            result[position.pop(done.key)] = done.result()

    for done in completed:
        result[position.pop(done.key)] = done.result()
    return [result[ix] for ix in range(len(result))]
