# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Main program
------------

This module defines the entry point of the ``senate_simulator`` command,
playing single episodes, sweeps over the number of faulty nodes, the
baseline agreement and the numerical audits.
"""
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple
import argparse
import logging
import sys
import traceback
import dask.distributed
import numpy as np
from . import exception
from . import geometry
from . import harness
from . import logbook
from . import product
from . import settings
from . import sortition
from . import version

#: Logger of this module
LOGGER = logging.getLogger(__name__)

#: Grid of the equilibrium audit
NASH_COSTS = tuple(round(0.05 * ix, 2) for ix in range(1, 20))
NASH_POPULATIONS = tuple(range(2, 51))

#: Unilateral deviations probed by the equilibrium audit
DEVIATIONS = tuple(np.linspace(0, 1, 21).tolist())


def integer_list(value: str) -> List[int]:
    """The option should define a comma separated list of counts

    Raises:
        argparse.ArgumentTypeError: If an item is not a non-negative
        integer.
    """
    try:
        result = [settings.Count(item) for item in value.split(",") if item]
    except ValueError as error:
        raise argparse.ArgumentTypeError(
            f"invalid list of counts {value!r}: {error!s}")
    if not result:
        raise argparse.ArgumentTypeError("the list is empty")
    return [int(item) for item in result]


def real_list(value: str) -> List[float]:
    """The option should define a comma separated list of numbers"""
    try:
        result = [settings.NonNegative(item) for item in value.split(",")]
    except ValueError as error:
        raise argparse.ArgumentTypeError(
            f"invalid list of numbers {value!r}: {error!s}")
    return [float(item) for item in result]


def positive_int(value: str) -> int:
    """The option should define a count of at least one"""
    try:
        return int(settings.PositiveCount(value))
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))


def _common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("General", "Scenario settings")
    group.add_argument("--config",
                       metavar="PATH",
                       help="Path to the scenario file")
    group.add_argument("--set",
                       metavar="KEY=VALUE",
                       dest="overrides",
                       action="append",
                       default=[],
                       help="Override a value of the scenario; may be "
                       "repeated")
    group.add_argument("--out",
                       metavar="PATH",
                       help="Path to the CSV file to write. Default to the "
                       "standard output",
                       type=argparse.FileType("w"))
    group = parser.add_argument_group("Execution",
                                      "Runtime parameters options")
    group.add_argument("--debug",
                       action="store_true",
                       help="Put the simulator in debug mode")
    group.add_argument("--log",
                       metavar="PATH",
                       help="Path to the logbook to use",
                       type=argparse.FileType("w"))
    return parser


def _sweep_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("Sweep", "Sweep settings")
    group.add_argument("--faulty",
                       metavar="F1,F2,...",
                       help="Numbers of faulty nodes. Default to the "
                       "n_faulty value of the scenario",
                       type=integer_list)
    group.add_argument("--episodes",
                       metavar="N",
                       help="Episodes per number of faulty nodes. Default "
                       "to the episodes value of the scenario",
                       type=positive_int)
    group = parser.add_argument_group("Cluster", "Dask cluster options")
    group.add_argument("--scheduler-file",
                       help="Path to a file with scheduler information to "
                       "play the episodes on a cluster",
                       metavar="PATH",
                       type=argparse.FileType("r"))
    group.add_argument("--n-workers",
                       help="Number of workers of a local cluster. By "
                       "default, episodes are played sequentially",
                       type=positive_int,
                       metavar="N")
    group.add_argument("--processes",
                       help="Whether to use processes (True) or threads "
                       "(False). Defaults to False",
                       action="store_true")
    group.add_argument("--threads-per-worker",
                       help="Number of threads per each worker. "
                       "(Default to 1)",
                       type=positive_int,
                       metavar="N",
                       default=1)
    return parser


def usage(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse the options provided on the command line.

    Args:
        argv (list, optional): Arguments, defaults to ``sys.argv[1:]``.

    Returns:
        argparse.Namespace: The parameters provided on the command line.
    """
    parser = argparse.ArgumentParser(prog="senate_simulator")
    parser.add_argument("--version",
                        action="version",
                        version=f"%(prog)s {version.release()}")
    common = _common_options()
    sweep = _sweep_options()
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    episode = commands.add_parser("episode",
                                  parents=[common],
                                  help="Play one episode")
    group = episode.add_argument_group("Episode", "Episode settings")
    group.add_argument("--seed",
                       type=int,
                       help="Seed of the episode. Default to the seed of "
                       "the scenario")
    group.add_argument("--trace-wnc",
                       metavar="PATH",
                       type=argparse.FileType("w"),
                       help="Write the coordinates of every round")
    group.add_argument("--trace-ba",
                       metavar="PATH",
                       type=argparse.FileType("w"),
                       help="Write the rounds of the agreement")

    commands.add_parser("sweep",
                        parents=[common, sweep],
                        help="Play episodes for several numbers of faulty "
                        "nodes")
    baseline = commands.add_parser("baseline",
                                   parents=[common, sweep],
                                   help="Run the agreement among all the "
                                   "nodes")
    baseline.add_argument("--sybil",
                          action="store_true",
                          help="Faulty nodes take part with all their "
                          "pseudonyms")

    seesaw = commands.add_parser("seesaw-mc",
                                 parents=[common],
                                 help="Estimate the power leaked by a "
                                 "location forger")
    group = seesaw.add_argument_group("Leakage", "Leakage settings")
    group.add_argument("--m-good", type=positive_int, default=20)
    group.add_argument("--sigma2", type=float, default=1.0)
    group.add_argument("--varsigma2",
                       type=real_list,
                       default=[0.25, 0.5, 1.0, 2.0],
                       metavar="V1,V2,...")
    group.add_argument("--dim", type=positive_int, default=2)
    group.add_argument("--trials", type=positive_int, default=10000)
    group.add_argument("--seed", type=int)

    commands.add_parser("nash-check",
                        parents=[common],
                        help="Audit the equilibrium of the lottery")

    args = parser.parse_args(argv)
    if getattr(args, "scheduler_file", None) is not None and (
            args.n_workers is not None or args.processes):
        parser.error("--n-workers and --processes are not allowed with "
                     "--scheduler-file")
    return args


def load_scenario(args: argparse.Namespace) -> settings.ScenarioConfig:
    """Scenario defined by the options."""
    overrides = settings.parse_overrides(iter(args.overrides))
    if args.config is not None:
        return settings.ScenarioConfig.from_file(args.config, overrides)
    return settings.ScenarioConfig(overrides)


def _write(dataset, args: argparse.Namespace,
           columns: Optional[Sequence[str]] = None) -> None:
    stream: TextIO = args.out or sys.stdout
    product.write_csv(dataset, stream, columns)
    stream.flush()


def _episode(args: argparse.Namespace, config: settings.ScenarioConfig,
             client: Optional[dask.distributed.Client],
             logging_server: Optional[Tuple[str, int, int]]) -> None:
    seed = config.seed if args.seed is None else args.seed
    trace = harness.EpisodeTrace()
    result = harness.run_episode(config, seed, trace)
    LOGGER.info("episode %d: decision %s, failure %s, %d faulty senators",
                seed, result.decision, result.failure,
                result.faulty_senators)
    _write(product.episode_dataset([result]), args)
    if args.trace_wnc is not None:
        product.write_csv(
            product.table_dataset(trace.wnc, product.WNC_COLUMNS),
            args.trace_wnc)
    if args.trace_ba is not None:
        product.write_csv(
            product.table_dataset(trace.agreement,
                                  product.AGREEMENT_COLUMNS), args.trace_ba)


def _sweep(args: argparse.Namespace, config: settings.ScenarioConfig,
           client: Optional[dask.distributed.Client],
           logging_server: Optional[Tuple[str, int, int]]) -> None:
    faulty = args.faulty or [config.n_faulty]
    if args.command == "baseline":
        rows = harness.run_baseline(config, faulty, args.episodes, client,
                                    logging_server, args.sybil)
    else:
        rows = harness.run_sweep(config, faulty, args.episodes, client,
                                 logging_server)
    _write(product.sweep_dataset(rows), args, product.SWEEP_COLUMNS)


def _seesaw(args: argparse.Namespace, config: settings.ScenarioConfig,
            client: Optional[dask.distributed.Client],
            logging_server: Optional[Tuple[str, int, int]]) -> None:
    rng = np.random.default_rng(config.seed if args.seed is None else args.
                                seed)
    records = []
    for varsigma2 in args.varsigma2:
        params = geometry.LeakageParams(args.m_good, args.sigma2, varsigma2,
                                        args.dim)
        estimate = geometry.seesaw_leakage_mc(params, args.trials, rng)
        records.append(
            (params.m_good, params.sigma2, params.varsigma2, params.dim,
             args.trials, geometry.seesaw_leakage_theory(params),
             estimate.gram_schmidt, estimate.gram_schmidt_se,
             estimate.eigen, estimate.eigen_se))
    _write(product.table_dataset(records, product.LEAKAGE_COLUMNS), args)


def nash_audit() -> List[Tuple[float, int, float, float, float]]:
    """Rows ``(c, n, p*, payoff at p*, largest payoff of a deviation)``."""
    records = []
    for c in NASH_COSTS:
        for n in NASH_POPULATIONS:
            p = sortition.nash_probability(c, n)
            deviation = max(
                abs(sortition.transmit_payoff(q, p, n, c))
                for q in DEVIATIONS)
            records.append((c, n, p, sortition.transmit_payoff(1.0, p, n, c),
                            deviation))
    return records


def _nash(args: argparse.Namespace, config: settings.ScenarioConfig,
          client: Optional[dask.distributed.Client],
          logging_server: Optional[Tuple[str, int, int]]) -> None:
    _write(product.table_dataset(nash_audit(), product.NASH_COLUMNS), args)


#: Handlers of the subcommands
COMMANDS: Dict[str, Callable] = {
    "episode": _episode,
    "sweep": _sweep,
    "baseline": _sweep,
    "seesaw-mc": _seesaw,
    "nash-check": _nash,
}


def _client(args: argparse.Namespace
            ) -> Optional[dask.distributed.Client]:
    if getattr(args, "scheduler_file", None) is not None:
        return dask.distributed.Client(scheduler_file=args.scheduler_file.name)
    if getattr(args, "n_workers", None) is not None:
        return dask.distributed.Client(
            dask.distributed.LocalCluster(
                protocol="tcp",
                n_workers=args.n_workers,
                processes=args.processes,
                threads_per_worker=args.threads_per_worker))
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    """main function"""
    args = usage(argv)

    # Setup log
    logger = logbook.setup(args.log, args.debug)

    try:
        config = load_scenario(args)
    except exception.ConfigurationError as exc:
        logger.error("invalid scenario: %s", exc)
        return 2

    client = None
    try:
        client = _client(args)
        logging_server = None
        if client is not None:
            client.wait_for_workers(1)
            logging_server = logbook.start_server(args.debug)
            # Displaying Dask client information.
            logger.info(client)
        COMMANDS[args.command](args, config, client, logging_server)
        if client is not None:
            client.close()
        logger.info("End of processing.")
        return 0
    except exception.ConfigurationError as exc:
        if client is not None:
            client.close()
        logger.error("invalid scenario: %s", exc)
        return 2
    #: pylint: disable=broad-except
    # All exceptions are caught in the main function to display it in the log
    # and return the appropriate error code.
    except Exception as exc:
        # Clients are stopped before writing the error message to the log to
        # ensure that the log will end with the exception captured.
        if client is not None:
            client.close()
        logger.error(
            exception.structured_traceback(
                exc, traceback.extract_tb(sys.exc_info()[2])))
        logger.error("End of processing.")
    #: pylint: enable=broad-except
    return 1


if __name__ == '__main__':
    sys.exit(main())
