""" Command-line entry point: eval, sweep, solve-xi, simulate, validate """
import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from d2dcell.config import RunConfig, load_run_config
from d2dcell.constants.misc import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    MONTE_CARLO_ONLY,
    Quantity,
)
from d2dcell.constants.presets import PRESETS
from d2dcell.errors import ConfigError, NumericalError
from d2dcell.metrics import solve_xi_for_qos
from d2dcell.simulations import MonteCarloPlayground, dump_realizations
from d2dcell.sweeps import (
    MetricRecord,
    emit,
    evaluate_point,
    run_sweep,
    validate_records,
)

logger = logging.getLogger(__name__)

DEFAULT_QOS_TARGET = 1e-2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2dcell",
        description="Outage, successful D2D transmissions and spectrum "
        "reuse of underlay D2D in a disk cell, analytic and Monte Carlo",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="packaged configuration, overridden by --config",
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one dotted key, repeatable",
    )
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file, stdout when omitted")
    common.add_argument("--seed", type=int, help="Monte Carlo master seed")
    common.add_argument(
        "--mc-runs", type=int, help="Monte Carlo realizations, 0 disables"
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging"
    )
    common.add_argument(
        "--quiet", action="store_true", help="errors only, no progress bars"
    )

    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser(
        "eval", parents=[common], help="quantities at the configured point"
    )
    verbs.add_parser("sweep", parents=[common], help="run the configured sweep")
    solve = verbs.add_parser(
        "solve-xi", parents=[common], help="threshold meeting a BS outage"
    )
    solve.add_argument(
        "--target",
        type=float,
        help=f"BS outage target, default sweep.qos_target or "
        f"{DEFAULT_QOS_TARGET}",
    )
    simulate = verbs.add_parser(
        "simulate", parents=[common], help="Monte Carlo only"
    )
    simulate.add_argument(
        "--dump", help="write the realizations as JSON lines to this file"
    )
    verbs.add_parser(
        "validate",
        parents=[common],
        help="analytic against Monte Carlo with pass/fail",
    )
    return parser


def _configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )


def _point_spec(config: RunConfig):
    """ Sweep spec reduced to the configured value of its parameter """
    spec = config.to_sweep_spec()
    return replace(spec, grid=(config.value_of(spec.parameter),), workers=1)


def _require_monte_carlo(config: RunConfig, verb: str) -> None:
    if config.monte_carlo.n_realizations <= 0:
        raise ConfigError(
            f"{verb} needs monte_carlo.n_realizations > 0 (or --mc-runs)"
        )


def run_eval(config: RunConfig) -> List[MetricRecord]:
    spec = _point_spec(config)
    return evaluate_point(config, spec, spec.grid[0])


def run_sweep_verb(config: RunConfig, quiet: bool) -> List[MetricRecord]:
    return run_sweep(config.to_sweep_spec(), config, show_progress=not quiet)


def run_solve_xi(
    config: RunConfig, target: Optional[float]
) -> List[MetricRecord]:
    target = target or config.sweep.qos_target or DEFAULT_QOS_TARGET
    network = config.to_network_config()
    solution = solve_xi_for_qos(
        target, config.gamma, network, config.to_fading()
    )
    xi_db = solution.xi_db(network.mode.rho_d)
    status = "saturated" if solution.saturated else "ok"
    if solution.saturated:
        logger.info("BS outage stays below %g for every threshold", target)
    return [
        MetricRecord(
            "qos_target", target, Quantity.XI_DB.value, xi_db, status=status
        ),
        MetricRecord(
            "qos_target",
            target,
            Quantity.OUTAGE_BS.value,
            solution.outage,
            status=status,
        ),
    ]


def run_simulate(
    config: RunConfig, dump: Optional[str], quiet: bool
) -> List[MetricRecord]:
    _require_monte_carlo(config, "simulate")
    spec = _point_spec(config)
    if dump is None:
        return evaluate_point(config, spec, spec.grid[0], analytic=False)

    network = config.to_network_config()
    playground = MonteCarloPlayground(
        network,
        config.to_fading(),
        gamma=config.gamma,
        tagged_distance=config.sweep.tagged_distance,
        confine_drx=spec.confine_drx,
        seed=spec.seed,
        workers=spec.mc_workers,
        keep_realizations=True,
        show_progress=not quiet,
    )
    playground.play_multiple_realizations(spec.n_realizations)
    dump_realizations(playground.realizations, dump)
    parameter, value = spec.parameter.value, spec.grid[0]
    records = []
    for quantity in spec.quantities:
        if Quantity(quantity) is Quantity.XI_DB:
            continue
        estimate = playground.estimate(quantity)
        records.append(
            MetricRecord(
                parameter,
                value,
                Quantity(quantity).value,
                float("nan"),
                estimate.mean,
                estimate.ci_halfwidth,
                spec.seed,
            )
        )
    return records


def run_validate(config: RunConfig) -> List[MetricRecord]:
    _require_monte_carlo(config, "validate")
    spec = _point_spec(config)
    quantities = tuple(
        q
        for q in spec.quantities
        if q not in MONTE_CARLO_ONLY and q is not Quantity.XI_DB
    )
    if not quantities:
        raise ConfigError("No quantity in sweep.quantities can be validated")
    spec = replace(spec, quantities=quantities)
    return validate_records(evaluate_point(config, spec, spec.grid[0]))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs one verb and writes its records

    Returns:
        (int): 0 on success, 1 on configuration errors, 2 on numerical
            failures, 3 when validate finds a tolerance failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_OK if error.code == 0 else EXIT_CONFIG
    _configure_logging(args.verbose, args.quiet)

    try:
        config = load_run_config(
            args.config, args.preset, args.overrides, args.seed, args.mc_runs
        )
        if args.verb == "eval":
            records = run_eval(config)
        elif args.verb == "sweep":
            records = run_sweep_verb(config, args.quiet)
        elif args.verb == "solve-xi":
            records = run_solve_xi(config, args.target)
        elif args.verb == "simulate":
            records = run_simulate(config, args.dump, args.quiet)
        else:
            records = run_validate(config)
        text = emit(records, args.format, args.out)
    except NumericalError as error:
        logger.error("%s: %s", type(error).__name__, error)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as error:
        logger.error("%s: %s", type(error).__name__, error)
        return EXIT_CONFIG

    if args.out is None:
        sys.stdout.write(text)
    if args.verb == "validate" and any(r.status != "pass" for r in records):
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
