"""Command line interface of ``sharerisk``.

Usage:
  sharerisk decide scenario.json --consumer James
  sharerisk simulate scenario.json --consumer Alec --trials 1000000 --compare
"""

import argparse
import dataclasses
import logging
import pathlib
import sys
import typing

import pydantic

import sharerisk._config
import sharerisk._models
import sharerisk._render
import sharerisk.continuous
import sharerisk.impact
import sharerisk.io
import sharerisk.montecarlo
import sharerisk.propagation
import sharerisk.validation

_LOGGER = logging.getLogger("sharerisk.cli")

EXIT_OK = 0
EXIT_INTERNAL_ERROR = 1
EXIT_INPUT_ERROR = 2

INPUT_ERRORS = (
    OSError,
    UnicodeDecodeError,
    pydantic.ValidationError,
    sharerisk.io.ScenarioParseError,
    sharerisk.validation.ScenarioValidationError,
    sharerisk.propagation.NoPathError,
    sharerisk.propagation.GraphTooDenseError,
    sharerisk.propagation.OperatorBoundError,
    sharerisk.propagation.UnknownOperatorError,
    sharerisk.propagation.UnknownMessageError,
    sharerisk.propagation.MessageDistributionError,
    sharerisk.propagation.DisclosureRangeError,
    sharerisk.impact.ModelDimensionError,
    sharerisk.impact.MissingModelError,
    sharerisk.impact.DegenerateCaseError,
    sharerisk.impact.OutOfRangeError,
    sharerisk.continuous.GridMismatchError,
    sharerisk.continuous.InvalidDensityError,
)
"""Errors caused by the user's input rather than a defect."""


def _given(**kwargs) -> dict[str, typing.Any]:
    """Drop options that were not passed so that config defaults apply."""
    return {key: value for key, value in kwargs.items() if value is not None}


def _emit(text: str):
    sys.stdout.write(text + "\n")


def _write_csv(args: argparse.Namespace, columns, rows):
    if args.csv is not None:
        sharerisk._render.write_csv(args.csv, columns, rows)


def _load(args: argparse.Namespace) -> sharerisk._models.Scenario:
    config = sharerisk._config.ValidationConfig(**_given(tolerance=args.tol))
    return sharerisk.io.load_scenario(args.scenario, config.tolerance)


def _propagation_config(
    args: argparse.Namespace, scenario: sharerisk._models.Scenario
) -> sharerisk._config.PropagationConfig:
    return sharerisk._config.PropagationConfig(
        **_given(
            serial=args.serial or scenario.serial_op,
            parallel=args.parallel or scenario.parallel_op,
            max_paths=args.max_paths,
        )
    )


def _consumers(
    args: argparse.Namespace, scenario: sharerisk._models.Scenario
) -> tuple[str, ...]:
    return scenario.consumers if args.consumer is None else (args.consumer,)


def cmd_validate(args: argparse.Namespace) -> int:
    config = sharerisk._config.ValidationConfig(**_given(tolerance=args.tol))

    scenario = sharerisk.io.parse_scenario(
        pathlib.Path(args.scenario).read_text(encoding="utf-8")
    )
    report = sharerisk.validation.validate_scenario(scenario, config.tolerance)

    _emit(sharerisk._render.digest(scenario, None, None))
    _emit(sharerisk._render.validation_text(report))

    return EXIT_OK if report.ok else EXIT_INPUT_ERROR


def cmd_propagate(args: argparse.Namespace) -> int:
    scenario = _load(args)
    config = _propagation_config(args, scenario)

    ops = config.operators()
    rows = []

    for consumer in _consumers(args, scenario):
        report = sharerisk.propagation.path_report(
            scenario, consumer, ops, config.max_paths
        )
        received = sharerisk.propagation.message_distribution(
            scenario, consumer, ops, config.max_paths
        )

        _emit(sharerisk._render.paths_text(scenario, report, received))
        rows.extend(sharerisk._render.path_rows(report))

    _write_csv(args, sharerisk._render.PATH_COLUMNS, rows)
    return EXIT_OK


def _decisions(args: argparse.Namespace, with_threshold: bool) -> int:
    scenario = _load(args)
    config = _propagation_config(args, scenario)

    ops = config.operators()
    rows = []

    for consumer in _consumers(args, scenario):
        report = sharerisk.impact.evaluate(scenario, consumer, ops, config.max_paths)

        threshold = None

        if with_threshold:
            case = sharerisk.impact.binary_case(
                scenario, consumer, report.message_distribution
            )
            threshold = (
                None if case is None else sharerisk.impact.binary_threshold(case)
            )

        _emit(sharerisk._render.decision_text(scenario, report, threshold))
        rows.append(sharerisk._render.decision_row(report))

    _write_csv(args, sharerisk._render.DECISION_COLUMNS, rows)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    return _decisions(args, with_threshold=False)


def cmd_decide(args: argparse.Namespace) -> int:
    return _decisions(args, with_threshold=True)


def cmd_balance(args: argparse.Namespace) -> int:
    result = sharerisk.impact.balance_q2(args.q1, tuple(args.w1), tuple(args.w2))

    _emit(sharerisk._render.balance_text(args.q1, result))
    _write_csv(
        args,
        sharerisk._render.BALANCE_COLUMNS,
        [sharerisk._render.balance_row(args.q1, result)],
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario = _load(args)
    config = _propagation_config(args, scenario)

    grid = (
        args.grid
        if args.grid is not None
        else sharerisk.impact.sweep_grid(args.points)
    )
    reports = sharerisk.impact.sweep(scenario, args.consumer, grid, config.operators())

    _emit(sharerisk._render.sweep_text(scenario, args.consumer, reports))
    _write_csv(
        args,
        sharerisk._render.DECISION_COLUMNS,
        [sharerisk._render.decision_row(report) for report in reports],
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _load(args)
    propagation_config = _propagation_config(args, scenario)

    config = sharerisk._config.SimulationConfig(
        **_given(
            consumer=args.consumer,
            trials=args.trials,
            seed=args.seed,
            n_workers=args.workers,
        )
    )
    ops = propagation_config.operators()

    report = sharerisk.impact.evaluate(
        scenario, args.consumer, ops, propagation_config.max_paths
    )
    result = sharerisk.montecarlo.simulate(
        scenario, config, ops, propagation_config.max_paths
    )
    comparison = (
        sharerisk.montecarlo.compare_to_analytic(result, report)
        if args.compare
        else None
    )

    _emit(
        sharerisk._render.simulation_text(
            scenario, result, report.effective_disclosure, comparison
        )
    )
    _write_csv(
        args,
        sharerisk._render.SIMULATION_COLUMNS,
        [sharerisk._render.simulation_row(result)],
    )
    return EXIT_OK


def _parse_family(
    value: str,
) -> tuple[str, str, sharerisk._config.DensityFamilySpec]:
    """Parse ``CONSUMER.KIND=JSON`` where ``KIND`` is ``inference`` or ``impact``."""

    target, _, definition = value.partition("=")
    consumer, _, kind = target.rpartition(".")

    if not consumer or kind not in {"inference", "impact"} or not definition:
        raise argparse.ArgumentTypeError(
            f"expected CONSUMER.inference=JSON or CONSUMER.impact=JSON, got {value!r}"
        )

    try:
        spec = sharerisk._config.DensityFamilySpec.model_validate_json(definition)
    except pydantic.ValidationError as e:
        raise argparse.ArgumentTypeError(f"invalid density family: {e}") from e

    return consumer, kind, spec


def _with_families(
    scenario: sharerisk._models.Scenario,
    families: list[tuple[str, str, sharerisk._config.DensityFamilySpec]],
) -> sharerisk._models.Scenario:
    densities = {
        consumer: {"inference": density.inference, "impact": density.impact}
        for consumer, density in scenario.densities.items()
    }

    for consumer, kind, spec in families:
        densities.setdefault(consumer, {})[kind] = spec

    incomplete = sorted(
        consumer for consumer, kinds in densities.items() if len(kinds) != 2
    )

    if len(incomplete) > 0:
        raise sharerisk.impact.MissingModelError(
            f"{', '.join(incomplete)} must define both inference and impact families"
        )

    return dataclasses.replace(
        scenario,
        densities={
            consumer: sharerisk._models.ConsumerDensities(**kinds)
            for consumer, kinds in densities.items()
        },
    )


def _grid_n(
    args: argparse.Namespace, scenario: sharerisk._models.Scenario, consumers: list[str]
) -> int:
    if args.grid_n is not None:
        return sharerisk._config.ContinuousConfig(grid_n=args.grid_n).grid_n

    for consumer in consumers:
        density = scenario.densities.get(consumer)

        for spec in () if density is None else (density.inference, density.impact):
            if spec.form == "grid":
                return len(spec.values[0]) - 1

    return sharerisk._config.ContinuousConfig().grid_n


def cmd_continuous(args: argparse.Namespace) -> int:
    scenario = _with_families(_load(args), args.family or [])

    consumers = [args.consumer] + ([] if args.other is None else [args.other])
    grid_n = _grid_n(args, scenario, consumers)
    config = sharerisk._config.ContinuousConfig(grid_n=grid_n)

    x = (
        args.x
        if args.x is not None
        else sharerisk.propagation.effective_disclosure(scenario, args.consumer)
    )

    impact_family, inference_family = sharerisk.continuous.consumer_families(
        scenario, args.consumer, config.grid_n
    )
    density = sharerisk.continuous.risk_density(
        impact_family, inference_family, x, config.drift_tolerance
    )

    _emit(sharerisk._render.continuous_text(scenario, args.consumer, x, density))

    if args.other is not None:
        x1 = args.match_x1 if args.match_x1 is not None else x

        other_families = sharerisk.continuous.consumer_families(
            scenario, args.other, config.grid_n
        )
        x2 = sharerisk.continuous.solve_matching_disclosure(
            impact_family, inference_family, x1, *other_families, config
        )
        mismatch = (
            None
            if x2 is None
            else sharerisk.continuous.distribution_mismatch(
                impact_family, inference_family, x1, *other_families, x2
            )
        )

        _emit(sharerisk._render.match_text(args.consumer, x1, args.other, x2, mismatch))

    _write_csv(
        args,
        sharerisk._render.CONTINUOUS_COLUMNS,
        sharerisk._render.density_rows(density),
    )
    return EXIT_OK


def _add_scenario(parser: argparse.ArgumentParser):
    parser.add_argument("scenario", help="Path to the scenario JSON file")
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="Tolerance when checking that distributions sum to one",
    )


def _add_csv(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--csv", default=None, help="Also write machine readable results to this path"
    )


def _add_operators(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--serial",
        default=None,
        help="Serial operator (default: the scenario's, otherwise product)",
    )
    parser.add_argument(
        "--parallel",
        default=None,
        help="Parallel operator (default: the scenario's, otherwise min)",
    )
    parser.add_argument(
        "--max-paths",
        type=int,
        default=None,
        help="Maximum number of simple paths to enumerate per consumer",
    )


def _add_consumer(parser: argparse.ArgumentParser, required: bool):
    parser.add_argument(
        "--consumer",
        required=required,
        default=None,
        help="The consumer to analyse" + ("" if required else " (default: all)"),
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharerisk",
        description="Decide whether sharing a message with a consumer is worth the "
        "risk.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log progress to stderr"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="Check a scenario file")
    _add_scenario(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_propagate = sub.add_parser(
        "propagate", help="Show the paths and effective disclosure reaching consumers"
    )
    _add_scenario(p_propagate)
    _add_consumer(p_propagate, required=False)
    _add_operators(p_propagate)
    _add_csv(p_propagate)
    p_propagate.set_defaults(func=cmd_propagate)

    p_evaluate = sub.add_parser(
        "evaluate", help="Compute the expected benefit, risk and net benefit"
    )
    _add_scenario(p_evaluate)
    _add_consumer(p_evaluate, required=False)
    _add_operators(p_evaluate)
    _add_csv(p_evaluate)
    p_evaluate.set_defaults(func=cmd_evaluate)

    p_decide = sub.add_parser(
        "decide", help="Evaluate and show the closed form share threshold"
    )
    _add_scenario(p_decide)
    _add_consumer(p_decide, required=False)
    _add_operators(p_decide)
    _add_csv(p_decide)
    p_decide.set_defaults(func=cmd_decide)

    p_balance = sub.add_parser(
        "balance", help="Find the inference probability equalizing expected risks"
    )
    p_balance.add_argument("--q1", type=float, required=True)
    p_balance.add_argument(
        "--w1", type=float, nargs=2, required=True, metavar=("W0", "W1")
    )
    p_balance.add_argument(
        "--w2", type=float, nargs=2, required=True, metavar=("W0", "W1")
    )
    _add_csv(p_balance)
    p_balance.set_defaults(func=cmd_balance)

    p_sweep = sub.add_parser(
        "sweep", help="Evaluate a consumer over a grid of degrees of disclosure"
    )
    _add_scenario(p_sweep)
    _add_consumer(p_sweep, required=True)
    grid = p_sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--grid", type=float, nargs="+", default=None)
    grid.add_argument("--points", type=int, default=None)
    _add_operators(p_sweep)
    _add_csv(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_simulate = sub.add_parser("simulate", help="Estimate expectations by sampling")
    _add_scenario(p_simulate)
    _add_consumer(p_simulate, required=True)
    p_simulate.add_argument("--trials", type=int, default=None)
    p_simulate.add_argument("--seed", type=int, default=None)
    p_simulate.add_argument(
        "--workers", type=int, default=None, help="Threads used to sample"
    )
    p_simulate.add_argument(
        "--compare",
        action="store_true",
        help="Check the analytic expectations against the estimates",
    )
    _add_operators(p_simulate)
    _add_csv(p_simulate)
    p_simulate.set_defaults(func=cmd_simulate)

    p_continuous = sub.add_parser(
        "continuous", help="Tabulate a risk density from continuous families"
    )
    _add_scenario(p_continuous)
    _add_consumer(p_continuous, required=True)
    p_continuous.add_argument(
        "--x",
        type=float,
        default=None,
        help="Degree of disclosure (default: the consumer's effective disclosure)",
    )
    p_continuous.add_argument("--grid-n", type=int, default=None)
    p_continuous.add_argument(
        "--family",
        type=_parse_family,
        action="append",
        default=None,
        metavar="CONSUMER.KIND=JSON",
        help="Replace a consumer's inference or impact family",
    )
    p_continuous.add_argument(
        "--match-x1",
        type=float,
        default=None,
        help="Degree of disclosure of --consumer to match (default: --x)",
    )
    p_continuous.add_argument(
        "--other", default=None, help="The consumer whose disclosure is solved for"
    )
    _add_csv(p_continuous)
    p_continuous.set_defaults(func=cmd_continuous)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT_ERROR

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return int(args.func(args))
    except INPUT_ERRORS as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT_ERROR
    except Exception:
        _LOGGER.exception("unexpected error")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
