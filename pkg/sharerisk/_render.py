"""Human readable and CSV renderings of analysis results."""

import csv
import pathlib
import typing

import torch

import sharerisk._models
import sharerisk.continuous
import sharerisk.impact
import sharerisk.montecarlo
import sharerisk.propagation
import sharerisk.validation

DECISION_COLUMNS = ("consumer", "delta", "EB", "ER", "EC", "verdict")
SIMULATION_COLUMNS = (
    "consumer",
    "trials",
    "seed",
    "estEB",
    "seEB",
    "estER",
    "seER",
    "estEC",
    "seEC",
)
CONTINUOUS_COLUMNS = ("z", "f_R")
PATH_COLUMNS = ("consumer", "path", "delta")
BALANCE_COLUMNS = ("q1", "q2", "feasible")

Row = typing.Sequence[str]


def number(value: float | None) -> str:
    """Format a number for humans, with up to six significant digits. Magnitudes of
    a million or more are written in full with up to six decimals."""
    if value is None:
        return "n/a"
    if abs(value) >= 1.0e6:
        return f"{value:.6f}".rstrip("0").rstrip(".")

    return f"{value:.6g}"


def csv_number(value: float | None) -> str:
    """Format a number for CSV output using its shortest round-trip form."""
    return "" if value is None else repr(float(value))


def write_csv(path: pathlib.Path | str, columns: Row, rows: typing.Iterable[Row]):
    """Write rows to a CSV file with ``\\n`` line endings."""

    with open(path, "w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def digest(
    scenario: sharerisk._models.Scenario, consumer: str | None, delta: float | None
) -> str:
    """A one line summary of what a report was computed for."""
    return (
        f"scenario: producer={scenario.producer} "
        f"message={scenario.original_message} "
        f"consumer={consumer or '-'} delta={number(delta)}"
    )


def _vector(x: torch.Tensor) -> str:
    return "(" + ", ".join(number(float(v)) for v in x) + ")"


def validation_text(report: sharerisk.validation.ValidationReport) -> str:
    lines = [f"valid: {'yes' if report.ok else 'no'}"]
    lines.extend(
        f"  {finding.severity.value.upper()} [{finding.location}] {finding.description}"
        for finding in report.findings
    )
    return "\n".join(lines)


def paths_text(
    scenario: sharerisk._models.Scenario,
    report: sharerisk.propagation.PathReport,
    received: sharerisk._models.MessageDistribution,
) -> str:
    lines = [digest(scenario, report.consumer, report.effective_disclosure)]
    lines.extend(
        f"  {' -> '.join(path.agents)}: {number(path.disclosure)}"
        for path in report.paths
    )
    lines.append(f"  effective disclosure: {number(report.effective_disclosure)}")

    if received.effective_disclosure is None:
        lines.append("  received message distribution supplied explicitly")
    else:
        message = scenario.message_space.messages[int(received.x.argmax())]
        lines.append(f"  delivered message: {message.id} ({message.label})")

    lines.append(f"  x = {_vector(received.x)}")
    return "\n".join(lines)


def path_rows(report: sharerisk.propagation.PathReport) -> list[Row]:
    rows = [
        [report.consumer, ">".join(path.agents), csv_number(path.disclosure)]
        for path in report.paths
    ]
    rows.append(
        [report.consumer, "effective", csv_number(report.effective_disclosure)]
    )
    return rows


def decision_text(
    scenario: sharerisk._models.Scenario,
    report: sharerisk._models.DecisionReport,
    threshold: sharerisk.impact.ThresholdResult | None = None,
) -> str:
    lines = [
        digest(scenario, report.consumer, report.effective_disclosure),
        f"  E[B] = {number(report.expected_benefit)}",
        f"  E[R] = {number(report.expected_risk)}",
        f"  E[C] = {number(report.expected_net)}",
        f"  verdict: {report.verdict.value.upper()}",
    ]

    if threshold is not None:
        lines.append(
            f"  threshold: lhs = {number(threshold.lhs)}, "
            f"rhs = {number(threshold.rhs)} -> {threshold.verdict.value.upper()}"
        )
        if not threshold.benefit_covers_minimum:
            lines.append("  the benefit does not cover the lowest risk")

    return "\n".join(lines)


def decision_row(report: sharerisk._models.DecisionReport) -> Row:
    return [
        report.consumer,
        csv_number(report.effective_disclosure),
        csv_number(report.expected_benefit),
        csv_number(report.expected_risk),
        csv_number(report.expected_net),
        report.verdict.value,
    ]


def sweep_text(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    reports: typing.Sequence[sharerisk._models.DecisionReport],
) -> str:
    lines = [
        digest(scenario, consumer, None),
        f"  {'delta':>10} {'E[B]':>12} {'E[R]':>12} {'E[C]':>12}  verdict",
    ]
    lines.extend(
        f"  {number(report.effective_disclosure):>10} "
        f"{number(report.expected_benefit):>12} "
        f"{number(report.expected_risk):>12} "
        f"{number(report.expected_net):>12}  {report.verdict.value.upper()}"
        for report in reports
    )
    return "\n".join(lines)


def balance_text(q1: float, result: sharerisk.impact.BalanceResult) -> str:
    lines = [f"q1 = {number(q1)}", f"q2 = {number(result.q2)}"]
    lines.append("feasible" if result.feasible else "infeasible: q2 is not in [0, 1]")
    return "\n".join(lines)


def balance_row(q1: float, result: sharerisk.impact.BalanceResult) -> Row:
    return [csv_number(q1), csv_number(result.q2), str(result.feasible).lower()]


def simulation_text(
    scenario: sharerisk._models.Scenario,
    result: sharerisk.montecarlo.SimResult,
    delta: float | None,
    comparison: sharerisk.montecarlo.OracleReport | None = None,
) -> str:
    lines = [
        digest(scenario, result.consumer, delta),
        f"  trials = {result.trials}, seed = {result.seed}",
        f"  E[B] ~ {number(result.est_eb)} +/- {number(result.stderr_eb)}",
        f"  E[R] ~ {number(result.est_er)} +/- {number(result.stderr_er)}",
        f"  E[C] ~ {number(result.est_ec)} +/- {number(result.stderr_ec)}",
        f"  x ~ {_vector(result.empirical_x)}",
        f"  z ~ {_vector(result.empirical_z)}",
    ]

    if comparison is not None:
        lines.append(f"  oracle: {'PASS' if comparison.passed else 'FAIL'}")
        lines.extend(
            f"    {check.name}: analytic {number(check.analytic)}, "
            f"estimate {number(check.estimate)}, z = {number(check.z_score)}"
            for check in comparison.checks
        )

    return "\n".join(lines)


def simulation_row(result: sharerisk.montecarlo.SimResult) -> Row:
    return [
        result.consumer,
        str(result.trials),
        str(result.seed),
        csv_number(result.est_eb),
        csv_number(result.stderr_eb),
        csv_number(result.est_er),
        csv_number(result.stderr_er),
        csv_number(result.est_ec),
        csv_number(result.stderr_ec),
    ]


def continuous_text(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    x: float,
    density: sharerisk.continuous.GridDensity,
) -> str:
    lines = [
        digest(scenario, consumer, x),
        f"  grid intervals = {density.n_intervals}",
        f"  mean impact = {number(sharerisk.continuous.mean(density))}",
        f"  second moment = "
        f"{number(sharerisk.continuous.descriptor(lambda w: w**2, density))}",
    ]

    if density.drift != 0.0:
        lines.append(f"  renormalized (drift {number(density.drift)})")

    return "\n".join(lines)


def match_text(
    consumer: str, x1: float, other: str, x2: float | None, mismatch: float | None
) -> str:
    if x2 is None:
        return f"  no disclosure for {other} matches {consumer} at x = {number(x1)}"

    return (
        f"  {other} at x = {number(x2)} matches the mean impact of {consumer} at "
        f"x = {number(x1)}\n"
        f"  largest risk CDF difference = {number(mismatch)}"
    )


def density_rows(density: sharerisk.continuous.GridDensity) -> list[Row]:
    return [
        [csv_number(z), csv_number(f)]
        for z, f in zip(density.grid.tolist(), density.values.tolist(), strict=True)
    ]
