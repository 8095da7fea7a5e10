"""Validate the well-formedness of information sharing scenarios."""

import dataclasses
import logging
import math
import typing

import networkx
import torch

import sharerisk._constants
import sharerisk._models
import sharerisk.propagation
import sharerisk.utils

_LOGGER = logging.getLogger("sharerisk.validation")

_Severity = sharerisk._constants.Severity


@dataclasses.dataclass(frozen=True)
class Finding:
    """A single problem found in a scenario."""

    severity: sharerisk._constants.Severity
    """Whether the problem makes the scenario unusable (error) or is suspicious."""
    location: str
    """Where in the scenario the problem was found, e.g. ``consumers.Alec.inference``.
    """
    description: str
    """A description of the problem."""


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    """Every problem found in a scenario."""

    findings: tuple[Finding, ...] = ()
    """The findings in the order they were found."""

    @property
    def ok(self) -> bool:
        """Whether the scenario contains no errors."""
        return not any(finding.severity == _Severity.ERROR for finding in self.findings)

    @property
    def errors(self) -> tuple[Finding, ...]:
        """The findings with error severity."""
        return tuple(
            finding for finding in self.findings if finding.severity == _Severity.ERROR
        )


class ScenarioValidationError(ValueError):
    """An error raised when a scenario that failed validation is used."""

    def __init__(self, report: ValidationReport):
        self.report = report

        super().__init__(
            "invalid scenario:\n"
            + "\n".join(
                f"  [{finding.location}] {finding.description}"
                for finding in report.errors
            )
        )


def is_column_stochastic(
    matrix: torch.Tensor | typing.Sequence[typing.Sequence[float]],
    tol: float = sharerisk._constants.STOCHASTIC_TOLERANCE,
) -> bool:
    """Check whether every entry of a matrix lies in [0, 1] and every column sums to
    one within a tolerance.

    Args:
        matrix: The matrix to check with ``shape=(n_rows, n_cols)``.
        tol: The tolerance allowed on each column sum.

    Returns:
        Whether the matrix is column-stochastic. Empty matrices are not.
    """
    if tol <= 0.0:
        raise ValueError("the tolerance must be positive")

    matrix = sharerisk.utils.as_tensor(matrix)

    if matrix.ndim != 2 or matrix.numel() == 0:
        return False
    if not torch.isfinite(matrix).all():
        return False
    if ((matrix < 0.0) | (matrix > 1.0)).any():
        return False

    return bool(((matrix.sum(dim=0) - 1.0).abs() <= tol).all())


def _error(location: str, description: str) -> Finding:
    return Finding(_Severity.ERROR, location, description)


def _warning(location: str, description: str) -> Finding:
    return Finding(_Severity.WARNING, location, description)


def _in_unit_interval(value: float) -> bool:
    return math.isfinite(value) and 0.0 <= value <= 1.0


def _matrix_findings(matrix: torch.Tensor, tol: float, location: str) -> list[Finding]:
    """Report every column of a matrix that is not a probability distribution."""

    if matrix.ndim != 2 or matrix.numel() == 0:
        return [_error(location, f"expected a non-empty matrix, found {matrix.shape}")]

    findings = []

    for j, column in enumerate(matrix.T):
        if not torch.isfinite(column).all():
            findings.append(_error(location, f"column {j} contains non-finite entries"))
            continue

        if ((column < 0.0) | (column > 1.0)).any():
            findings.append(
                _error(location, f"column {j} has entries outside [0, 1]")
            )

        column_sum = float(column.sum())

        if abs(column_sum - 1.0) > tol:
            findings.append(
                _error(location, f"column {j} sums to {column_sum:.10g}, not 1")
            )

    return findings


def _validate_agents(scenario: sharerisk._models.Scenario) -> list[Finding]:
    findings = []

    for i, agent in enumerate(scenario.agents):
        if len(agent) == 0:
            findings.append(_error(f"agents[{i}]", "agent ids must be non-empty"))

    seen = set()

    for agent in scenario.agents:
        if agent in seen:
            findings.append(_error("agents", f"agent {agent!r} is defined twice"))
        seen.add(agent)

    if scenario.producer not in seen:
        findings.append(
            _error("producer", f"producer {scenario.producer!r} is not an agent")
        )

    return findings


def _validate_messages(scenario: sharerisk._models.Scenario) -> list[Finding]:
    messages = scenario.message_space.messages

    if len(messages) < 2:
        return [
            _error(
                "messages",
                "the message space requires the original message and a 'no message' "
                "entry",
            )
        ]

    findings = []

    ids = [message.id for message in messages]

    for i, message in enumerate(messages):
        if len(message.id) == 0:
            findings.append(_error(f"messages[{i}]", "message ids must be non-empty"))
        if ids.index(message.id) != i:
            findings.append(
                _error(f"messages[{i}]", f"message {message.id!r} is defined twice")
            )
        if not _in_unit_interval(message.info_level):
            findings.append(
                _error(f"messages[{i}]", "the information level must be in [0, 1]")
            )

    levels = [message.info_level for message in messages]

    if any(a <= b for a, b in zip(levels[:-1], levels[1:], strict=True)):
        findings.append(
            _error("messages", "information levels must be strictly decreasing")
        )
    if levels[0] != sharerisk._constants.FULL_MESSAGE_LEVEL:
        findings.append(
            _error("messages", "the first message must have an information level of 1")
        )
    if levels[-1] != sharerisk._constants.NO_MESSAGE_LEVEL:
        findings.append(
            _error(
                "messages",
                "the last message must be the 'no message' entry with an information "
                "level of 0",
            )
        )

    if scenario.original_message not in ids:
        findings.append(
            _error(
                "original_message",
                f"message {scenario.original_message!r} is not in the message space",
            )
        )
    elif scenario.original_message != ids[0]:
        findings.append(
            _warning(
                "original_message",
                "the original message is not the most informative message in the "
                "space",
            )
        )

    return findings


def _validate_edges(scenario: sharerisk._models.Scenario) -> list[Finding]:
    findings = []

    agents = set(scenario.agents)
    seen = set()

    for i, edge in enumerate(scenario.edges):
        location = f"edges[{i}]"

        for agent in (edge.source, edge.target):
            if agent not in agents:
                findings.append(_error(location, f"{agent!r} is not an agent"))

        if edge.source == edge.target:
            findings.append(_error(location, "an agent cannot message itself"))
        if (edge.source, edge.target) in seen:
            findings.append(
                _error(
                    location, f"edge {edge.source!r} -> {edge.target!r} is duplicated"
                )
            )
        seen.add((edge.source, edge.target))

        if not _in_unit_interval(edge.forward_prob):
            findings.append(
                _error(location, "the forwarding probability must be in [0, 1]")
            )
        if not _in_unit_interval(edge.disclosure):
            findings.append(
                _error(location, "the degree of disclosure must be in [0, 1]")
            )

    return findings


def _validate_operators(scenario: sharerisk._models.Scenario) -> list[Finding]:
    findings = []

    if scenario.serial_op not in sharerisk.propagation.registered_serial_ops():
        findings.append(
            _error("operators.serial", f"unknown operator {scenario.serial_op!r}")
        )
    if scenario.parallel_op not in sharerisk.propagation.registered_parallel_ops():
        findings.append(
            _error("operators.parallel", f"unknown operator {scenario.parallel_op!r}")
        )

    return findings


def _validate_inference(
    model: sharerisk._models.InferenceModel,
    n_messages: int,
    location: str,
    tol: float,
) -> list[Finding]:
    findings = []

    if model.matrix.ndim == 2 and model.n_messages != n_messages:
        findings.append(
            _error(
                location,
                f"expected {n_messages} columns (one per message), found "
                f"{model.n_messages}",
            )
        )
    if model.matrix.ndim == 2 and len(model.inference_labels) != model.n_inferences:
        findings.append(
            _error(
                location,
                f"expected {model.n_inferences} inference labels, found "
                f"{len(model.inference_labels)}",
            )
        )

    return findings + _matrix_findings(model.matrix, tol, location)


def _validate_impact(
    model: sharerisk._models.ImpactModel,
    n_inferences: int | None,
    location: str,
    tol: float,
) -> list[Finding]:
    findings = []

    for kind, matrix, values in (
        ("benefit", model.benefit_matrix, model.benefit_values),
        ("risk", model.risk_matrix, model.risk_values),
    ):
        kind_location = f"{location}.{kind}"

        findings.extend(_matrix_findings(matrix, tol, kind_location))

        if matrix.ndim != 2:
            continue

        if n_inferences is not None and matrix.shape[1] != n_inferences:
            findings.append(
                _error(
                    kind_location,
                    f"expected {n_inferences} columns (one per inference), found "
                    f"{matrix.shape[1]}",
                )
            )
        if values.ndim != 1 or len(values) != matrix.shape[0]:
            findings.append(
                _error(
                    kind_location,
                    f"expected {matrix.shape[0]} values (one per outcome), found "
                    f"{tuple(values.shape)}",
                )
            )
        elif not torch.isfinite(values).all():
            findings.append(_error(kind_location, "values must be finite"))

    if model.shared_impact and (
        model.benefit_matrix.shape != model.risk_matrix.shape
        or not torch.equal(model.benefit_matrix, model.risk_matrix)
    ):
        findings.append(
            _error(
                location,
                "a shared impact model requires identical benefit and risk matrices",
            )
        )

    return findings


def _validate_override(
    x: torch.Tensor, n_messages: int, location: str, tol: float
) -> list[Finding]:
    if x.ndim != 1 or len(x) != n_messages:
        return [
            _error(
                location,
                f"expected {n_messages} message probabilities, found {tuple(x.shape)}",
            )
        ]

    findings = []

    if not torch.isfinite(x).all() or (x < 0.0).any():
        findings.append(_error(location, "probabilities must be finite and >= 0"))
    if abs(float(x.sum()) - 1.0) > tol:
        findings.append(
            _error(location, f"probabilities sum to {float(x.sum()):.10g}, not 1")
        )

    return findings


def _validate_consumers(
    scenario: sharerisk._models.Scenario, tol: float
) -> list[Finding]:
    findings = []

    agents = set(scenario.agents)
    graph = scenario.graph()

    n_messages = scenario.message_space.n_messages

    for consumer in scenario.consumers:
        location = f"consumers.{consumer}"

        if consumer not in agents:
            findings.append(_error(location, f"{consumer!r} is not an agent"))
        elif consumer == scenario.producer:
            findings.append(_error(location, "the producer cannot be a consumer"))
        elif scenario.producer in agents and not networkx.has_path(
            graph, scenario.producer, consumer
        ):
            findings.append(_error(location, "consumer unreachable from the producer"))

        inference_model = scenario.inference_models.get(consumer)
        impact_model = scenario.impact_models.get(consumer)

        n_inferences = None

        if inference_model is None:
            findings.append(_error(location, "missing an inference model"))
        else:
            if inference_model.consumer != consumer:
                findings.append(
                    _error(
                        f"{location}.inference",
                        f"model is defined for {inference_model.consumer!r}",
                    )
                )
            findings.extend(
                _validate_inference(
                    inference_model, n_messages, f"{location}.inference", tol
                )
            )
            n_inferences = (
                inference_model.n_inferences
                if inference_model.matrix.ndim == 2
                else None
            )

        if impact_model is None:
            findings.append(_error(location, "missing an impact model"))
        else:
            findings.extend(_validate_impact(impact_model, n_inferences, location, tol))

        if consumer in scenario.message_overrides:
            findings.extend(
                _validate_override(
                    scenario.message_overrides[consumer],
                    n_messages,
                    f"{location}.x",
                    tol,
                )
            )

    for consumer in scenario.densities:
        if consumer not in agents:
            findings.append(
                _error(f"continuous.{consumer}", f"{consumer!r} is not an agent")
            )

    return findings


def validate_scenario(
    scenario: sharerisk._models.Scenario,
    tol: float = sharerisk._constants.STOCHASTIC_TOLERANCE,
) -> ValidationReport:
    """Find every violated invariant of a scenario.

    Notes:
        Problems are reported rather than raised, and the report only depends on the
        scenario and the tolerance.

    Args:
        scenario: The scenario to validate.
        tol: The tolerance allowed when checking that distributions sum to one.

    Returns:
        The validation report.
    """

    findings = [
        *_validate_agents(scenario),
        *_validate_messages(scenario),
        *_validate_edges(scenario),
        *_validate_operators(scenario),
        *_validate_consumers(scenario, tol),
    ]

    for finding in findings:
        if finding.severity == _Severity.WARNING:
            _LOGGER.warning(f"[{finding.location}] {finding.description}")

    return ValidationReport(tuple(findings))
