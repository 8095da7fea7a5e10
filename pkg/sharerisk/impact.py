"""Expected benefit, risk and net benefit of sharing a message with a consumer."""

import dataclasses
import logging
import typing

import torch

import sharerisk._constants
import sharerisk._models
import sharerisk.propagation
import sharerisk.utils

_LOGGER = logging.getLogger("sharerisk.impact")


class ModelDimensionError(ValueError):
    """An error raised when the shapes of a consumer's models do not chain."""


class MissingModelError(ValueError):
    """An error raised when a consumer lacks an inference or impact model."""


class DegenerateCaseError(ValueError):
    """An error raised when a closed form expression is undefined for its inputs."""


class OutOfRangeError(ValueError):
    """An error raised when an analysis parameter is outside the range it accepts."""


@dataclasses.dataclass(frozen=True)
class BinaryCase:
    """A consumer with two inferences, two risk outcomes and a fixed benefit."""

    u_m1: float
    """The probability of inference ``y0`` given the original message."""
    u_m2: float
    """The probability of inference ``y0`` given the delivered message."""

    w_y0: float
    """The probability of the low risk outcome given inference ``y0``."""
    w_y1: float
    """The probability of the low risk outcome given inference ``y1``."""

    r_a: float
    """The cost of the low risk outcome."""
    r_b: float
    """The cost of the high risk outcome."""

    benefit: float
    """The fixed benefit of sharing."""


class ThresholdResult(typing.NamedTuple):
    """The closed form share test of a binary case."""

    lhs: float
    rhs: float
    verdict: sharerisk._constants.Verdict

    benefit_covers_minimum: bool
    """Whether the benefit is at least the cost of the low risk outcome, which is
    necessary for sharing to ever be worthwhile."""


class BalanceResult(typing.NamedTuple):
    """The inference probability that equalizes the expected risk of two consumers."""

    q2: float
    feasible: bool
    """Whether ``q2`` is a probability in [0, 1]."""


def _as_vector(
    z: "sharerisk._models.ImpactDistribution | torch.Tensor",
) -> torch.Tensor:
    return z.z if isinstance(z, sharerisk._models.ImpactDistribution) else z


def impact_distribution(
    impact_matrix: torch.Tensor,
    inference_matrix: torch.Tensor,
    x: torch.Tensor,
    consumer: str | None = None,
) -> sharerisk._models.ImpactDistribution:
    """Compute the distribution over impact outcomes ``z = Z @ (I @ x)``.

    Args:
        impact_matrix: The impact matrix with ``shape=(n_outcomes, n_inferences)``.
        inference_matrix: The inference matrix with
            ``shape=(n_inferences, n_messages)``.
        x: The received message distribution with ``shape=(n_messages,)``.
        consumer: The consumer the matrices belong to, used in error messages.

    Raises:
        ModelDimensionError: if the shapes of the inputs do not chain.

    Returns:
        The impact distribution.
    """
    name = "" if consumer is None else f" of {consumer}"

    if inference_matrix.ndim != 2 or x.shape != (inference_matrix.shape[1],):
        raise ModelDimensionError(
            f"the inference matrix{name} has shape {tuple(inference_matrix.shape)} "
            f"but the message distribution has shape {tuple(x.shape)}"
        )
    if impact_matrix.ndim != 2 or impact_matrix.shape[1] != inference_matrix.shape[0]:
        raise ModelDimensionError(
            f"the impact matrix{name} has shape {tuple(impact_matrix.shape)} but the "
            f"inference matrix has {inference_matrix.shape[0]} inference(s)"
        )

    y = inference_matrix.to(sharerisk.utils.DTYPE) @ x.to(sharerisk.utils.DTYPE)
    z = impact_matrix.to(sharerisk.utils.DTYPE) @ y

    return sharerisk._models.ImpactDistribution(consumer, z)


def expected_impact(
    values: torch.Tensor, z: "sharerisk._models.ImpactDistribution | torch.Tensor"
) -> float:
    """Compute the expected impact ``values @ z``.

    Raises:
        ModelDimensionError: if the number of values and outcomes differ.
    """
    z = _as_vector(z)

    if values.shape != z.shape:
        raise ModelDimensionError(
            f"{values.numel()} impact value(s) were provided for {z.numel()} outcome(s)"
        )

    return float(values.to(sharerisk.utils.DTYPE) @ z.to(sharerisk.utils.DTYPE))


def verdict(expected_net: float) -> sharerisk._constants.Verdict:
    """Share iff the expected net benefit is non-negative."""
    return (
        sharerisk._constants.Verdict.SHARE
        if expected_net >= 0.0
        else sharerisk._constants.Verdict.WITHHOLD
    )


def _consumer_models(
    scenario: sharerisk._models.Scenario, consumer: str
) -> tuple[sharerisk._models.InferenceModel, sharerisk._models.ImpactModel]:
    if consumer not in scenario.inference_models:
        raise MissingModelError(f"{consumer} does not have an inference model")
    if consumer not in scenario.impact_models:
        raise MissingModelError(f"{consumer} does not have an impact model")

    return scenario.inference_models[consumer], scenario.impact_models[consumer]


def binary_case(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    x: torch.Tensor,
) -> BinaryCase | None:
    """Extract the binary case of a consumer, if it has one.

    A consumer is a binary case when it has two inferences, two risk outcomes
    (ordered from low to high cost), a benefit that does not depend on the inference
    and receives a single message with certainty.

    Args:
        scenario: The scenario.
        consumer: The consumer.
        x: The received message distribution with ``shape=(n_messages,)``.

    Returns:
        The binary case, or ``None`` if the consumer is not one.
    """
    inference, impact = _consumer_models(scenario, consumer)

    if inference.n_inferences != 2 or impact.n_risks != 2:
        return None

    benefits = impact.benefit_values @ impact.benefit_matrix

    if not torch.allclose(benefits, benefits[0].expand_as(benefits)):
        return None

    r_a, r_b = (float(v) for v in impact.risk_values)

    if r_b <= r_a:
        return None

    delivered = torch.nonzero(x == 1.0).flatten()

    if len(delivered) != 1:
        return None

    original_idx = scenario.message_space.index(scenario.original_message)

    return BinaryCase(
        u_m1=float(inference.matrix[0, original_idx]),
        u_m2=float(inference.matrix[0, int(delivered[0])]),
        w_y0=float(impact.risk_matrix[0, 0]),
        w_y1=float(impact.risk_matrix[0, 1]),
        r_a=r_a,
        r_b=r_b,
        benefit=float(benefits[0]),
    )


def binary_threshold(case: BinaryCase) -> ThresholdResult:
    """Apply the closed form share test of a binary case.

    Sharing is worthwhile iff ``lhs <= rhs <= 1`` where
    ``lhs = (r_b - benefit) / (r_b - r_a)`` and
    ``rhs = u_m2 * w_y0 + (1 - u_m2) * w_y1``.

    Raises:
        DegenerateCaseError: if ``r_b <= r_a``.
    """
    if case.r_b <= case.r_a:
        raise DegenerateCaseError(
            f"the high risk cost {case.r_b} must exceed the low risk cost {case.r_a}"
        )

    lhs = (case.r_b - case.benefit) / (case.r_b - case.r_a)
    rhs = case.u_m2 * case.w_y0 + (1.0 - case.u_m2) * case.w_y1

    share = lhs <= rhs <= 1.0

    return ThresholdResult(
        lhs=lhs,
        rhs=rhs,
        verdict=(
            sharerisk._constants.Verdict.SHARE
            if share
            else sharerisk._constants.Verdict.WITHHOLD
        ),
        benefit_covers_minimum=case.benefit >= case.r_a,
    )


def binary_expected_risk(case: BinaryCase) -> float:
    """The expected risk of a binary case,
    ``r_b - (r_b - r_a) * (u_m2 * (w_y0 - w_y1) + w_y1)``."""
    return case.r_b - (case.r_b - case.r_a) * (
        case.u_m2 * (case.w_y0 - case.w_y1) + case.w_y1
    )


def balance_q2(
    q1: float, w1: tuple[float, float], w2: tuple[float, float]
) -> BalanceResult:
    """Find the probability ``q2`` with which consumer two must infer ``y0`` so that
    both consumers present the same expected risk.

    The costs of the risk outcomes play no role: equal expected risk only requires
    ``q1 * w1[0] + (1 - q1) * w1[1] == q2 * w2[0] + (1 - q2) * w2[1]``.

    Args:
        q1: The probability with which consumer one infers ``y0``.
        w1: The probability of the low risk outcome given ``y0`` and ``y1`` for
            consumer one.
        w2: The same probabilities for consumer two.

    Raises:
        DegenerateCaseError: if ``w2[0] == w2[1]``, i.e. the risk of consumer two
            does not depend on what it infers.

    Returns:
        The balancing probability and whether it is feasible.
    """
    if not 0.0 <= q1 <= 1.0:
        raise OutOfRangeError(f"q1={q1} must be a probability")

    denominator = w2[0] - w2[1]

    if denominator == 0.0:
        raise DegenerateCaseError(
            "the risk of the second consumer does not depend on its inference"
        )

    q2 = q1 * (w1[0] - w1[1]) / denominator + (w1[1] - w2[1]) / denominator

    return BalanceResult(q2, 0.0 <= q2 <= 1.0)


def evaluate(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    ops: sharerisk.propagation.Operators | None = None,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
    delta: float | None = None,
) -> sharerisk._models.DecisionReport:
    """Evaluate the expected benefit, risk and net benefit of sharing the original
    message with a consumer.

    Args:
        scenario: The scenario.
        consumer: The consumer.
        ops: The propagation operators. By default those named by the scenario.
        max_paths: The maximum number of paths to enumerate.
        delta: An effective degree of disclosure that replaces the propagated one.

    Raises:
        * MissingModelError
        * ModelDimensionError
        * Any error raised while propagating the message.

    Returns:
        The decision report.
    """
    inference, impact = _consumer_models(scenario, consumer)

    received = sharerisk.propagation.message_distribution(
        scenario, consumer, ops, max_paths, delta
    )

    if impact.shared_impact:
        z = impact_distribution(
            impact.risk_matrix, inference.matrix, received.x, consumer
        )

        expected_benefit = expected_impact(impact.benefit_values, z)
        expected_risk = expected_impact(impact.risk_values, z)
    else:
        z_benefit = impact_distribution(
            impact.benefit_matrix, inference.matrix, received.x, consumer
        )
        z_risk = impact_distribution(
            impact.risk_matrix, inference.matrix, received.x, consumer
        )

        expected_benefit = expected_impact(impact.benefit_values, z_benefit)
        expected_risk = expected_impact(impact.risk_values, z_risk)

    expected_net = expected_benefit - expected_risk

    case = binary_case(scenario, consumer, received.x)
    threshold = None if case is None else binary_threshold(case)

    _LOGGER.debug(
        f"{consumer}: E[B]={expected_benefit} E[R]={expected_risk} E[C]={expected_net}"
    )

    return sharerisk._models.DecisionReport(
        consumer=consumer,
        expected_benefit=expected_benefit,
        expected_risk=expected_risk,
        expected_net=expected_net,
        verdict=verdict(expected_net),
        effective_disclosure=received.effective_disclosure,
        message_distribution=received.x,
        threshold_lhs=None if threshold is None else threshold.lhs,
        threshold_rhs=None if threshold is None else threshold.rhs,
    )


def sweep(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    grid: typing.Iterable[float],
    ops: sharerisk.propagation.Operators | None = None,
) -> list[sharerisk._models.DecisionReport]:
    """Evaluate a consumer once per degree of disclosure in a grid, in grid order.

    Raises:
        DisclosureRangeError: if a grid value is outside [0, 1].
    """
    grid = [float(delta) for delta in grid]

    for delta in grid:
        if not 0.0 <= delta <= 1.0:
            raise sharerisk.propagation.DisclosureRangeError(
                f"the degree of disclosure {delta} must be in [0, 1]"
            )

    return [evaluate(scenario, consumer, ops, delta=delta) for delta in grid]


def sweep_grid(n_points: int) -> list[float]:
    """Returns ``n_points`` uniformly spaced degrees of disclosure on [0, 1]."""
    if n_points < 2:
        raise OutOfRangeError("a sweep requires at least two points")

    return sharerisk.utils.uniform_grid(n_points - 1).tolist()
