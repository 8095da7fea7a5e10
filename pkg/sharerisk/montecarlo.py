"""Estimate expected impacts by sampling message delivery, inference and impact
outcomes trial by trial."""

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy
import torch

import sharerisk._config
import sharerisk._constants
import sharerisk._models
import sharerisk.impact
import sharerisk.propagation
import sharerisk.utils
import sharerisk.validation

_LOGGER = logging.getLogger("sharerisk.montecarlo")

_N_STANDARD_ERRORS = 3.0
"""The number of standard errors an analytic expectation may lie from its estimate."""


@dataclasses.dataclass(frozen=True)
class SimResult:
    """The estimates produced by a Monte Carlo simulation."""

    consumer: str
    trials: int
    seed: int

    est_eb: float
    """The estimated expected benefit."""
    est_er: float
    """The estimated expected risk."""
    est_ec: float
    """The estimated expected net benefit."""

    stderr_eb: float
    stderr_er: float
    stderr_ec: float

    empirical_x: torch.Tensor
    """The fraction of trials in which each message was received with
    ``shape=(n_messages,)``."""
    empirical_z: torch.Tensor
    """The fraction of trials ending in each risk outcome with ``shape=(n_risks,)``.
    """
    empirical_z_benefit: torch.Tensor
    """The fraction of trials ending in each benefit outcome with
    ``shape=(n_benefits,)``."""


class OracleCheck(typing.NamedTuple):
    """The comparison of one analytic expectation against its estimate."""

    name: str
    analytic: float
    estimate: float
    stderr: float
    z_score: float
    passed: bool


@dataclasses.dataclass(frozen=True)
class OracleReport:
    """Whether the analytic expectations agree with a simulation."""

    consumer: str
    checks: tuple[OracleCheck, ...]

    @property
    def passed(self) -> bool:
        """Whether every analytic expectation is within three standard errors."""
        return all(check.passed for check in self.checks)


class _Sampler(typing.NamedTuple):
    """The probabilities a block of trials is sampled from, as numpy arrays."""

    override: numpy.ndarray | None
    """An explicit received message distribution, if any."""

    edge_probs: numpy.ndarray
    """The forward probability of every edge on a path with ``shape=(n_edges,)``."""
    path_edges: numpy.ndarray
    """One where path ``i`` traverses edge ``j`` and zero otherwise with
    ``shape=(n_paths, n_edges)``."""
    path_levels: torch.Tensor
    """The disclosure of each path when it delivers with ``shape=(n_paths,)``."""

    inference_cdf: numpy.ndarray
    benefit_cdf: numpy.ndarray
    risk_cdf: numpy.ndarray

    shared_impact: bool


def _cdf(matrix: torch.Tensor) -> numpy.ndarray:
    return numpy.cumsum(matrix.numpy(), axis=0)


def _sample_categorical(
    cdf: numpy.ndarray, columns: numpy.ndarray, uniforms: numpy.ndarray
) -> numpy.ndarray:
    """Draw one outcome per trial from the column of a stochastic matrix selected by
    ``columns`` using the inverse CDF."""
    outcomes = (uniforms[:, None] >= cdf[:, columns].T).sum(axis=1)
    return numpy.minimum(outcomes, cdf.shape[0] - 1)


def _build_sampler(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    ops: sharerisk.propagation.Operators,
    max_paths: int,
) -> _Sampler:
    inference, impact = sharerisk.impact._consumer_models(scenario, consumer)

    override = scenario.message_overrides.get(consumer)

    edge_probs = numpy.zeros(0)
    path_edges = numpy.zeros((0, 0), dtype=numpy.int32)
    path_levels = torch.zeros(0, dtype=sharerisk.utils.DTYPE)

    if override is None:
        paths = sharerisk.propagation.path_report(scenario, consumer, ops, max_paths)

        edges = sorted(
            {edge for path in paths.paths for edge in path.edges},
            key=lambda edge: (edge.source, edge.target),
        )
        edge_idxs = {edge: i for i, edge in enumerate(edges)}

        edge_probs = numpy.array([edge.forward_prob for edge in edges])
        path_edges = numpy.zeros((len(paths.paths), len(edges)), dtype=numpy.int32)

        levels = []

        for i, path in enumerate(paths.paths):
            path_edges[i, [edge_idxs[edge] for edge in path.edges]] = 1
            levels.append(
                sharerisk.propagation.fold_path(
                    [(1.0, edge.disclosure) for edge in path.edges], ops.serial
                )
            )

        path_levels = sharerisk.utils.as_tensor(levels)

    return _Sampler(
        override=None if override is None else numpy.cumsum(override.numpy()),
        edge_probs=edge_probs,
        path_edges=path_edges,
        path_levels=path_levels,
        inference_cdf=_cdf(inference.matrix),
        benefit_cdf=_cdf(impact.benefit_matrix),
        risk_cdf=_cdf(impact.risk_matrix),
        shared_impact=impact.shared_impact,
    )


def _sample_block(
    scenario: sharerisk._models.Scenario,
    sampler: _Sampler,
    ops: sharerisk.propagation.Operators,
    seed: int,
    block_idx: int,
    n_trials: int,
) -> tuple[numpy.ndarray, numpy.ndarray]:
    """Sample one block of trials from its own random stream.

    Returns:
        The number of times each message was received with ``shape=(n_messages,)``
        and the number of times each (benefit, risk) outcome pair occurred with
        ``shape=(n_benefits, n_risks)``.
    """
    rng = numpy.random.Generator(
        numpy.random.PCG64(numpy.random.SeedSequence(seed, spawn_key=(block_idx,)))
    )

    message_space = scenario.message_space

    if sampler.override is not None:
        messages = numpy.minimum(
            (rng.random(n_trials)[:, None] >= sampler.override[None, :]).sum(axis=1),
            message_space.n_messages - 1,
        )
    else:
        forwarded = rng.random((n_trials, len(sampler.edge_probs))) < sampler.edge_probs
        blocked = (~forwarded).astype(numpy.int32) @ sampler.path_edges.T
        arrived = blocked == 0

        disclosures = sharerisk.propagation.fuse(
            sampler.path_levels.expand(n_trials, -1),
            torch.from_numpy(arrived),
            ops.parallel,
        )
        messages = sharerisk.propagation.disclose_indices(
            scenario.original_message, disclosures, message_space
        ).numpy()

    inferences = _sample_categorical(
        sampler.inference_cdf, messages, rng.random(n_trials)
    )
    risks = _sample_categorical(sampler.risk_cdf, inferences, rng.random(n_trials))
    benefits = (
        risks
        if sampler.shared_impact
        else _sample_categorical(sampler.benefit_cdf, inferences, rng.random(n_trials))
    )

    n_benefits, n_risks = sampler.benefit_cdf.shape[0], sampler.risk_cdf.shape[0]

    message_counts = numpy.bincount(messages, minlength=message_space.n_messages)
    outcome_counts = numpy.bincount(
        benefits * n_risks + risks, minlength=n_benefits * n_risks
    ).reshape(n_benefits, n_risks)

    return message_counts, outcome_counts


def _estimate(
    values: torch.Tensor, counts: torch.Tensor, n: int
) -> tuple[float, float]:
    """The sample mean and its standard error from the counts of each value."""
    frequencies = counts / n
    mean = float(frequencies @ values)

    if n < 2:
        return mean, 0.0

    variance = float(frequencies @ (values - mean) ** 2) * n / (n - 1)
    return mean, math.sqrt(variance / n)


def simulate(
    scenario: sharerisk._models.Scenario,
    config: sharerisk._config.SimulationConfig,
    ops: sharerisk.propagation.Operators | None = None,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
) -> SimResult:
    """Estimate the expected benefit, risk and net benefit of sharing with a consumer
    by sampling.

    Each trial samples whether each edge forwards, fuses the disclosure of the paths
    that delivered, degrades the original message accordingly (or samples the
    explicit message distribution), then samples an inference and the benefit and
    risk outcomes it leads to.

    Notes:
        Trials are split into blocks of ``config.block_size``, and block ``b`` draws
        from ``SeedSequence(config.seed, spawn_key=(b,))``, so results are identical
        for any number of workers.

    Args:
        scenario: The scenario.
        config: The simulation settings.
        ops: The propagation operators. By default those named by the scenario.
        max_paths: The maximum number of paths to enumerate.

    Raises:
        ScenarioValidationError: if the scenario is invalid.

    Returns:
        The estimates.
    """
    report = sharerisk.validation.validate_scenario(scenario)

    if not report.ok:
        raise sharerisk.validation.ScenarioValidationError(report)

    ops = ops if ops is not None else sharerisk.propagation.scenario_operators(scenario)
    consumer = config.consumer

    sampler = _build_sampler(scenario, consumer, ops, max_paths)

    n_blocks = math.ceil(config.trials / config.block_size)
    block_sizes = [
        min(config.block_size, config.trials - i * config.block_size)
        for i in range(n_blocks)
    ]

    _LOGGER.info(
        f"simulating {config.trials} trials for {consumer} in {n_blocks} block(s)"
    )

    def sample(block_idx: int) -> tuple[numpy.ndarray, numpy.ndarray]:
        counts = _sample_block(
            scenario, sampler, ops, config.seed, block_idx, block_sizes[block_idx]
        )
        _LOGGER.debug(f"sampled block {block_idx + 1} of {n_blocks}")
        return counts

    with concurrent.futures.ThreadPoolExecutor(config.n_workers) as executor:
        blocks = list(executor.map(sample, range(n_blocks)))

    message_counts = sum(counts for counts, _ in blocks)
    outcome_counts = sum(counts for _, counts in blocks)

    message_counts = torch.from_numpy(message_counts).to(sharerisk.utils.DTYPE)
    outcome_counts = torch.from_numpy(outcome_counts).to(sharerisk.utils.DTYPE)

    impact = scenario.impact_models[consumer]
    n = config.trials

    benefit_counts, risk_counts = outcome_counts.sum(dim=1), outcome_counts.sum(dim=0)

    est_eb, stderr_eb = _estimate(impact.benefit_values, benefit_counts, n)
    est_er, stderr_er = _estimate(impact.risk_values, risk_counts, n)

    net_values = impact.benefit_values[:, None] - impact.risk_values[None, :]
    est_ec, stderr_ec = _estimate(net_values.flatten(), outcome_counts.flatten(), n)

    return SimResult(
        consumer=consumer,
        trials=n,
        seed=config.seed,
        est_eb=est_eb,
        est_er=est_er,
        est_ec=est_ec,
        stderr_eb=stderr_eb,
        stderr_er=stderr_er,
        stderr_ec=stderr_ec,
        empirical_x=message_counts / n,
        empirical_z=risk_counts / n,
        empirical_z_benefit=benefit_counts / n,
    )


def _check(name: str, analytic: float, estimate: float, stderr: float) -> OracleCheck:
    difference = estimate - analytic

    if stderr > 0.0:
        z_score = difference / stderr
        passed = abs(z_score) <= _N_STANDARD_ERRORS
        return OracleCheck(name, analytic, estimate, stderr, z_score, passed)

    passed = abs(difference) <= sharerisk._constants.STOCHASTIC_TOLERANCE * max(
        1.0, abs(analytic)
    )
    return OracleCheck(
        name, analytic, estimate, stderr, 0.0 if passed else math.inf, passed
    )


def compare_to_analytic(
    result: SimResult, report: sharerisk._models.DecisionReport
) -> OracleReport:
    """Check that each analytic expectation lies within three standard errors of its
    simulated estimate.

    Expectations estimated with a zero standard error must match exactly (up to
    floating point round-off).
    """
    return OracleReport(
        result.consumer,
        (
            _check("EB", report.expected_benefit, result.est_eb, result.stderr_eb),
            _check("ER", report.expected_risk, result.est_er, result.stderr_er),
            _check("EC", report.expected_net, result.est_ec, result.stderr_ec),
        ),
    )


def oracle_compare(
    scenario: sharerisk._models.Scenario,
    config: sharerisk._config.SimulationConfig,
    ops: sharerisk.propagation.Operators | None = None,
) -> tuple[OracleReport, SimResult, sharerisk._models.DecisionReport]:
    """Evaluate a consumer analytically and by simulation and compare the two.

    Returns:
        The comparison, the simulation result and the analytic report.
    """
    report = sharerisk.impact.evaluate(scenario, config.consumer, ops)
    result = simulate(scenario, config, ops)

    comparison = compare_to_analytic(result, report)

    _LOGGER.info(
        f"oracle comparison for {config.consumer} "
        f"{'passed' if comparison.passed else 'failed'}"
    )
    return comparison, result, report
