"""Reduce multi-hop, multi-path communication to an effective degree of disclosure."""

import dataclasses
import logging
import typing

import networkx
import torch

import sharerisk._constants
import sharerisk._models
import sharerisk.utils

_LOGGER = logging.getLogger("sharerisk.propagation")

_LEVEL_EPSILON = 1.0e-12
"""Slack used when comparing a target information level against a message's."""
_BOUND_EPSILON = 1.0e-12
"""Slack used when checking operator results against their monotonicity bounds."""


class NoPathError(ValueError):
    """An error raised when a consumer cannot be reached from the producer."""


class GraphTooDenseError(ValueError):
    """An error raised when there are too many simple paths to a consumer."""


class OperatorBoundError(ValueError):
    """An error raised when an operator returns a degree of disclosure that violates
    its monotonicity bound."""


class UnknownOperatorError(ValueError):
    """An error raised when an operator name has not been registered."""


class UnknownMessageError(ValueError):
    """An error raised when a message is not part of the message space."""


class MessageDistributionError(ValueError):
    """An error raised when a supplied message distribution is not normalized."""


class DisclosureRangeError(ValueError):
    """An error raised when a degree of disclosure is outside [0, 1]."""


SerialFn = typing.Callable[
    [torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor], torch.Tensor
]
ParallelFn = typing.Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


@dataclasses.dataclass(frozen=True)
class SerialOp:
    """A named operator that discounts the degree of disclosure along a path.

    ``fn(p_a, delta_a, p_b, delta_b)`` must act elementwise on tensors, return values
    in [0, 1] no larger than ``delta_a``, and be associative over chained application.
    """

    name: str
    fn: SerialFn

    def __call__(
        self,
        p_a: torch.Tensor,
        delta_a: torch.Tensor,
        p_b: torch.Tensor,
        delta_b: torch.Tensor,
    ) -> torch.Tensor:
        return self.fn(p_a, delta_a, p_b, delta_b)


@dataclasses.dataclass(frozen=True)
class ParallelOp:
    """A named operator that fuses the degrees of disclosure arriving over two paths.

    ``fn(a, b)`` must act elementwise on tensors, be commutative and associative, and
    return values no larger than the smallest first hop disclosure of the fused paths.
    """

    name: str
    fn: ParallelFn

    def __call__(self, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        return self.fn(a, b)


class Operators(typing.NamedTuple):
    """The pair of operators used to propagate disclosure."""

    serial: SerialOp
    parallel: ParallelOp


_SERIAL_OPS: dict[str, SerialOp] = {}
_PARALLEL_OPS: dict[str, ParallelOp] = {}


def serial_op(name: str):
    """A decorator used to register a function as a named serial operator."""

    def _serial_op_inner(func: SerialFn) -> SerialFn:
        if name in _SERIAL_OPS:
            raise KeyError(f"A serial operator is already registered for {name}.")

        _SERIAL_OPS[name] = SerialOp(name, func)
        return func

    return _serial_op_inner


def parallel_op(name: str):
    """A decorator used to register a function as a named parallel operator."""

    def _parallel_op_inner(func: ParallelFn) -> ParallelFn:
        if name in _PARALLEL_OPS:
            raise KeyError(f"A parallel operator is already registered for {name}.")

        _PARALLEL_OPS[name] = ParallelOp(name, func)
        return func

    return _parallel_op_inner


@serial_op(sharerisk._constants.SerialOpName.PRODUCT)
def _serial_product(p_a, delta_a, p_b, delta_b):
    """``(p_a * delta_a) * (p_b * delta_b)``"""
    return (p_a * delta_a) * (p_b * delta_b)


@serial_op(sharerisk._constants.SerialOpName.MIN)
def _serial_min(p_a, delta_a, p_b, delta_b):
    """``min(p_a * delta_a, p_b * delta_b)``"""
    return torch.minimum(p_a * delta_a, p_b * delta_b)


@parallel_op(sharerisk._constants.ParallelOpName.MIN)
def _parallel_min(a, b):
    return torch.minimum(a, b)


@parallel_op(sharerisk._constants.ParallelOpName.PRODUCT)
def _parallel_product(a, b):
    return a * b


def registered_serial_ops() -> tuple[str, ...]:
    """The names of every registered serial operator."""
    return tuple(_SERIAL_OPS)


def registered_parallel_ops() -> tuple[str, ...]:
    """The names of every registered parallel operator."""
    return tuple(_PARALLEL_OPS)


def get_serial_op(name: str) -> SerialOp:
    """Returns the serial operator registered under a name."""
    if name not in _SERIAL_OPS:
        raise UnknownOperatorError(f"unknown serial operator {name!r}")
    return _SERIAL_OPS[name]


def get_parallel_op(name: str) -> ParallelOp:
    """Returns the parallel operator registered under a name."""
    if name not in _PARALLEL_OPS:
        raise UnknownOperatorError(f"unknown parallel operator {name!r}")
    return _PARALLEL_OPS[name]


def scenario_operators(scenario: sharerisk._models.Scenario) -> Operators:
    """Returns the operators named by a scenario."""
    return Operators(
        get_serial_op(scenario.serial_op), get_parallel_op(scenario.parallel_op)
    )


def combine_serial(
    a: tuple[float, float], b: tuple[float, float], op: SerialOp | None = None
) -> float:
    """Combine the ``(forward_prob, disclosure)`` pairs of two consecutive hops into
    a single degree of disclosure.

    Args:
        a: The pair of the first hop.
        b: The pair of the second hop.
        op: The operator to use. By default ``(p_a * delta_a) * (p_b * delta_b)``.

    Returns:
        The combined degree of disclosure.
    """
    if op is None:
        op = get_serial_op(sharerisk._constants.SerialOpName.PRODUCT)

    p_a, delta_a = sharerisk.utils.as_tensor(a)
    p_b, delta_b = sharerisk.utils.as_tensor(b)

    return float(op(p_a, delta_a, p_b, delta_b))


def combine_parallel(a: float, b: float, op: ParallelOp | None = None) -> float:
    """Fuse the degrees of disclosure arriving over two paths.

    Args:
        a: The degree of disclosure of the first path.
        b: The degree of disclosure of the second path.
        op: The operator to use. By default ``min(a, b)``.

    Returns:
        The fused degree of disclosure.
    """
    if op is None:
        op = get_parallel_op(sharerisk._constants.ParallelOpName.MIN)

    return float(op(sharerisk.utils.as_tensor(a), sharerisk.utils.as_tensor(b)))


def fold_path(
    hops: typing.Sequence[tuple[float, float]], op: SerialOp | None = None
) -> float:
    """Fold the ``(forward_prob, disclosure)`` pairs of a path left-to-right into a
    single degree of disclosure.

    A single hop is combined with the identity hop ``(1, 1)``.
    """
    if len(hops) == 0:
        raise ValueError("a path must contain at least one hop")

    if len(hops) == 1:
        return combine_serial(hops[0], (1.0, 1.0), op)

    disclosure = combine_serial(hops[0], hops[1], op)

    for hop in hops[2:]:
        disclosure = combine_serial((1.0, disclosure), hop, op)

    return disclosure


def fuse(
    disclosures: torch.Tensor, arrived: torch.Tensor, op: ParallelOp | None = None
) -> torch.Tensor:
    """Fuse the disclosure of every path that delivered a message, path by path in
    column order.

    Args:
        disclosures: The disclosure of each path with ``shape=(..., n_paths)``.
        arrived: Whether each path delivered with ``shape=(..., n_paths)``.
        op: The parallel operator to use. By default ``min``.

    Returns:
        The fused disclosure with ``shape=(...)``, zero where nothing arrived.
    """
    if op is None:
        op = get_parallel_op(sharerisk._constants.ParallelOpName.MIN)

    disclosures = disclosures.to(sharerisk.utils.DTYPE)

    fused = sharerisk.utils.zeros_like(disclosures.shape[:-1], disclosures)
    any_arrived = torch.zeros(disclosures.shape[:-1], dtype=torch.bool)

    for i in range(disclosures.shape[-1]):
        value, mask = disclosures[..., i], arrived[..., i]

        fused = torch.where(
            mask, torch.where(any_arrived, op(fused, value), value), fused
        )
        any_arrived = any_arrived | mask

    return fused


@dataclasses.dataclass(frozen=True)
class PathDisclosure:
    """The disclosure reaching a consumer along a single simple path."""

    agents: tuple[str, ...]
    """The agents visited, starting at the producer and ending at the consumer."""
    edges: tuple[sharerisk._models.DisclosureEdge, ...]
    """The edges traversed."""
    disclosure: float
    """The degree of disclosure after folding the path with the serial operator."""

    @property
    def first_hop_disclosure(self) -> float:
        """The degree of disclosure the producer applied on the first hop."""
        return self.edges[0].disclosure


@dataclasses.dataclass(frozen=True)
class PathReport:
    """Every path from the producer to a consumer and their fused disclosure."""

    consumer: str
    paths: tuple[PathDisclosure, ...]
    effective_disclosure: float


def enumerate_paths(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
) -> list[tuple[str, ...]]:
    """Enumerate every simple path from the producer to a consumer.

    Args:
        scenario: The scenario defining the communication graph.
        consumer: The consumer to reach.
        max_paths: The maximum number of paths to enumerate.

    Raises:
        * NoPathError
        * GraphTooDenseError

    Returns:
        The paths sorted by the position of their agents in ``scenario.agents``.
    """
    graph = scenario.graph()

    if consumer not in graph or consumer == scenario.producer:
        raise NoPathError(f"no path from {scenario.producer} to {consumer}")

    paths = []

    for path in networkx.all_simple_paths(graph, scenario.producer, consumer):
        paths.append(tuple(path))

        if len(paths) > max_paths:
            raise GraphTooDenseError(
                f"more than {max_paths} paths from {scenario.producer} to {consumer}"
            )

    if len(paths) == 0:
        raise NoPathError(f"no path from {scenario.producer} to {consumer}")

    agent_idxs = {agent: i for i, agent in enumerate(scenario.agents)}
    paths.sort(key=lambda path: [agent_idxs.get(agent, -1) for agent in path])

    _LOGGER.info(f"found {len(paths)} path(s) from {scenario.producer} to {consumer}")
    return paths


def check_operator_bounds(
    paths: typing.Sequence[PathDisclosure], fused: float, ops: Operators
):
    """Check the serial and parallel monotonicity bounds on a concrete set of paths.

    Raises:
        OperatorBoundError: if a path (or the fusion of all paths) ends up with more
            disclosure than the producer granted on the first hop(s).
    """

    for path in paths:
        if not 0.0 <= path.disclosure <= 1.0:
            raise OperatorBoundError(
                f"serial operator {ops.serial.name} returned {path.disclosure} "
                f"outside [0, 1] along {' -> '.join(path.agents)}"
            )
        if path.disclosure > path.first_hop_disclosure + _BOUND_EPSILON:
            raise OperatorBoundError(
                f"serial operator {ops.serial.name} returned {path.disclosure} > "
                f"{path.first_hop_disclosure} along {' -> '.join(path.agents)}"
            )

    bound = min(path.first_hop_disclosure for path in paths)

    if not 0.0 <= fused <= 1.0 or fused > bound + _BOUND_EPSILON:
        raise OperatorBoundError(
            f"parallel operator {ops.parallel.name} returned {fused}, which exceeds "
            f"the smallest first hop disclosure {bound}"
        )


def path_report(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    ops: Operators | None = None,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
) -> PathReport:
    """Fold every simple path from the producer to a consumer and fuse the results.

    Args:
        scenario: The scenario defining the communication graph.
        consumer: The consumer to reach.
        ops: The operators to use. By default those named by the scenario.
        max_paths: The maximum number of paths to enumerate.

    Raises:
        * NoPathError
        * GraphTooDenseError
        * OperatorBoundError

    Returns:
        The per-path and fused degrees of disclosure.
    """
    ops = ops if ops is not None else scenario_operators(scenario)

    graph = scenario.graph()
    edges = {(edge.source, edge.target): edge for edge in scenario.edges}

    paths = []

    for agents in enumerate_paths(scenario, consumer, max_paths):
        path_edges = tuple(
            edges[(source, target)]
            for source, target in zip(agents[:-1], agents[1:], strict=True)
        )
        hops = [
            (graph.edges[edge.source, edge.target]["forward_prob"], edge.disclosure)
            for edge in path_edges
        ]
        paths.append(PathDisclosure(agents, path_edges, fold_path(hops, ops.serial)))

    disclosures = sharerisk.utils.as_tensor([path.disclosure for path in paths])
    fused = float(
        fuse(disclosures, torch.ones(len(paths), dtype=torch.bool), ops.parallel)
    )

    check_operator_bounds(paths, fused, ops)

    return PathReport(consumer, tuple(paths), fused)


def effective_disclosure(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    ops: Operators | None = None,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
) -> float:
    """Compute the degree of disclosure with which the producer's message
    effectively reaches a consumer, as if the two were directly connected.

    Args:
        scenario: The scenario defining the communication graph.
        consumer: The consumer to reach.
        ops: The operators to use. By default those named by the scenario.
        max_paths: The maximum number of paths to enumerate.

    Raises:
        * NoPathError
        * GraphTooDenseError
        * OperatorBoundError

    Returns:
        The effective degree of disclosure.
    """
    return path_report(scenario, consumer, ops, max_paths).effective_disclosure


def _select_messages(
    targets: torch.Tensor, message_space: sharerisk._models.MessageSpace
) -> torch.Tensor:
    """Returns the index of the most informative message whose information level does
    not exceed each target level."""

    levels = message_space.info_levels
    mask = levels[None, :] <= targets[:, None] + _LEVEL_EPSILON

    return mask.to(torch.int8).argmax(dim=-1)


def disclose_indices(
    message_id: str,
    disclosures: torch.Tensor,
    message_space: sharerisk._models.MessageSpace,
) -> torch.Tensor:
    """The vectorized form of ``disclose``, returning message indices with
    ``shape=disclosures.shape``."""
    try:
        level = message_space.messages[message_space.index(message_id)].info_level
    except KeyError as e:
        raise UnknownMessageError(f"unknown message {message_id!r}") from e

    targets = disclosures.to(sharerisk.utils.DTYPE).flatten() * level

    return _select_messages(targets, message_space).reshape(disclosures.shape)


def disclose(
    message_id: str, delta: float, message_space: sharerisk._models.MessageSpace
) -> str:
    """Degrade a message to a degree of disclosure.

    Args:
        message_id: The message to degrade.
        delta: The degree of disclosure in [0, 1].
        message_space: The space of messages that can be sent.

    Raises:
        UnknownMessageError: if the message is not part of the space.
        DisclosureRangeError: if ``delta`` is outside [0, 1].

    Returns:
        The most informative message whose information level is at most
        ``delta`` times that of the original message.
    """
    if not 0.0 <= delta <= 1.0:
        raise DisclosureRangeError(
            f"the degree of disclosure {delta} must be in [0, 1]"
        )

    deltas = sharerisk.utils.as_tensor([delta])
    idx = disclose_indices(message_id, deltas, message_space)
    return message_space.messages[int(idx[0])].id


def message_distribution(
    scenario: sharerisk._models.Scenario,
    consumer: str,
    ops: Operators | None = None,
    max_paths: int = sharerisk._constants.DEFAULT_MAX_PATHS,
    delta: float | None = None,
) -> sharerisk._models.MessageDistribution:
    """Compute the distribution over the messages a consumer may receive.

    If the scenario supplies an explicit distribution for the consumer it is returned
    as is, otherwise the distribution is the unit vector at the message obtained by
    degrading the original message to the consumer's effective disclosure.

    Args:
        scenario: The scenario.
        consumer: The consumer receiving the message.
        ops: The operators to use. By default those named by the scenario.
        max_paths: The maximum number of paths to enumerate.
        delta: An effective degree of disclosure that replaces the propagated one
            (and any explicit distribution).

    Raises:
        * MessageDistributionError
        * NoPathError
        * GraphTooDenseError
        * OperatorBoundError

    Returns:
        The message distribution.
    """
    if delta is None and consumer in scenario.message_overrides:
        x = scenario.message_overrides[consumer]

        if (
            (x < 0.0).any()
            or abs(float(x.sum()) - 1.0) > sharerisk._constants.STOCHASTIC_TOLERANCE
        ):
            raise MessageDistributionError(
                f"the message distribution of {consumer} must sum to 1"
            )

        return sharerisk._models.MessageDistribution(consumer, x)

    if delta is None:
        delta = effective_disclosure(scenario, consumer, ops, max_paths)

    message = disclose(scenario.original_message, delta, scenario.message_space)

    x = sharerisk.utils.unit_vector(
        scenario.message_space.n_messages, scenario.message_space.index(message)
    )
    return sharerisk._models.MessageDistribution(consumer, x, delta)
