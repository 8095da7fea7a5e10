"""Tensor representations of information sharing scenarios and their analysis."""

import dataclasses
import typing

import networkx
import torch

import sharerisk._constants

if typing.TYPE_CHECKING:
    import sharerisk._config


@dataclasses.dataclass(frozen=True)
class Message:
    """A message that can be exchanged between agents."""

    id: str
    """The unique identifier of the message."""
    label: str
    """A human readable description of the message content."""
    info_level: float
    """The amount of information [0, 1] carried relative to the original message."""


@dataclasses.dataclass(frozen=True)
class MessageSpace:
    """The ordered space of messages, from the original message (``info_level=1``)
    down to the distinguished 'no message' entry (``info_level=0``)."""

    messages: tuple[Message, ...]
    """The messages ordered by strictly decreasing information level."""

    @property
    def n_messages(self) -> int:
        """The number of messages in the space, including the 'no message' entry."""
        return len(self.messages)

    @property
    def ids(self) -> tuple[str, ...]:
        """The ids of each message with ``length=n_messages``."""
        return tuple(message.id for message in self.messages)

    @property
    def info_levels(self) -> torch.Tensor:
        """The information level of each message with ``shape=(n_messages,)``."""
        return torch.tensor(
            [message.info_level for message in self.messages], dtype=torch.float64
        )

    @property
    def no_message(self) -> Message:
        """The entry that represents nothing being disclosed."""
        return self.messages[-1]

    def index(self, message_id: str) -> int:
        """Returns the index of a message in the space.

        Raises:
            KeyError: if the message is not part of the space.
        """
        try:
            return self.ids.index(message_id)
        except ValueError as e:
            raise KeyError(message_id) from e


@dataclasses.dataclass(frozen=True)
class DisclosureEdge:
    """A directed communication link between two agents."""

    source: str
    """The agent sending messages along this link."""
    target: str
    """The agent receiving messages along this link."""

    forward_prob: float = 1.0
    """The probability [0, 1] that ``source`` forwards what it holds to ``target``."""
    disclosure: float = 1.0
    """The degree of disclosure [0, 1] applied by ``source`` when forwarding."""


@dataclasses.dataclass(frozen=True)
class InferenceModel:
    """The producer's model of what a consumer may infer from each message."""

    consumer: str
    """The consumer being modelled."""
    inference_labels: tuple[str, ...]
    """The labels of the inferences the consumer can make with ``length=n_inferences``
    """
    matrix: torch.Tensor
    """A column-stochastic matrix whose ``(i, j)`` entry is the probability of making
    inference ``i`` given message ``j`` was received, with
    ``shape=(n_inferences, n_messages)``."""

    @property
    def n_inferences(self) -> int:
        """The number of inferences the consumer can make."""
        return self.matrix.shape[0]

    @property
    def n_messages(self) -> int:
        """The number of messages the model is conditioned on."""
        return self.matrix.shape[1]


@dataclasses.dataclass(frozen=True)
class ImpactModel:
    """The producer's model of the benefit and risk caused by each inference."""

    consumer: str
    """The consumer being modelled."""

    benefit_matrix: torch.Tensor
    """A column-stochastic matrix of benefit outcome probabilities given each
    inference with ``shape=(n_benefits, n_inferences)``."""
    risk_matrix: torch.Tensor
    """A column-stochastic matrix of risk outcome probabilities given each inference
    with ``shape=(n_risks, n_inferences)``."""

    benefit_values: torch.Tensor
    """The value of each benefit outcome with ``shape=(n_benefits,)``."""
    risk_values: torch.Tensor
    """The cost of each risk outcome with ``shape=(n_risks,)``."""

    shared_impact: bool = False
    """Whether benefit and risk outcomes share a single impact matrix, in which case
    ``benefit_matrix`` and ``risk_matrix`` are identical."""

    @classmethod
    def fixed_benefit(
        cls,
        consumer: str,
        benefit: float,
        risk_matrix: torch.Tensor,
        risk_values: torch.Tensor,
    ) -> "ImpactModel":
        """Create a model whose benefit is ``benefit`` irrespective of the inference,
        represented as a single benefit outcome reached with probability one."""

        n_inferences = risk_matrix.shape[1]

        return ImpactModel(
            consumer=consumer,
            benefit_matrix=torch.ones((1, n_inferences), dtype=torch.float64),
            risk_matrix=risk_matrix,
            benefit_values=torch.tensor([benefit], dtype=torch.float64),
            risk_values=risk_values,
        )

    @property
    def n_benefits(self) -> int:
        """The number of benefit outcomes."""
        return self.benefit_matrix.shape[0]

    @property
    def n_risks(self) -> int:
        """The number of risk outcomes."""
        return self.risk_matrix.shape[0]


@dataclasses.dataclass(frozen=True)
class ConsumerDensities:
    """Continuous inference and impact density families of a consumer."""

    inference: "sharerisk._config.DensityFamilySpec"
    """The family ``f_I(y; x)`` conditioned on the degree of disclosure."""
    impact: "sharerisk._config.DensityFamilySpec"
    """The family ``f_Z(z; y)`` conditioned on the level of inference."""


@dataclasses.dataclass(frozen=True)
class Scenario:
    """A complete information sharing problem: who talks to whom, what can be said,
    and what the producer believes each consumer will do with it."""

    agents: tuple[str, ...]
    """The ids of every agent in the communication graph."""
    edges: tuple[DisclosureEdge, ...]
    """The directed communication links between agents."""

    message_space: MessageSpace
    """The messages that can be exchanged."""

    producer: str
    """The agent deciding whether (and how much) to disclose."""
    original_message: str
    """The id of the message under assessment."""

    inference_models: dict[str, InferenceModel]
    """The inference model of each consumer of interest."""
    impact_models: dict[str, ImpactModel]
    """The impact model of each consumer of interest."""

    benefit_scalar: float | None = None
    """A fixed benefit applied to consumers that do not define their own benefit
    model."""

    message_overrides: dict[str, torch.Tensor] = dataclasses.field(
        default_factory=dict
    )
    """Explicit received message distributions with ``shape=(n_messages,)`` that
    replace the propagated distribution of a consumer."""

    serial_op: str = sharerisk._constants.SerialOpName.PRODUCT
    """The name of the operator used to discount disclosure along a path."""
    parallel_op: str = sharerisk._constants.ParallelOpName.MIN
    """The name of the operator used to fuse disclosure arriving over several paths.
    """

    densities: dict[str, ConsumerDensities] = dataclasses.field(default_factory=dict)
    """Continuous density families of each consumer, if any."""

    @property
    def consumers(self) -> tuple[str, ...]:
        """The consumers that have an inference or impact model, in definition order."""
        return tuple(
            dict.fromkeys([*self.inference_models, *self.impact_models]).keys()
        )

    def graph(self) -> networkx.DiGraph:
        """Returns the communication graph with each edge storing its
        ``forward_prob`` and ``disclosure``."""

        graph = networkx.DiGraph()
        graph.add_nodes_from(self.agents)

        for edge in self.edges:
            graph.add_edge(
                edge.source,
                edge.target,
                forward_prob=edge.forward_prob,
                disclosure=edge.disclosure,
            )

        return graph


@dataclasses.dataclass(frozen=True)
class MessageDistribution:
    """The distribution over messages a consumer may end up receiving."""

    consumer: str
    """The consumer receiving the message."""
    x: torch.Tensor
    """The probability of receiving each message with ``shape=(n_messages,)``."""

    effective_disclosure: float | None = None
    """The degree of disclosure the distribution was derived from, or ``None`` if the
    distribution was supplied explicitly."""


@dataclasses.dataclass(frozen=True)
class ImpactDistribution:
    """The distribution over impact outcomes caused by a consumer."""

    consumer: str | None
    """The consumer causing the impact."""
    z: torch.Tensor
    """The probability of each impact outcome with ``shape=(n_outcomes,)``."""


@dataclasses.dataclass(frozen=True)
class DecisionReport:
    """The expected benefit, risk and net benefit of sharing with a consumer."""

    consumer: str
    """The consumer the report was computed for."""

    expected_benefit: float
    """The expected benefit E[B]."""
    expected_risk: float
    """The expected risk E[R]."""
    expected_net: float
    """The expected net benefit E[C] = E[B] - E[R]."""

    verdict: sharerisk._constants.Verdict
    """Share iff the expected net benefit is non-negative."""

    effective_disclosure: float | None = None
    """The effective degree of disclosure reaching the consumer, or ``None`` if the
    received message distribution was supplied explicitly."""
    message_distribution: torch.Tensor | None = None
    """The received message distribution with ``shape=(n_messages,)``."""

    threshold_lhs: float | None = None
    """The left hand side of the binary share threshold, if applicable."""
    threshold_rhs: float | None = None
    """The right hand side of the binary share threshold, if applicable."""


__all__ = [
    "ConsumerDensities",
    "DecisionReport",
    "DisclosureEdge",
    "ImpactDistribution",
    "ImpactModel",
    "InferenceModel",
    "Message",
    "MessageDistribution",
    "MessageSpace",
    "Scenario",
]
