import random
import typing

import networkx
import torch

import sharerisk
import sharerisk.impact

DEFAULT_MESSAGES = (
    sharerisk.Message("m1", "full", 1.0),
    sharerisk.Message("m2", "partial", 0.5),
    sharerisk.Message("none", "nothing", 0.0),
)

Edge = tuple[str, str, float, float]
"""``(source, target, forward_prob, disclosure)``"""


def random_stochastic(
    n_rows: int, n_cols: int, generator: torch.Generator | None = None
) -> torch.Tensor:
    """Returns a random column-stochastic matrix."""
    matrix = torch.rand((n_rows, n_cols), dtype=torch.float64, generator=generator)
    return matrix / matrix.sum(dim=0, keepdim=True)


def binary_risk_models(
    consumer: str,
    inference: list[list[float]],
    risk: list[list[float]],
    benefit: float = 25000.0,
    risk_values: tuple[float, float] = (10000.0, 100000.0),
) -> tuple[sharerisk.InferenceModel, sharerisk.ImpactModel]:
    inference_model = sharerisk.InferenceModel(
        consumer, ("y0", "y1"), torch.tensor(inference, dtype=torch.float64)
    )
    impact_model = sharerisk.ImpactModel.fixed_benefit(
        consumer,
        benefit,
        torch.tensor(risk, dtype=torch.float64),
        torch.tensor(risk_values, dtype=torch.float64),
    )
    return inference_model, impact_model


def make_scenario(
    edges: typing.Sequence[Edge],
    producer: str = "a0",
    consumers: typing.Sequence[str] = (),
    messages: typing.Sequence[sharerisk.Message] = DEFAULT_MESSAGES,
    inference_models: dict[str, sharerisk.InferenceModel] | None = None,
    impact_models: dict[str, sharerisk.ImpactModel] | None = None,
    **kwargs,
) -> sharerisk.Scenario:
    """Create a scenario from a list of edges. Consumers without models are given
    identity inference models and a fixed benefit."""

    agents = list(dict.fromkeys([producer, *(a for e in edges for a in e[:2])]))

    inference_models = dict(inference_models or {})
    impact_models = dict(impact_models or {})

    n_messages = len(messages)

    for consumer in consumers:
        if consumer not in inference_models:
            inference_models[consumer] = sharerisk.InferenceModel(
                consumer,
                tuple(f"y{i}" for i in range(n_messages)),
                torch.eye(n_messages, dtype=torch.float64),
            )
        if consumer not in impact_models:
            impact_models[consumer] = sharerisk.ImpactModel.fixed_benefit(
                consumer,
                1.0,
                torch.eye(n_messages, dtype=torch.float64),
                torch.arange(n_messages, dtype=torch.float64),
            )

    return sharerisk.Scenario(
        agents=tuple(agents),
        edges=tuple(sharerisk.DisclosureEdge(*edge) for edge in edges),
        message_space=sharerisk.MessageSpace(tuple(messages)),
        producer=producer,
        original_message=messages[0].id,
        inference_models=inference_models,
        impact_models=impact_models,
        **kwargs,
    )


def random_graph_edges(rng: random.Random, n_agents: int) -> list[Edge]:
    """Returns the edges of a random directed graph over agents ``a0 ... an`` in which
    ``a0`` is the producer."""

    graph = networkx.gnp_random_graph(
        n_agents, 0.4, seed=rng.randint(0, 2**31), directed=True
    )

    return [
        (f"a{i}", f"a{j}", rng.choice([1.0, rng.random()]), rng.random())
        for i, j in sorted(graph.edges)
    ]


def reachable_consumers(
    edges: typing.Sequence[Edge], producer: str = "a0"
) -> list[str]:
    graph = networkx.DiGraph([edge[:2] for edge in edges])

    if producer not in graph:
        return []

    return sorted(networkx.descendants(graph, producer))


def random_binary_case(rng: random.Random) -> sharerisk.impact.BinaryCase:
    r_a = rng.uniform(0.0, 1000.0)
    r_b = r_a + rng.uniform(1.0, 1000.0)

    return sharerisk.impact.BinaryCase(
        u_m1=rng.random(),
        u_m2=rng.random(),
        w_y0=rng.random(),
        w_y1=rng.random(),
        r_a=r_a,
        r_b=r_b,
        benefit=rng.uniform(0.0, 2000.0),
    )


def binary_scenario(case: sharerisk.impact.BinaryCase) -> sharerisk.Scenario:
    """Create a scenario in which the producer delivers ``m2`` to a consumer ``q``
    described by a binary case."""

    inference, impact = binary_risk_models(
        "q",
        [[case.u_m1, case.u_m2, 1.0], [1.0 - case.u_m1, 1.0 - case.u_m2, 0.0]],
        [[case.w_y0, case.w_y1], [1.0 - case.w_y0, 1.0 - case.w_y1]],
        case.benefit,
        (case.r_a, case.r_b),
    )
    return make_scenario(
        [("p", "q", 1.0, 0.6)],
        producer="p",
        inference_models={"q": inference},
        impact_models={"q": impact},
    )
