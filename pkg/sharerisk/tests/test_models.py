import pytest
import torch

import sharerisk
import sharerisk.tests.utils


def test_message_space():
    space = sharerisk.MessageSpace(sharerisk.tests.utils.DEFAULT_MESSAGES)

    assert space.n_messages == 3
    assert space.ids == ("m1", "m2", "none")
    assert space.no_message.id == "none"
    assert torch.equal(
        space.info_levels, torch.tensor([1.0, 0.5, 0.0], dtype=torch.float64)
    )
    assert space.index("m2") == 1


def test_message_space_unknown():
    space = sharerisk.MessageSpace(sharerisk.tests.utils.DEFAULT_MESSAGES)

    with pytest.raises(KeyError, match="m3"):
        space.index("m3")


def test_impact_model_fixed_benefit():
    model = sharerisk.ImpactModel.fixed_benefit(
        "q",
        25000.0,
        torch.tensor([[0.6, 0.4], [0.4, 0.6]], dtype=torch.float64),
        torch.tensor([10000.0, 100000.0], dtype=torch.float64),
    )

    assert model.n_benefits == 1
    assert model.n_risks == 2
    assert torch.equal(model.benefit_matrix, torch.ones((1, 2), dtype=torch.float64))
    assert model.benefit_values.tolist() == [25000.0]
    assert not model.shared_impact


def test_scenario_consumers_in_definition_order(james_alec):
    assert james_alec.consumers == ("James", "Alec")


def test_scenario_graph(james_alec):
    graph = james_alec.graph()

    assert sorted(graph.nodes) == ["Alec", "BI", "James"]
    assert graph.edges["BI", "Alec"] == {"forward_prob": 1.0, "disclosure": 0.6}


def test_scenario_is_frozen(james_alec):
    with pytest.raises(AttributeError):
        james_alec.producer = "James"
