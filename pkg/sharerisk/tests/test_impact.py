import dataclasses
import random

import pytest
import torch

import sharerisk
import sharerisk.impact
import sharerisk.propagation
import sharerisk.tests.utils
from sharerisk.impact import (
    BinaryCase,
    DegenerateCaseError,
    MissingModelError,
    ModelDimensionError,
    OutOfRangeError,
    balance_q2,
    binary_case,
    binary_expected_risk,
    binary_threshold,
    evaluate,
    expected_impact,
    impact_distribution,
    sweep,
)

RISK_VALUES = torch.tensor([10000.0, 100000.0], dtype=torch.float64)

JAMES = BinaryCase(0.0, 0.1, 0.9, 0.9, 10000.0, 100000.0, 25000.0)
ALEC = BinaryCase(0.0, 0.6, 0.6, 0.4, 10000.0, 100000.0, 25000.0)


def _tensor(values) -> torch.Tensor:
    return torch.tensor(values, dtype=torch.float64)


def _random_scenario(generator: torch.Generator) -> sharerisk.Scenario:
    random_stochastic = sharerisk.tests.utils.random_stochastic

    n_inferences, n_benefits, n_risks = torch.randint(
        1, 5, (3,), generator=generator
    ).tolist()

    inference = sharerisk.InferenceModel(
        "a1",
        tuple(f"y{i}" for i in range(n_inferences)),
        random_stochastic(n_inferences, 3, generator),
    )
    impact = sharerisk.ImpactModel(
        "a1",
        benefit_matrix=random_stochastic(n_benefits, n_inferences, generator),
        risk_matrix=random_stochastic(n_risks, n_inferences, generator),
        benefit_values=100.0
        * torch.rand(n_benefits, dtype=torch.float64, generator=generator),
        risk_values=100.0
        * torch.rand(n_risks, dtype=torch.float64, generator=generator),
    )
    delta = float(torch.rand(1, dtype=torch.float64, generator=generator))

    return sharerisk.tests.utils.make_scenario(
        [("a0", "a1", 1.0, delta)],
        inference_models={"a1": inference},
        impact_models={"a1": impact},
    )


def test_impact_distribution():
    z = impact_distribution(
        _tensor([[0.6, 0.4], [0.4, 0.6]]),
        _tensor([[0.0, 0.6], [1.0, 0.4]]),
        _tensor([0.0, 1.0]),
        "Alec",
    )

    assert z.consumer == "Alec"
    assert z.z.tolist() == pytest.approx([0.52, 0.48], abs=1.0e-12)


def test_impact_distribution_identity():
    x = sharerisk.utils.unit_vector(3, 2)
    eye = torch.eye(3, dtype=torch.float64)
    z = impact_distribution(eye, eye, x)

    assert torch.equal(z.z, x)


def test_impact_distribution_sums_to_one():
    generator = torch.Generator().manual_seed(1)

    for _ in range(100):
        inference = sharerisk.tests.utils.random_stochastic(3, 4, generator)
        impact = sharerisk.tests.utils.random_stochastic(5, 3, generator)
        x = sharerisk.tests.utils.random_stochastic(4, 1, generator)[:, 0]

        z = impact_distribution(impact, inference, x)

        assert (z.z >= 0.0).all()
        assert float(z.z.sum()) == pytest.approx(1.0, abs=1.0e-9)


def test_impact_distribution_dimension_mismatch():
    with pytest.raises(ModelDimensionError, match="inference matrix of Alec"):
        impact_distribution(
            torch.eye(2), torch.eye(2), _tensor([0.0, 0.0, 1.0]), "Alec"
        )
    with pytest.raises(ModelDimensionError, match="impact matrix of Alec"):
        impact_distribution(torch.eye(3), torch.eye(2), _tensor([0.0, 1.0]), "Alec")


def test_expected_impact():
    assert expected_impact(RISK_VALUES, _tensor([0.52, 0.48])) == pytest.approx(53200.0)
    assert expected_impact(RISK_VALUES, _tensor([0.9, 0.1])) == pytest.approx(19000.0)
    assert expected_impact(RISK_VALUES, _tensor([0.0, 1.0])) == 100000.0


def test_expected_impact_length_mismatch():
    with pytest.raises(ModelDimensionError, match="3 outcome"):
        expected_impact(RISK_VALUES, _tensor([0.2, 0.3, 0.5]))


def test_evaluate_alec(james_alec):
    report = evaluate(james_alec, "Alec")

    assert report.expected_benefit == pytest.approx(25000.0, rel=1.0e-9)
    assert report.expected_risk == pytest.approx(53200.0, rel=1.0e-9)
    assert report.expected_net == pytest.approx(-28200.0, rel=1.0e-9)
    assert report.expected_net == report.expected_benefit - report.expected_risk
    assert report.verdict == sharerisk.Verdict.WITHHOLD

    assert report.effective_disclosure == pytest.approx(0.6)
    assert report.message_distribution.tolist() == [0.0, 1.0, 0.0]
    assert report.threshold_lhs == pytest.approx(75.0 / 90.0)
    assert report.threshold_rhs == pytest.approx(0.52)


def test_evaluate_james(james_alec):
    report = evaluate(james_alec, "James")

    assert report.expected_risk == pytest.approx(19000.0, rel=1.0e-9)
    assert report.expected_net == pytest.approx(6000.0, rel=1.0e-9)
    assert report.verdict == sharerisk.Verdict.SHARE
    assert report.threshold_rhs == pytest.approx(0.9)


def test_evaluate_zero_benefit(james_alec):
    inference, impact = sharerisk.tests.utils.binary_risk_models(
        "James", [[0.0, 0.1, 1.0], [1.0, 0.9, 0.0]], [[0.9, 0.9], [0.1, 0.1]], 0.0
    )
    scenario = dataclasses.replace(
        james_alec, impact_models={**james_alec.impact_models, "James": impact}
    )

    report = evaluate(scenario, "James")

    assert report.expected_net < 0.0
    assert report.verdict == sharerisk.Verdict.WITHHOLD


def test_evaluate_shares_at_zero_net():
    scenario = sharerisk.tests.utils.binary_scenario(
        BinaryCase(0.0, 0.5, 1.0, 1.0, 10.0, 20.0, 10.0)
    )

    report = evaluate(scenario, "q")

    assert report.expected_net == 0.0
    assert report.verdict == sharerisk.Verdict.SHARE


def test_evaluate_missing_model(james_alec):
    with pytest.raises(MissingModelError, match="BI does not have an inference model"):
        evaluate(james_alec, "BI")


def test_evaluate_shared_impact():
    generator = torch.Generator().manual_seed(3)

    matrix = sharerisk.tests.utils.random_stochastic(3, 2, generator)
    inference = sharerisk.InferenceModel(
        "a1", ("y0", "y1"), sharerisk.tests.utils.random_stochastic(2, 3, generator)
    )

    def scenario(shared: bool) -> sharerisk.Scenario:
        impact = sharerisk.ImpactModel(
            "a1",
            matrix,
            matrix,
            _tensor([5.0, 10.0, 20.0]),
            _tensor([1.0, 30.0, 60.0]),
            shared_impact=shared,
        )
        return sharerisk.tests.utils.make_scenario(
            [("a0", "a1", 1.0, 0.7)],
            inference_models={"a1": inference},
            impact_models={"a1": impact},
        )

    shared, separate = evaluate(scenario(True), "a1"), evaluate(scenario(False), "a1")

    assert shared.expected_benefit == pytest.approx(separate.expected_benefit)
    assert shared.expected_risk == pytest.approx(separate.expected_risk)
    assert shared.expected_net == pytest.approx(separate.expected_net)


def test_evaluate_convex_bounds():
    generator = torch.Generator().manual_seed(4)

    for _ in range(200):
        scenario = _random_scenario(generator)
        impact = scenario.impact_models["a1"]

        report = evaluate(scenario, "a1")

        tol = 1.0e-9
        assert impact.risk_values.min() - tol <= report.expected_risk
        assert report.expected_risk <= impact.risk_values.max() + tol
        assert impact.benefit_values.min() - tol <= report.expected_benefit
        assert report.expected_benefit <= impact.benefit_values.max() + tol


@pytest.mark.parametrize("scale", [0.1, 7.0, 1000.0])
def test_evaluate_scaling(scale):
    generator = torch.Generator().manual_seed(5)

    for _ in range(100):
        scenario = _random_scenario(generator)
        impact = scenario.impact_models["a1"]

        scaled_impact = dataclasses.replace(
            impact,
            benefit_values=impact.benefit_values * scale,
            risk_values=impact.risk_values * scale,
        )
        scaled = dataclasses.replace(scenario, impact_models={"a1": scaled_impact})

        report, scaled_report = evaluate(scenario, "a1"), evaluate(scaled, "a1")

        assert scaled_report.expected_benefit == pytest.approx(
            scale * report.expected_benefit, rel=1.0e-9
        )
        assert scaled_report.expected_risk == pytest.approx(
            scale * report.expected_risk, rel=1.0e-9
        )
        assert scaled_report.expected_net == pytest.approx(
            scale * report.expected_net, rel=1.0e-9, abs=1.0e-9
        )

        if abs(report.expected_net) > 1.0e-9:
            assert scaled_report.verdict == report.verdict


def test_binary_case(james_alec):
    x = sharerisk.utils.unit_vector(3, 1)

    assert binary_case(james_alec, "Alec", x) == ALEC
    assert binary_case(james_alec, "James", x) == JAMES


def test_binary_case_not_binary(james_alec):
    x = _tensor([0.5, 0.5, 0.0])
    assert binary_case(james_alec, "Alec", x) is None

    scenario = sharerisk.tests.utils.make_scenario(
        [("a0", "a1", 1.0, 1.0)], consumers=["a1"]
    )
    assert binary_case(scenario, "a1", sharerisk.utils.unit_vector(3, 0)) is None


@pytest.mark.parametrize(
    "case, expected_lhs, expected_rhs, expected_verdict",
    [
        (JAMES, 75.0 / 90.0, 0.9, sharerisk.Verdict.SHARE),
        (ALEC, 75.0 / 90.0, 0.52, sharerisk.Verdict.WITHHOLD),
        (
            dataclasses.replace(ALEC, benefit=100000.0),
            0.0,
            0.52,
            sharerisk.Verdict.SHARE,
        ),
    ],
)
def test_binary_threshold(case, expected_lhs, expected_rhs, expected_verdict):
    result = binary_threshold(case)

    assert result.lhs == pytest.approx(expected_lhs)
    assert result.rhs == pytest.approx(expected_rhs)
    assert result.verdict == expected_verdict
    assert result.benefit_covers_minimum


def test_binary_threshold_benefit_below_minimum():
    result = binary_threshold(dataclasses.replace(JAMES, benefit=5000.0))

    assert result.verdict == sharerisk.Verdict.WITHHOLD
    assert not result.benefit_covers_minimum


def test_binary_threshold_degenerate():
    with pytest.raises(DegenerateCaseError, match="must exceed"):
        binary_threshold(dataclasses.replace(JAMES, r_a=100000.0))


def test_binary_expected_risk():
    assert binary_expected_risk(ALEC) == pytest.approx(53200.0)
    assert binary_expected_risk(JAMES) == pytest.approx(19000.0)


def test_evaluate_matches_binary_threshold():
    rng = random.Random(6)

    for _ in range(500):
        case = sharerisk.tests.utils.random_binary_case(rng)

        report = evaluate(sharerisk.tests.utils.binary_scenario(case), "q")
        threshold = binary_threshold(case)

        assert report.expected_risk == pytest.approx(binary_expected_risk(case))

        if abs(report.expected_net) > 1.0e-6:
            assert report.verdict == threshold.verdict


@pytest.mark.parametrize(
    "q1, w1, w2, expected_q2, expected_feasible",
    [
        (1.0, (0.8, 0.1), (0.9, 0.4), 0.8, True),
        (1.0, (0.8, 0.7), (0.9, 0.4), 0.8, True),
        (0.2, (0.8, 0.4), (0.6, 0.4), 0.4, True),
        (0.1, (0.9, 0.9), (0.6, 0.4), 2.5, False),
    ],
)
def test_balance_q2(q1, w1, w2, expected_q2, expected_feasible):
    result = balance_q2(q1, w1, w2)

    assert result.q2 == pytest.approx(expected_q2)
    assert result.feasible == expected_feasible


def test_balance_q2_degenerate():
    with pytest.raises(DegenerateCaseError, match="does not depend on its inference"):
        balance_q2(0.5, (0.8, 0.4), (0.6, 0.6))


def test_balance_q2_invalid_probability():
    with pytest.raises(OutOfRangeError, match="must be a probability"):
        balance_q2(1.5, (0.8, 0.4), (0.6, 0.2))


def test_balance_q2_equalizes_expected_risk():
    rng = random.Random(7)
    n_feasible = 0

    for _ in range(1000):
        q1 = rng.random()
        w1 = (rng.random(), rng.random())
        w2 = (rng.random(), rng.random())

        result = balance_q2(q1, w1, w2)

        if not result.feasible:
            continue

        n_feasible += 1

        for r_a, r_b in [(10000.0, 100000.0), (1.0, 2.0), (-5.0, 300.0)]:
            risk_1 = binary_expected_risk(BinaryCase(0.0, q1, *w1, r_a, r_b, 0.0))
            case_2 = BinaryCase(0.0, result.q2, *w2, r_a, r_b, 0.0)
            risk_2 = binary_expected_risk(case_2)

            assert risk_1 == pytest.approx(risk_2, abs=1.0e-9 * max(1.0, abs(r_b)))

    assert n_feasible > 0


def test_sweep_endpoints(james_alec):
    rows = sweep(james_alec, "James", [0.0, 1.0])

    assert [row.effective_disclosure for row in rows] == [0.0, 1.0]
    assert rows[0].message_distribution.tolist() == [0.0, 0.0, 1.0]
    assert rows[1].message_distribution.tolist() == [1.0, 0.0, 0.0]

    for row in rows:
        assert row.expected_benefit == pytest.approx(25000.0)
        assert row.expected_risk == pytest.approx(19000.0)


def test_sweep_reproduces_evaluation(james_alec):
    for consumer in ("James", "Alec"):
        (row,) = sweep(james_alec, consumer, [0.5])
        report = evaluate(james_alec, consumer)

        assert row.expected_risk == pytest.approx(report.expected_risk)
        assert row.verdict == report.verdict


def test_sweep_grid(james_alec):
    rows = sweep(james_alec, "Alec", sharerisk.impact.sweep_grid(11))

    deltas = [row.effective_disclosure for row in rows]

    assert len(rows) == 11
    assert deltas == sorted(deltas)
    assert deltas[0] == 0.0 and deltas[-1] == 1.0


def test_sweep_invalid_grid(james_alec):
    with pytest.raises(sharerisk.propagation.DisclosureRangeError):
        sweep(james_alec, "Alec", [0.5, 1.1])
