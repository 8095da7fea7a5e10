import dataclasses
import math
import tracemalloc

import pytest
import torch

import sharerisk
import sharerisk.impact
import sharerisk.montecarlo
import sharerisk.propagation
import sharerisk.tests.utils
import sharerisk.validation
from sharerisk.montecarlo import compare_to_analytic, oracle_compare, simulate


def _config(consumer: str, trials: int, **kwargs) -> sharerisk.SimulationConfig:
    return sharerisk.SimulationConfig(consumer=consumer, trials=trials, **kwargs)


def _within(result: float, expected: float, stderr: float, n_errors: float = 5.0):
    return abs(result - expected) <= n_errors * stderr


def test_simulate_deterministic():
    scenario = sharerisk.tests.utils.make_scenario(
        [("a0", "a1", 1.0, 1.0)], consumers=["a1"]
    )

    result = simulate(scenario, _config("a1", 1000))

    assert result.est_eb == 1.0
    assert result.est_er == 0.0
    assert result.est_ec == 1.0
    assert (result.stderr_eb, result.stderr_er, result.stderr_ec) == (0.0, 0.0, 0.0)
    assert result.empirical_x.tolist() == [1.0, 0.0, 0.0]

    comparison = compare_to_analytic(result, sharerisk.evaluate(scenario, "a1"))

    assert comparison.passed
    assert all(check.z_score == 0.0 for check in comparison.checks)


def test_simulate_single_trial(james_alec):
    result = simulate(james_alec, _config("Alec", 1))

    assert result.trials == 1
    assert result.stderr_er == 0.0
    assert sorted(result.empirical_x.tolist()) == [0.0, 0.0, 1.0]
    assert sorted(result.empirical_z.tolist()) == [0.0, 1.0]


def test_simulate_reproducible(james_alec):
    config = _config("Alec", 5000, seed=1234, block_size=512)

    result_1, result_2 = simulate(james_alec, config), simulate(james_alec, config)

    assert result_1.est_er == result_2.est_er
    assert result_1.stderr_er == result_2.stderr_er
    assert torch.equal(result_1.empirical_z, result_2.empirical_z)


def test_simulate_independent_of_workers(james_alec):
    config = _config("Alec", 5000, seed=5, block_size=700)

    serial = simulate(james_alec, config)
    threaded = simulate(james_alec, config.model_copy(update={"n_workers": 4}))

    assert serial.est_ec == threaded.est_ec
    assert torch.equal(serial.empirical_x, threaded.empirical_x)
    assert torch.equal(serial.empirical_z, threaded.empirical_z)


def test_simulate_partial_block(james_alec):
    result = simulate(james_alec, _config("James", 10, block_size=3))

    assert float(result.empirical_x.sum()) == pytest.approx(1.0)
    assert float(result.empirical_z.sum()) == pytest.approx(1.0)


@pytest.mark.parametrize("consumer", ["James", "Alec"])
def test_simulate_matches_analytic(james_alec, consumer):
    n_trials = 100_000

    result = simulate(james_alec, _config(consumer, n_trials, seed=11))
    report = sharerisk.evaluate(james_alec, consumer)

    assert result.est_eb == pytest.approx(25000.0)
    assert result.stderr_eb == 0.0

    assert _within(result.est_er, report.expected_risk, result.stderr_er)
    assert _within(result.est_ec, report.expected_net, result.stderr_ec)

    assert torch.equal(result.empirical_x, report.message_distribution)

    z_expected = sharerisk.impact.impact_distribution(
        james_alec.impact_models[consumer].risk_matrix,
        james_alec.inference_models[consumer].matrix,
        report.message_distribution,
    )
    total_variation = 0.5 * float((result.empirical_z - z_expected.z).abs().sum())

    assert total_variation <= 5.0 / math.sqrt(n_trials)


def test_simulate_stderr_scaling(james_alec):
    small = simulate(james_alec, _config("Alec", 10_000, seed=3))
    large = simulate(james_alec, _config("Alec", 40_000, seed=3))

    assert large.stderr_er / small.stderr_er == pytest.approx(0.5, abs=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("n_trials", [10_000, 100_000])
def test_simulate_stderr_scaling_decades(james_alec, n_trials):
    small = simulate(james_alec, _config("Alec", n_trials, seed=5))
    large = simulate(james_alec, _config("Alec", 10 * n_trials, seed=5))

    for attr in ["stderr_er", "stderr_ec"]:
        ratio = getattr(large, attr) / getattr(small, attr)
        assert ratio == pytest.approx(1.0 / math.sqrt(10.0), rel=0.05)


def test_simulate_detects_corrupt_inference(james_alec):
    result = simulate(james_alec, _config("Alec", 100_000, seed=7))

    inference = james_alec.inference_models["Alec"]
    corrupted = dataclasses.replace(
        inference,
        matrix=torch.tensor(
            [[0.0, 0.1, 1.0], [1.0, 0.9, 0.0]], dtype=torch.float64
        ),
    )
    scenario = dataclasses.replace(
        james_alec, inference_models={**james_alec.inference_models, "Alec": corrupted}
    )

    comparison = compare_to_analytic(result, sharerisk.evaluate(scenario, "Alec"))

    assert not comparison.passed

    checks = {check.name: check for check in comparison.checks}

    assert checks["EB"].passed
    assert not checks["ER"].passed
    assert abs(checks["ER"].z_score) > 10.0


def test_simulate_override(james_alec):
    n_trials = 50_000
    x = torch.tensor([0.2, 0.5, 0.3], dtype=torch.float64)

    scenario = dataclasses.replace(james_alec, message_overrides={"Alec": x})

    result = simulate(scenario, _config("Alec", n_trials, seed=9))
    report = sharerisk.evaluate(scenario, "Alec")

    assert report.effective_disclosure is None
    assert float((result.empirical_x - x).abs().max()) <= 5.0 / math.sqrt(n_trials)
    assert _within(result.est_er, report.expected_risk, result.stderr_er)


def test_simulate_forward_probability():
    n_trials = 20_000

    scenario = sharerisk.tests.utils.make_scenario(
        [("a0", "a1", 0.5, 1.0)], consumers=["a1"]
    )
    result = simulate(scenario, _config("a1", n_trials, seed=4))

    delivered, _, missing = result.empirical_x.tolist()

    assert delivered + missing == pytest.approx(1.0)
    assert delivered == pytest.approx(0.5, abs=5.0 * 0.5 / math.sqrt(n_trials))


def test_simulate_fuses_paths():
    scenario = sharerisk.tests.utils.make_scenario(
        [
            ("a0", "a1", 1.0, 0.9),
            ("a1", "a3", 1.0, 0.9),
            ("a0", "a2", 1.0, 0.8),
            ("a2", "a3", 1.0, 0.7),
        ],
        consumers=["a3"],
    )

    result = simulate(scenario, _config("a3", 100))
    expected = sharerisk.propagation.message_distribution(scenario, "a3")

    assert expected.x.tolist() == [0.0, 1.0, 0.0]
    assert torch.equal(result.empirical_x, expected.x)


def test_simulate_dense_graph_memory():
    agents = [f"a{i}" for i in range(8)]
    edges = [
        (source, target, 0.9, 0.9)
        for source in agents
        for target in agents
        if source != target
    ]
    scenario = sharerisk.tests.utils.make_scenario(edges, consumers=["a7"])

    n_paths = len(sharerisk.propagation.path_report(scenario, "a7").paths)
    assert n_paths == 1957

    n_trials = 2048

    tracemalloc.start()
    try:
        result = simulate(scenario, _config("a7", n_trials, block_size=n_trials))
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()

    # trials x paths x edges booleans would need over 200 MB
    assert peak < 64 * 1024**2

    assert result.trials == n_trials
    assert float(result.empirical_x.sum()) == pytest.approx(1.0)


def test_simulate_invalid_scenario(james_alec):
    inference = james_alec.inference_models["Alec"]
    broken = dataclasses.replace(
        inference,
        matrix=torch.tensor([[0.0, 0.5, 1.0], [1.0, 0.4, 0.0]], dtype=torch.float64),
    )
    scenario = dataclasses.replace(
        james_alec, inference_models={**james_alec.inference_models, "Alec": broken}
    )

    with pytest.raises(sharerisk.validation.ScenarioValidationError):
        simulate(scenario, _config("Alec", 10))


def test_compare_exact_mismatch():
    result = sharerisk.montecarlo.SimResult(
        consumer="a1",
        trials=10,
        seed=0,
        est_eb=1.0,
        est_er=0.0,
        est_ec=1.0,
        stderr_eb=0.0,
        stderr_er=0.0,
        stderr_ec=0.0,
        empirical_x=torch.tensor([1.0], dtype=torch.float64),
        empirical_z=torch.tensor([1.0], dtype=torch.float64),
        empirical_z_benefit=torch.tensor([1.0], dtype=torch.float64),
    )
    report = sharerisk.DecisionReport("a1", 1.0, 0.5, 0.5, sharerisk.Verdict.SHARE)

    comparison = compare_to_analytic(result, report)

    assert [check.passed for check in comparison.checks] == [True, False, False]
    assert comparison.checks[1].z_score == math.inf


@pytest.mark.slow
@pytest.mark.parametrize("consumer", ["James", "Alec"])
def test_oracle_compare_example(james_alec, consumer):
    comparison, result, report = oracle_compare(
        james_alec, _config(consumer, 1_000_000, seed=0, n_workers=4)
    )

    assert comparison.passed
    assert result.est_er == pytest.approx(report.expected_risk, rel=1.0e-2)


@pytest.mark.slow
def test_oracle_compare_rejects_corrupt_inference(james_alec):
    config = _config("Alec", 1_000_000, seed=1, n_workers=4)
    result = simulate(james_alec, config)

    inference = james_alec.inference_models["Alec"]
    scenario = dataclasses.replace(
        james_alec,
        inference_models={
            **james_alec.inference_models,
            "Alec": dataclasses.replace(
                inference,
                matrix=torch.tensor(
                    [[0.0, 0.55, 1.0], [1.0, 0.45, 0.0]], dtype=torch.float64
                ),
            ),
        },
    )

    assert not compare_to_analytic(result, sharerisk.evaluate(scenario, "Alec")).passed
