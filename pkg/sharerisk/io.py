"""Read and write scenario files."""

import json
import logging
import pathlib
import typing

import pydantic

import sharerisk._config
import sharerisk._constants
import sharerisk._models
import sharerisk.utils
import sharerisk.validation

_LOGGER = logging.getLogger("sharerisk.io")

EXAMPLE_SCENARIO = pathlib.Path(__file__).parent / "data" / "james_alec.json"
"""A scenario in which a producer weighs sharing a redacted report with two
consumers, one of whom it should share with and one it should not."""


class ScenarioParseError(ValueError):
    """An error raised when a scenario file is malformed."""

    def __init__(
        self, message: str, line: int | None = None, column: int | None = None
    ):
        location = "" if line is None else f" (line {line}, column {column})"
        super().__init__(f"{message}{location}")

        self.line = line
        self.column = column


def _check_rectangular(rows: list[list[float]]) -> list[list[float]]:
    if len(rows) == 0 or any(len(row) != len(rows[0]) for row in rows):
        raise ValueError("a matrix must have at least one row and rows of equal length")

    return rows


Matrix = typing.Annotated[
    list[list[float]], pydantic.AfterValidator(_check_rectangular)
]
"""A row-major matrix."""


class _FileModel(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid", populate_by_name=True)


class MessageFile(_FileModel):
    id: str
    label: str = ""
    info_level: float


class EdgeFile(_FileModel):
    source: str = pydantic.Field(..., alias="from")
    target: str = pydantic.Field(..., alias="to")

    forward_prob: float = 1.0
    disclosure: float = 1.0


class InferenceFile(_FileModel):
    labels: list[str] | None = pydantic.Field(
        None, description="The inference labels, by default ``y0``, ``y1``, ..."
    )
    matrix: Matrix


class OutcomeFile(_FileModel):
    matrix: Matrix | None = pydantic.Field(
        None,
        description="The outcome matrix. Benefits may omit it when the consumer "
        "shares its risk matrix.",
    )
    values: list[float]


class ContinuousFile(_FileModel):
    inference: sharerisk._config.DensityFamilySpec
    impact: sharerisk._config.DensityFamilySpec


class ConsumerFile(_FileModel):
    inference: InferenceFile | None = None

    benefit: OutcomeFile | None = pydantic.Field(
        None,
        description="The benefit model. By default the scenario's fixed benefit is "
        "used.",
    )
    risk: OutcomeFile | None = None

    shared_impact: bool = False

    x: list[float] | None = pydantic.Field(
        None, description="An explicit distribution over the messages received."
    )
    continuous: ContinuousFile | None = None


class OperatorsFile(_FileModel):
    serial: str = sharerisk._constants.SerialOpName.PRODUCT.value
    parallel: str = sharerisk._constants.ParallelOpName.MIN.value


class ScenarioFile(_FileModel):
    """The JSON representation of a scenario."""

    agents: list[str]
    edges: list[EdgeFile] = []

    messages: list[MessageFile]

    producer: str
    original_message: str

    benefit: float | None = pydantic.Field(
        None, description="A fixed benefit for consumers without a benefit model."
    )
    operators: OperatorsFile = OperatorsFile()

    consumers: dict[str, ConsumerFile] = {}


def _impact_model(
    consumer: str, file: ConsumerFile, benefit_scalar: float | None
) -> sharerisk._models.ImpactModel | None:
    if file.risk is None:
        if file.benefit is not None:
            raise ScenarioParseError(f"consumer {consumer} has a benefit but no risk")
        return None

    if file.risk.matrix is None:
        raise ScenarioParseError(f"consumer {consumer} has no risk matrix")

    risk_matrix = sharerisk.utils.as_tensor(file.risk.matrix)
    risk_values = sharerisk.utils.as_tensor(file.risk.values)

    if file.benefit is None:
        if benefit_scalar is None:
            raise ScenarioParseError(
                f"consumer {consumer} has no benefit and the scenario has no fixed "
                f"benefit"
            )
        return sharerisk._models.ImpactModel.fixed_benefit(
            consumer, benefit_scalar, risk_matrix, risk_values
        )

    if file.benefit.matrix is None and not file.shared_impact:
        raise ScenarioParseError(f"consumer {consumer} has no benefit matrix")

    benefit_matrix = (
        risk_matrix
        if file.benefit.matrix is None
        else sharerisk.utils.as_tensor(file.benefit.matrix)
    )

    return sharerisk._models.ImpactModel(
        consumer=consumer,
        benefit_matrix=benefit_matrix,
        risk_matrix=risk_matrix,
        benefit_values=sharerisk.utils.as_tensor(file.benefit.values),
        risk_values=risk_values,
        shared_impact=file.shared_impact,
    )


def scenario_from_file(file: ScenarioFile) -> sharerisk._models.Scenario:
    """Convert the JSON representation of a scenario into a scenario."""

    inference_models = {}
    impact_models = {}
    overrides = {}
    densities = {}

    for consumer, consumer_file in file.consumers.items():
        if consumer_file.inference is not None:
            matrix = sharerisk.utils.as_tensor(consumer_file.inference.matrix)
            labels = consumer_file.inference.labels

            inference_models[consumer] = sharerisk._models.InferenceModel(
                consumer=consumer,
                inference_labels=(
                    tuple(labels)
                    if labels is not None
                    else tuple(f"y{i}" for i in range(len(matrix)))
                ),
                matrix=matrix,
            )

        impact_model = _impact_model(consumer, consumer_file, file.benefit)

        if impact_model is not None:
            impact_models[consumer] = impact_model

        if consumer_file.x is not None:
            overrides[consumer] = sharerisk.utils.as_tensor(consumer_file.x)

        if consumer_file.continuous is not None:
            densities[consumer] = sharerisk._models.ConsumerDensities(
                inference=consumer_file.continuous.inference,
                impact=consumer_file.continuous.impact,
            )

    return sharerisk._models.Scenario(
        agents=tuple(file.agents),
        edges=tuple(
            sharerisk._models.DisclosureEdge(
                edge.source, edge.target, edge.forward_prob, edge.disclosure
            )
            for edge in file.edges
        ),
        message_space=sharerisk._models.MessageSpace(
            tuple(
                sharerisk._models.Message(message.id, message.label, message.info_level)
                for message in file.messages
            )
        ),
        producer=file.producer,
        original_message=file.original_message,
        inference_models=inference_models,
        impact_models=impact_models,
        benefit_scalar=file.benefit,
        message_overrides=overrides,
        serial_op=file.operators.serial,
        parallel_op=file.operators.parallel,
        densities=densities,
    )


def scenario_to_file(scenario: sharerisk._models.Scenario) -> ScenarioFile:
    """Convert a scenario into its JSON representation. Benefit models are always
    written out in full."""

    consumers = {}

    for consumer in dict.fromkeys([*scenario.consumers, *scenario.densities]):
        inference = scenario.inference_models.get(consumer)
        impact = scenario.impact_models.get(consumer)
        override = scenario.message_overrides.get(consumer)
        density = scenario.densities.get(consumer)

        consumers[consumer] = ConsumerFile(
            inference=(
                None
                if inference is None
                else InferenceFile(
                    labels=list(inference.inference_labels),
                    matrix=inference.matrix.tolist(),
                )
            ),
            benefit=(
                None
                if impact is None
                else OutcomeFile(
                    matrix=impact.benefit_matrix.tolist(),
                    values=impact.benefit_values.tolist(),
                )
            ),
            risk=(
                None
                if impact is None
                else OutcomeFile(
                    matrix=impact.risk_matrix.tolist(),
                    values=impact.risk_values.tolist(),
                )
            ),
            shared_impact=False if impact is None else impact.shared_impact,
            x=None if override is None else override.tolist(),
            continuous=(
                None
                if density is None
                else ContinuousFile(inference=density.inference, impact=density.impact)
            ),
        )

    return ScenarioFile(
        agents=list(scenario.agents),
        edges=[
            EdgeFile(
                source=edge.source,
                target=edge.target,
                forward_prob=edge.forward_prob,
                disclosure=edge.disclosure,
            )
            for edge in scenario.edges
        ],
        messages=[
            MessageFile(
                id=message.id, label=message.label, info_level=message.info_level
            )
            for message in scenario.message_space.messages
        ],
        producer=scenario.producer,
        original_message=scenario.original_message,
        benefit=scenario.benefit_scalar,
        operators=OperatorsFile(
            serial=scenario.serial_op, parallel=scenario.parallel_op
        ),
        consumers=consumers,
    )


def parse_scenario(text: str) -> sharerisk._models.Scenario:
    """Parse a scenario from JSON text without validating it.

    Raises:
        ScenarioParseError: if the text is not valid JSON or does not follow the
            scenario schema.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, e.lineno, e.colno) from e

    try:
        file = ScenarioFile.model_validate(data)
    except pydantic.ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in e.errors()
        )
        raise ScenarioParseError(f"invalid scenario: {details}") from e

    return scenario_from_file(file)


def load_scenario(
    path: pathlib.Path | str,
    tol: float = sharerisk._constants.STOCHASTIC_TOLERANCE,
) -> sharerisk._models.Scenario:
    """Load and validate a scenario file.

    Args:
        path: The path to the JSON file.
        tol: The tolerance used when checking that distributions sum to one.

    Raises:
        * ScenarioParseError
        * ScenarioValidationError

    Returns:
        The scenario.
    """
    path = pathlib.Path(path)

    scenario = parse_scenario(path.read_text(encoding="utf-8"))
    report = sharerisk.validation.validate_scenario(scenario, tol)

    if not report.ok:
        raise sharerisk.validation.ScenarioValidationError(report)

    _LOGGER.info(f"loaded scenario {path} with {len(scenario.consumers)} consumer(s)")
    return scenario


def save_scenario(scenario: sharerisk._models.Scenario, path: pathlib.Path | str):
    """Write a scenario to a JSON file."""

    file = scenario_to_file(scenario)

    pathlib.Path(path).write_text(
        file.model_dump_json(by_alias=True, exclude_none=True, indent=2),
        encoding="utf-8",
    )
