"""Configuration of the propagation, simulation and quadrature engines."""

import typing

import pydantic

import sharerisk._constants
import sharerisk.propagation

BaseModel = pydantic.BaseModel


def _to_affine(value: typing.Any) -> typing.Any:
    """Coerce a bare number into the ``(c0, c1)`` coefficients of ``c0 + c1 * c``."""
    if isinstance(value, (int, float)):
        return (float(value), 0.0)

    return value


Affine = typing.Annotated[tuple[float, float], pydantic.BeforeValidator(_to_affine)]
"""Coefficients ``(c0, c1)`` of a parameter that varies as ``c0 + c1 * c`` with the
conditioning value ``c``."""


class PropagationConfig(BaseModel):
    """Configure how disclosure is propagated through a communication graph."""

    serial: str = pydantic.Field(
        sharerisk._constants.SerialOpName.PRODUCT.value,
        description="The name of the operator used to discount the degree of "
        "disclosure along a path.",
    )
    parallel: str = pydantic.Field(
        sharerisk._constants.ParallelOpName.MIN.value,
        description="The name of the operator used to fuse the degrees of disclosure "
        "arriving over different paths.",
    )

    max_paths: int = pydantic.Field(
        sharerisk._constants.DEFAULT_MAX_PATHS,
        description="The maximum number of simple paths to enumerate between the "
        "producer and a consumer before the graph is considered too dense.",
        ge=1,
    )

    def operators(self) -> sharerisk.propagation.Operators:
        """Resolve the named operators using the operator registry."""
        return sharerisk.propagation.Operators(
            sharerisk.propagation.get_serial_op(self.serial),
            sharerisk.propagation.get_parallel_op(self.parallel),
        )


class ValidationConfig(BaseModel):
    """Configure how scenarios are validated."""

    tolerance: float = pydantic.Field(
        sharerisk._constants.STOCHASTIC_TOLERANCE,
        description="The tolerance allowed when checking that each column of a "
        "stochastic matrix (or a distribution vector) sums to one.",
        gt=0.0,
    )


class SimulationConfig(BaseModel):
    """Configure a Monte Carlo simulation of message propagation and its impact."""

    trials: int = pydantic.Field(
        1_000_000, description="The number of independent trials to sample.", ge=1
    )
    seed: int = pydantic.Field(
        0,
        description="The seed of the random streams. Trials are split into blocks of "
        "``block_size`` and block ``b`` draws from ``SeedSequence(seed, "
        "spawn_key=(b,))``.",
        ge=0,
        lt=2**64,
    )
    consumer: str = pydantic.Field(..., description="The consumer to simulate.")

    block_size: int = pydantic.Field(
        65_536,
        description="The number of trials sampled from each random stream.",
        ge=1,
    )
    n_workers: int = pydantic.Field(
        1,
        description="The number of threads used to sample blocks. The result does not "
        "depend on this value.",
        ge=1,
    )


class ContinuousConfig(BaseModel):
    """Configure the quadrature and root finding of the continuous engine."""

    grid_n: int = pydantic.Field(
        sharerisk._constants.DEFAULT_GRID_N,
        description="The number of uniform intervals used to tabulate densities on "
        "[0, 1].",
        ge=2,
    )
    drift_tolerance: float = pydantic.Field(
        sharerisk._constants.DENSITY_TOLERANCE,
        description="Convolved densities whose integral drifts from one by more than "
        "this are renormalized.",
        gt=0.0,
    )

    root_tolerance: float = pydantic.Field(
        1.0e-6,
        description="Bisection stops once the equal impact residual is within this "
        "tolerance.",
        gt=0.0,
    )
    max_iterations: int = pydantic.Field(
        100, description="The maximum number of bisection iterations.", ge=1
    )


class DensityFamilySpec(BaseModel):
    """A family of densities on [0, 1] conditioned on a value ``c`` in [0, 1].

    Parametric forms take each parameter as ``c0 + c1 * c`` (a bare number means a
    constant). ``grid`` families instead provide raw rows of density values, one row
    per conditioning grid point.
    """

    form: typing.Literal["uniform", "triangular", "beta", "grid"] = pydantic.Field(
        ..., description="The functional form of each member of the family."
    )

    center: Affine = pydantic.Field(
        (0.5, 0.0), description="The mode of a triangular density."
    )
    width: Affine = pydantic.Field(
        (0.5, 0.0), description="The half-width of a triangular density."
    )

    a: Affine = pydantic.Field(
        (0.0, 0.0), description="The exponent of ``w`` in a beta-shaped density."
    )
    b: Affine = pydantic.Field(
        (0.0, 0.0), description="The exponent of ``1 - w`` in a beta-shaped density."
    )

    values: list[list[float]] | None = pydantic.Field(
        None,
        description="The tabulated densities of a ``grid`` family with "
        "``shape=(n_conditions, n_points)``.",
    )

    @pydantic.model_validator(mode="after")
    def _check_grid_values(self) -> "DensityFamilySpec":
        if self.form == "grid" and self.values is None:
            raise ValueError("a grid family requires values")

        return self
