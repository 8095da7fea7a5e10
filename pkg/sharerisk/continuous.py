"""Risk densities over a continuum of inferences and impacts, tabulated on uniform
grids over [0, 1] and integrated with the composite trapezoid rule."""

import dataclasses
import logging
import typing

import torch

import sharerisk._config
import sharerisk._constants
import sharerisk._models
import sharerisk.impact
import sharerisk.propagation
import sharerisk.utils

_LOGGER = logging.getLogger("sharerisk.continuous")


class GridMismatchError(ValueError):
    """An error raised when densities are not tabulated on the same grid."""


class InvalidDensityError(ValueError):
    """An error raised when a density family cannot be tabulated."""


@dataclasses.dataclass(frozen=True)
class GridDensity:
    """A density on [0, 1] sampled at uniformly spaced points."""

    values: torch.Tensor
    """The density at each grid point with ``shape=(n_intervals + 1,)``."""

    drift: float = 0.0
    """How far the integral of the density drifted from one before it was
    renormalized, or zero if it was not."""

    @property
    def n_intervals(self) -> int:
        """The number of grid intervals."""
        return len(self.values) - 1

    @property
    def grid(self) -> torch.Tensor:
        """The sample points with ``shape=(n_intervals + 1,)``."""
        return sharerisk.utils.uniform_grid(self.n_intervals)

    def integral(self) -> float:
        """The trapezoid integral of the density over [0, 1]."""
        return float(sharerisk.utils.trapezoid(self.values))

    def cdf(self) -> torch.Tensor:
        """The cumulative trapezoid integral at each grid point."""
        areas = torch.cumulative_trapezoid(self.values, dx=1.0 / self.n_intervals)
        return torch.cat([areas.new_zeros(1), areas])


@dataclasses.dataclass(frozen=True)
class ConditionalDensityFamily:
    """A family of densities on [0, 1] conditioned on a value in [0, 1].

    Members are tabulated at uniformly spaced conditioning values and linearly
    interpolated in between.
    """

    values: torch.Tensor
    """The tabulated densities with ``shape=(n_conditions, n_points)``, where row
    ``i`` is the member at the ``i``-th of ``n_conditions`` uniformly spaced
    conditioning values. A single row is a family that ignores its condition."""

    @property
    def n_points(self) -> int:
        """The number of points each member is sampled at."""
        return self.values.shape[1]

    @property
    def n_conditions(self) -> int:
        """The number of tabulated conditioning values."""
        return self.values.shape[0]

    def rows(self, conditions: torch.Tensor) -> torch.Tensor:
        """Interpolate the members at conditioning values.

        Args:
            conditions: The conditioning values with ``shape=(n,)``.

        Returns:
            The members with ``shape=(n, n_points)``.
        """
        conditions = conditions.to(sharerisk.utils.DTYPE)

        if self.n_conditions == 1:
            return self.values.expand(len(conditions), -1)

        position = conditions.clamp(0.0, 1.0) * (self.n_conditions - 1)

        lower = position.floor().long().clamp(max=self.n_conditions - 2)
        fraction = (position - lower)[:, None]

        return (1.0 - fraction) * self.values[lower] + fraction * self.values[lower + 1]

    def at(self, condition: float) -> GridDensity:
        """Returns the member at a single conditioning value."""
        return GridDensity(self.rows(sharerisk.utils.as_tensor([condition]))[0])


def _normalize_rows(values: torch.Tensor, form: str) -> torch.Tensor:
    integrals = sharerisk.utils.trapezoid(values)

    if (integrals <= 0.0).any():
        raise InvalidDensityError(f"a {form} density has no mass on the grid")

    return values / integrals[:, None]


def triangular_rows(
    centers: torch.Tensor, widths: torch.Tensor, n_intervals: int
) -> torch.Tensor:
    """Tabulate triangular densities normalized on a grid.

    Args:
        centers: The mode of each density with ``shape=(n,)``.
        widths: The half-width of each density with ``shape=(n,)``.
        n_intervals: The number of grid intervals.

    Returns:
        The densities with ``shape=(n, n_intervals + 1)``.
    """
    if (widths <= 0.0).any():
        raise InvalidDensityError("a triangular density must have a positive width")

    w = sharerisk.utils.uniform_grid(n_intervals)
    values = (1.0 - (w[None, :] - centers[:, None]).abs() / widths[:, None]).clamp(
        min=0.0
    )

    return _normalize_rows(values, "triangular")


def triangular_density(center: float, width: float, n_intervals: int) -> GridDensity:
    """A triangular density with a given mode and half-width, normalized on the
    grid. Narrow triangles approximate a point mass at ``center``."""
    rows = triangular_rows(
        sharerisk.utils.as_tensor([center]),
        sharerisk.utils.as_tensor([width]),
        n_intervals,
    )
    return GridDensity(rows[0])


def _affine(
    coefficients: tuple[float, float], conditions: torch.Tensor
) -> torch.Tensor:
    return coefficients[0] + coefficients[1] * conditions


def build_family(
    spec: sharerisk._config.DensityFamilySpec, n_intervals: int
) -> ConditionalDensityFamily:
    """Tabulate a density family on a uniform grid.

    Args:
        spec: The family definition.
        n_intervals: The number of intervals of both the density grid and the
            conditioning grid.

    Raises:
        GridMismatchError: if a ``grid`` family is not sampled at ``n_intervals + 1``
            points.

    Returns:
        The tabulated family.
    """
    conditions = sharerisk.utils.uniform_grid(n_intervals)
    w = sharerisk.utils.uniform_grid(n_intervals)

    if spec.form == "uniform":
        return ConditionalDensityFamily(torch.ones((1, n_intervals + 1), dtype=w.dtype))

    if spec.form == "triangular":
        values = triangular_rows(
            _affine(spec.center, conditions),
            _affine(spec.width, conditions),
            n_intervals,
        )
        return ConditionalDensityFamily(values)

    if spec.form == "beta":
        a, b = _affine(spec.a, conditions), _affine(spec.b, conditions)

        if (a < 0.0).any() or (b < 0.0).any():
            raise InvalidDensityError(
                "the exponents of a beta density must be non-negative"
            )

        values = w[None, :] ** a[:, None] * (1.0 - w[None, :]) ** b[:, None]
        return ConditionalDensityFamily(_normalize_rows(values, "beta"))

    values = sharerisk.utils.as_tensor(spec.values)

    if values.ndim != 2 or values.shape[1] != n_intervals + 1:
        raise GridMismatchError(
            f"a grid family with {values.shape[-1]} points per row does not match a "
            f"grid of {n_intervals} intervals"
        )
    if (values < 0.0).any() or not torch.isfinite(values).all():
        raise InvalidDensityError("a grid density must be finite and non-negative")

    integrals = sharerisk.utils.trapezoid(values)
    drift = (integrals - 1.0).abs().max()

    if drift > sharerisk._constants.DENSITY_TOLERANCE:
        _LOGGER.warning(f"renormalizing a grid family whose integrals drift by {drift}")
        values = _normalize_rows(values, "grid")

    return ConditionalDensityFamily(values)


def consumer_families(
    scenario: sharerisk._models.Scenario, consumer: str, n_intervals: int
) -> tuple[ConditionalDensityFamily, ConditionalDensityFamily]:
    """Tabulate the impact and inference families of a consumer.

    Raises:
        MissingModelError: if the consumer does not define density families.

    Returns:
        The impact family ``f_Z(z; y)`` and inference family ``f_I(y; x)``.
    """
    if consumer not in scenario.densities:
        raise sharerisk.impact.MissingModelError(
            f"{consumer} does not define density families"
        )

    densities = scenario.densities[consumer]

    return (
        build_family(densities.impact, n_intervals),
        build_family(densities.inference, n_intervals),
    )


def risk_density(
    impact_family: ConditionalDensityFamily,
    inference_family: ConditionalDensityFamily,
    x: float,
    drift_tolerance: float = sharerisk._constants.DENSITY_TOLERANCE,
) -> GridDensity:
    """Compute the density of the impact caused by a consumer that receives a message
    with degree of disclosure ``x``, ``f(z; x) = int f_Z(z; y) f_I(y; x) dy``.

    Args:
        impact_family: The impact family ``f_Z(z; y)``.
        inference_family: The inference family ``f_I(y; x)``.
        x: The degree of disclosure.
        drift_tolerance: The output is renormalized if its integral drifts from one
            by more than this.

    Raises:
        GridMismatchError: if the families are sampled at a different number of
            points.

    Returns:
        The risk density.
    """
    if impact_family.n_points != inference_family.n_points:
        raise GridMismatchError(
            f"the impact family has {impact_family.n_points} points but the inference "
            f"family has {inference_family.n_points}"
        )
    if not 0.0 <= x <= 1.0:
        raise sharerisk.propagation.DisclosureRangeError(
            f"the degree of disclosure {x} must be in [0, 1]"
        )

    n_intervals = inference_family.n_points - 1

    y = sharerisk.utils.uniform_grid(n_intervals)

    f_inference = inference_family.at(x).values
    f_impact = impact_family.rows(y)

    values = sharerisk.utils.trapezoid(f_impact * f_inference[:, None], dim=0)

    drift = float(sharerisk.utils.trapezoid(values)) - 1.0

    if abs(drift) <= drift_tolerance:
        return GridDensity(values)

    _LOGGER.warning(f"renormalizing a risk density whose integral drifts by {drift}")
    return GridDensity(values / (1.0 + drift), drift)


def descriptor(
    h: typing.Callable[[torch.Tensor], torch.Tensor | float],
    density: GridDensity,
) -> float:
    """Summarize a density by the integral ``int h(w) f(w) dw``.

    Args:
        h: The weighting function, evaluated on a tensor of grid points.
        density: The density.

    Returns:
        The descriptor.
    """
    grid = density.grid
    weights = torch.broadcast_to(sharerisk.utils.as_tensor(h(grid)), grid.shape)

    if not torch.isfinite(weights).all():
        raise ValueError("the weighting function must be finite on the grid")

    return float(sharerisk.utils.trapezoid(weights * density.values))


def mean(density: GridDensity) -> float:
    """The mean of a density."""
    return descriptor(lambda w: w, density)


def equal_impact_residual(
    impact_family_1: ConditionalDensityFamily,
    inference_family_1: ConditionalDensityFamily,
    x1: float,
    impact_family_2: ConditionalDensityFamily,
    inference_family_2: ConditionalDensityFamily,
    x2: float,
) -> float:
    """The difference between the mean impacts of two consumers receiving messages
    with degrees of disclosure ``x1`` and ``x2`` respectively."""
    return mean(risk_density(impact_family_1, inference_family_1, x1)) - mean(
        risk_density(impact_family_2, inference_family_2, x2)
    )


def solve_matching_disclosure(
    impact_family_1: ConditionalDensityFamily,
    inference_family_1: ConditionalDensityFamily,
    x1: float,
    impact_family_2: ConditionalDensityFamily,
    inference_family_2: ConditionalDensityFamily,
    config: sharerisk._config.ContinuousConfig | None = None,
) -> float | None:
    """Find the degree of disclosure ``x2`` at which consumer two presents the same
    mean impact as consumer one does at ``x1``, using bisection.

    Args:
        impact_family_1: The impact family of consumer one.
        inference_family_1: The inference family of consumer one.
        x1: The degree of disclosure of consumer one.
        impact_family_2: The impact family of consumer two.
        inference_family_2: The inference family of consumer two.
        config: The root finding tolerances.

    Returns:
        The matching degree of disclosure, or ``None`` if the residual has the same
        sign at both ``x2 = 0`` and ``x2 = 1``.
    """
    config = config if config is not None else sharerisk._config.ContinuousConfig()
    tolerance = config.root_tolerance

    target = mean(risk_density(impact_family_1, inference_family_1, x1))

    def residual(x2: float) -> float:
        return target - mean(risk_density(impact_family_2, inference_family_2, x2))

    lower, upper = 0.0, 1.0
    residual_lower, residual_upper = residual(lower), residual(upper)

    if abs(residual_lower) <= tolerance and abs(residual_upper) > tolerance:
        return lower
    if abs(residual_upper) <= tolerance and abs(residual_lower) > tolerance:
        return upper
    if residual_lower * residual_upper > 0.0:
        return None

    midpoint = 0.5 * (lower + upper)

    for iteration in range(config.max_iterations):
        midpoint = 0.5 * (lower + upper)
        residual_midpoint = residual(midpoint)

        if residual_midpoint == 0.0 or (
            abs(residual_midpoint) <= tolerance and 0.5 * (upper - lower) <= tolerance
        ):
            _LOGGER.info(f"bisection converged after {iteration + 1} iterations")
            return midpoint

        if (residual_lower < 0.0) == (residual_midpoint < 0.0):
            lower, residual_lower = midpoint, residual_midpoint
        else:
            upper = midpoint

    _LOGGER.warning(f"bisection did not converge in {config.max_iterations} iterations")
    return midpoint


def distribution_mismatch(
    impact_family_1: ConditionalDensityFamily,
    inference_family_1: ConditionalDensityFamily,
    x1: float,
    impact_family_2: ConditionalDensityFamily,
    inference_family_2: ConditionalDensityFamily,
    x2: float,
) -> float:
    """The largest absolute difference between the risk CDFs of two consumers.

    Equal mean impact does not imply equal risk distributions; this reports how far
    apart they are.
    """
    cdf_1 = risk_density(impact_family_1, inference_family_1, x1).cdf()
    cdf_2 = risk_density(impact_family_2, inference_family_2, x2).cdf()

    if cdf_1.shape != cdf_2.shape:
        raise GridMismatchError("the consumers' densities use different grids")

    return float((cdf_1 - cdf_2).abs().max())
