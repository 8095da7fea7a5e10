"""General utility functions"""

import typing

import torch

_size = int | torch.Size | list[int] | tuple[int, ...]

DTYPE = torch.float64
"""The dtype used for every probability and value tensor."""


def as_tensor(data: typing.Any) -> torch.Tensor:
    """Create a ``float64`` tensor from nested lists, numbers or another tensor."""

    if isinstance(data, torch.Tensor):
        return data.clone().detach().to(DTYPE)

    return torch.tensor(data, dtype=DTYPE)


def ones_like(size: _size, other: torch.Tensor) -> torch.Tensor:
    """Create a tensor of ones with the same device and type as another tensor."""
    return torch.ones(size, dtype=other.dtype, device=other.device)


def zeros_like(size: _size, other: torch.Tensor) -> torch.Tensor:
    """Create a tensor of zeros with the same device and type as another tensor."""
    return torch.zeros(size, dtype=other.dtype, device=other.device)


def unit_vector(size: int, idx: int) -> torch.Tensor:
    """Create a ``float64`` vector whose ``idx``-th entry is one and others zero."""

    vector = torch.zeros(size, dtype=DTYPE)
    vector[idx] = 1.0

    return vector


def uniform_grid(n_intervals: int) -> torch.Tensor:
    """Returns ``n_intervals + 1`` uniformly spaced points on [0, 1]."""

    if n_intervals < 1:
        raise ValueError("a grid requires at least one interval")

    return torch.linspace(0.0, 1.0, n_intervals + 1, dtype=DTYPE)


def trapezoid(values: torch.Tensor, dim: int = -1) -> torch.Tensor:
    """Integrate values sampled on a uniform grid on [0, 1] using the composite
    trapezoid rule.

    Args:
        values: The sampled values, where ``values.shape[dim]`` is the number of grid
            points.
        dim: The dimension to integrate over.

    Returns:
        The integral with ``dim`` removed.
    """

    return torch.trapezoid(values, dx=1.0 / (values.shape[dim] - 1), dim=dim)
