import numpy
import pytest
import scipy.integrate
import torch

import sharerisk.utils


def test_as_tensor():
    tensor = sharerisk.utils.as_tensor([[1, 2], [3, 4]])

    assert tensor.dtype == torch.float64
    assert tensor.shape == (2, 2)


def test_as_tensor_copies():
    original = torch.tensor([1.0, 2.0], dtype=torch.float32)

    tensor = sharerisk.utils.as_tensor(original)
    tensor[0] = 5.0

    assert tensor.dtype == torch.float64
    assert original[0] == 1.0


def test_unit_vector():
    vector = sharerisk.utils.unit_vector(3, 1)
    assert torch.equal(vector, torch.tensor([0.0, 1.0, 0.0], dtype=torch.float64))


def test_uniform_grid():
    grid = sharerisk.utils.uniform_grid(4)

    assert torch.allclose(
        grid, torch.tensor([0.0, 0.25, 0.5, 0.75, 1.0], dtype=torch.float64)
    )


def test_uniform_grid_invalid():
    with pytest.raises(ValueError, match="at least one interval"):
        sharerisk.utils.uniform_grid(0)


@pytest.mark.parametrize("n_intervals", [1, 16, 255])
def test_trapezoid_matches_scipy(n_intervals):
    grid = sharerisk.utils.uniform_grid(n_intervals)
    values = torch.exp(-3.0 * grid) * torch.cos(5.0 * grid)

    expected = scipy.integrate.trapezoid(values.numpy(), grid.numpy())
    actual = sharerisk.utils.trapezoid(values)

    assert numpy.isclose(float(actual), expected, atol=1.0e-12)


def test_trapezoid_dim():
    grid = sharerisk.utils.uniform_grid(8)
    values = torch.stack([torch.ones_like(grid), 2.0 * grid])

    assert torch.allclose(
        sharerisk.utils.trapezoid(values, dim=-1),
        torch.tensor([1.0, 1.0], dtype=torch.float64),
    )
    assert sharerisk.utils.trapezoid(values.T, dim=0).shape == (2,)
