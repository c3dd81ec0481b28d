import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hardy_disc.disc import (
    AngleGrid,
    CircleFunction,
    DiskField,
    GridMismatchError,
    PolarGrid,
    analytic_completion,
    analytic_part,
    area_integral,
    boundary_integral,
    harmonic_extension,
    laplacian,
    poisson_kernel,
    radial_boundary_derivative,
)


def test_angle_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        AngleGrid(100)
    with pytest.raises(ValueError):
        AngleGrid(4)
    g = AngleGrid(16)
    assert g.theta[0] == 0.0
    assert np.isclose(g.spacing, 2 * np.pi / 16)


def test_poisson_kernel_matches_quadrature_mean():
    # int P dnu = 1 and P(r, t, t) = (1 + r) / (1 - r)
    val, _ = quad(lambda s: poisson_kernel(0.7, 0.3, s), 0, 2 * np.pi, limit=200)
    assert abs(val / (2 * np.pi) - 1.0) < 1e-10
    assert np.isclose(poisson_kernel(0.5, 1.0, 1.0), 3.0)
    with pytest.raises(ValueError):
        poisson_kernel(1.0, 0.0, 0.0)


def test_boundary_integral_of_trig_polynomial():
    g = AngleGrid(64)
    f = CircleFunction.from_function(g, lambda t: 3 + np.cos(t) + np.sin(5 * t))
    assert abs(boundary_integral(f) - 3.0) < 1e-14


def test_coefficients_round_trip():
    g = AngleGrid(32)
    f = CircleFunction.from_coefficients(g, {0: 1.0, 2: 0.5j, -3: 2.0})
    assert np.isclose(f.coefficient(2), 0.5j)
    assert np.isclose(f.coefficient(-3), 2.0)
    assert abs(f.coefficient(1)) < 1e-15


def test_trig_interpolation_is_exact_for_band_limited_data():
    g = AngleGrid(32)
    f = CircleFunction.from_function(g, lambda t: np.cos(3 * t) - 0.5 * np.sin(7 * t))
    s = np.linspace(0, 2 * np.pi, 17)
    assert np.max(np.abs(f.evaluate(s) - (np.cos(3 * s) - 0.5 * np.sin(7 * s)))) < 1e-13


def test_spectral_derivative():
    g = AngleGrid(64)
    f = CircleFunction.from_function(g, lambda t: np.exp(np.sin(t)))
    d = f.derivative()
    assert np.max(np.abs(d.values - np.cos(g.theta) * np.exp(np.sin(g.theta)))) < 1e-12


def test_grid_mismatch():
    a = CircleFunction.constant(AngleGrid(16), 1.0)
    b = CircleFunction.constant(AngleGrid(32), 1.0)
    with pytest.raises(GridMismatchError):
        a + b


def test_harmonic_extension_of_cosine():
    grid = PolarGrid(16, 32)
    h = harmonic_extension(CircleFunction.from_function(grid.angle_grid, np.cos), grid)
    r, t = grid.radii[:, None], grid.theta[None, :]
    assert np.max(np.abs(h.values - r * np.cos(t))) < 1e-14
    assert abs(h.center) < 1e-15


def test_harmonic_extension_constant():
    grid = PolarGrid(8, 16)
    h = harmonic_extension(CircleFunction.constant(grid.angle_grid, 2.5), grid)
    assert np.allclose(h.full(), 2.5)


def test_laplacian_of_r4_second_order():
    errs = []
    for n in (16, 32, 64):
        grid = PolarGrid(n, 16)
        f = DiskField.from_function(grid, lambda r, t: r ** 4 + 0 * t)
        lap = laplacian(f)
        errs.append(np.max(np.abs(lap.values[:-1] - 16 * grid.radii[:-1, None] ** 2)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_laplacian_exact_on_quadratics():
    grid = PolarGrid(32, 32)
    f = DiskField.from_function(grid, lambda r, t: r ** 2 * np.cos(2 * t) + r ** 2)
    lap = laplacian(f)
    assert np.max(np.abs(lap.full()[:-1] - 4.0)) < 1e-9


def test_area_integral_unit_riesz_mass():
    grid = PolarGrid(64, 32)
    u = DiskField.from_function(grid, lambda r, t: 0.5 * (r ** 2 - 1) + 0 * t)
    assert abs(area_integral(laplacian(u), True) - 1.0) < 1e-10
    one = DiskField.constant(grid, 1.0)
    assert abs(area_integral(one) - np.pi) < 1e-12


def test_radial_boundary_derivative():
    grid = PolarGrid(64, 16)
    u = DiskField.from_function(grid, lambda r, t: 0.5 * (r ** 2 - 1) + 0 * t)
    assert np.allclose(radial_boundary_derivative(u).values, 1.0, atol=1e-12)


def test_analytic_completion_cos():
    g = AngleGrid(32)
    c = analytic_completion(CircleFunction.from_function(g, np.cos))
    assert np.max(np.abs(c.values - np.exp(1j * g.theta))) < 1e-14
    with pytest.raises(TypeError):
        analytic_completion(c)


def test_analytic_part_drops_negative_frequencies():
    g = AngleGrid(32)
    f = CircleFunction.from_coefficients(g, {-2: 1.0, 0: 0.5, 3: 2.0})
    a = analytic_part(f)
    assert np.isclose(a.coefficient(3), 2.0)
    assert abs(a.coefficient(-2)) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_completion_real_part_is_identity(coeffs):
    g = AngleGrid(32)
    t = g.theta
    f = CircleFunction(g, coeffs[0] + coeffs[1] * np.cos(t) + coeffs[2] * np.sin(2 * t)
                       + coeffs[3] * np.cos(5 * t) + coeffs[4] * np.sin(7 * t))
    c = analytic_completion(f)
    assert np.max(np.abs(c.values.real - f.values)) < 1e-12
    # imaginary part is mean zero
    assert abs(boundary_integral(c.imag())) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 6), st.floats(-1, 1))
def test_harmonic_extension_is_discretely_harmonic(m, a):
    grid = PolarGrid(64, 32)
    bf = CircleFunction.from_function(grid.angle_grid, lambda t: a * np.cos(m * t) + 1)
    h = harmonic_extension(bf, grid)
    assert np.max(np.abs(laplacian(h).values[:-1])) < 0.05 * (1 + m ** 2)
