import numpy as np
import pytest

from hardy_disc.demailly import (
    LevelSetError,
    demailly_pairing,
    dlj_rhs,
    evaluate_field,
    level_set,
    majorant_norm,
    majorant_norm_boundary,
    monotone_chain,
    shu_norm,
    whole_disk_norm,
)
from hardy_disc.disc import CircleFunction, DiskField, PolarGrid
from hardy_disc.exhaustion import (
    construct_biharmonic,
    construct_exhaustion_c2,
    custom_exhaustion,
    green_exhaustion,
)


def _v_r2(grid):
    return DiskField.from_function(grid, lambda r, t: r ** 2 + 0 * t, center=0.0), DiskField.constant(grid, 4.0)


def _biharmonic(n, psi=lambda t: np.exp(2 - 2 * np.cos(t))):
    grid = PolarGrid(n, n)
    return construct_biharmonic(CircleFunction.from_function(grid.angle_grid, psi), grid=grid)


@pytest.mark.parametrize("c", [-1.5, -1.0, -0.5, -0.1])
def test_green_level_sets(c):
    e = green_exhaustion(PolarGrid(64, 64))
    ls = level_set(e, c)
    assert ls.radius == pytest.approx(np.exp(c), abs=1e-15)
    assert abs(ls.mass - 1.0) < 1e-14
    assert np.allclose(ls.weights, 1 / 64)
    assert np.allclose(np.abs(ls.contour), np.exp(c))


@pytest.mark.parametrize("c", [-1.5, -1.0, -0.5, -0.1])
def test_green_dlj_closed_form(c):
    e = green_exhaustion(PolarGrid(128, 64))
    v, lap_v = _v_r2(e.grid)
    assert abs(demailly_pairing(e, c, v) - np.exp(2 * c)) < 1e-12
    assert abs(dlj_rhs(e, c, v, lap_v) - np.exp(2 * c)) < 1e-10


def test_radial_quadratic_level_set():
    # u = (r^2 - 1)/2: S_c is r = sqrt(1 + 2c), Demailly mass = Riesz mass inside = r^2
    grid = PolarGrid(128, 32)
    e = custom_exhaustion(DiskField.from_function(grid, lambda r, t: 0.5 * (r ** 2 - 1) + 0 * t),
                          DiskField.constant(grid, 2.0))
    c = -0.375
    ls = level_set(e, c)
    assert ls.radius == pytest.approx(0.5, abs=1e-12)
    assert ls.mass == pytest.approx(0.25, abs=1e-12)
    assert ls.riesz_mass_inside == pytest.approx(0.25, abs=1e-12)


def test_level_set_errors():
    e = green_exhaustion(PolarGrid(32, 32))
    with pytest.raises(LevelSetError):
        level_set(e, 0.0)
    b = _biharmonic(32)
    with pytest.raises(LevelSetError):
        level_set(b, -1e3)


def test_biharmonic_level_set_mass_matches_inside():
    e = _biharmonic(128)
    for c in (-3.0, -1.0, -0.1):
        ls = level_set(e, c)
        assert abs(ls.mass - ls.riesz_mass_inside) < 1e-5 * ls.mass
        assert ls.radius is None and ls.radii.min() < ls.radii.max()


def test_biharmonic_dlj_converges():
    errs = []
    for n in (64, 128, 256):
        e = _biharmonic(n)
        v, lap_v = _v_r2(e.grid)
        c = -1.0
        errs.append(abs(demailly_pairing(e, c, v) - dlj_rhs(e, c, v, lap_v)))
    assert errs[-1] < 1e-6
    assert errs[1] < errs[0] and errs[2] < errs[1]


def test_c2_dlj_identity():
    grid_psi = PolarGrid(8, 64).angle_grid
    psi = CircleFunction.from_function(grid_psi, lambda t: 2 + np.cos(t))
    e = construct_exhaustion_c2(psi)
    v, lap_v = _v_r2(e.grid)
    c = 0.5 * e.info["flat_value"]
    assert abs(demailly_pairing(e, c, v) - dlj_rhs(e, c, v, lap_v)) < 1e-6


def test_shu_norm_green():
    e = green_exhaustion(PolarGrid(64, 32))
    v, lap_v = _v_r2(e.grid)
    res = shu_norm(e, v, lap_v, [-2.0, -1.0, -0.01])
    assert res.sup_demailly == pytest.approx(np.exp(-0.02), abs=1e-12)
    assert res.whole_disk == pytest.approx(1.0, abs=1e-10)
    assert list(res.levels) == sorted(res.levels)


def test_monotone_chain_green():
    e = green_exhaustion(PolarGrid(128, 32))
    v, lap_v = _v_r2(e.grid)
    vals = monotone_chain(e, [0.5, 0.7, 0.9, 0.99], v, lap_v)
    assert np.allclose(vals, [0.25, 0.49, 0.81, 0.9801], atol=1e-10)
    with pytest.raises(ValueError):
        monotone_chain(e, [0.7, 0.5], v, lap_v)


def test_monotone_chain_biharmonic_nondecreasing():
    e = _biharmonic(128)
    v, lap_v = _v_r2(e.grid)
    vals = monotone_chain(e, [0.3, 0.6, 0.9, 0.99], v, lap_v)
    assert np.all(np.diff(vals) >= 0)
    assert vals[-1] <= whole_disk_norm(e, v, lap_v) + 1e-8


def test_majorant_norm_two_routes():
    e = _biharmonic(64, lambda t: 2 + np.cos(t))
    vb = CircleFunction.from_function(e.grid.angle_grid, lambda t: 1 + 0.5 * np.sin(t) ** 2)
    assert abs(majorant_norm(e, vb) - majorant_norm_boundary(e, vb)) < 1e-8
    with pytest.raises(ValueError):
        majorant_norm(e, vb - 2.0)


def test_majorant_norm_green_is_mean():
    e = green_exhaustion(PolarGrid(32, 32))
    vb = CircleFunction.from_function(e.grid.angle_grid, lambda t: 2 + np.cos(3 * t))
    assert majorant_norm(e, vb) == pytest.approx(2.0, abs=1e-14)


def test_evaluate_field_interpolates():
    grid = PolarGrid(64, 32)
    f = DiskField.from_function(grid, lambda r, t: r ** 3 * np.cos(t), center=0.0)
    r = np.array([0.13, 0.5, 0.91])
    t = np.array([0.2, 2.0, 4.0])
    assert np.max(np.abs(evaluate_field(f, r, t) - r ** 3 * np.cos(t))) < 1e-10
