"""Level sets, Demailly measures and the Lelong-Jensen identity.

Level sets ``{u = c}`` are located ray by ray: along every grid angle the
crossing radius is found on the radial cubic spline of ``u``, which requires
the sublevel set to be star-shaped about the origin. All area integrals over
``{u < c}`` are done per ray up to that radius (exact integration of the
spline interpolant, Gauss-Legendre for logarithmic pole terms) and then
averaged over angles, which is the trapezoid rule in theta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disc import (
    TWO_PI,
    CircleFunction,
    DiskField,
    _spline_diagonal,
    harmonic_extension,
    boundary_integral,
)
from .exhaustion import Exhaustion, weight_balayage


class LevelSetError(ValueError):
    """``c`` is not a usable regular value of ``u`` on the grid."""


@dataclass(frozen=True, eq=False)
class LevelSetData:
    """The level curve ``S_c`` sampled at the grid angles.

    ``v_cu`` is the density of the Demailly measure with respect to the
    arclength measure on ``S_c`` normalized to total mass 1; ``weights`` are
    the quadrature weights of that normalized measure, so
    ``mass = sum(v_cu * weights)``.
    """

    c: float
    theta: np.ndarray
    radii: np.ndarray
    radius: float | None
    v_cu: np.ndarray
    weights: np.ndarray
    mass: float
    riesz_mass_inside: float

    @property
    def contour(self) -> np.ndarray:
        return self.radii * np.exp(1j * self.theta)

    @property
    def points(self) -> np.ndarray:
        z = self.contour
        return np.column_stack([z.real, z.imag])


def evaluate_field(field: DiskField, r, theta) -> np.ndarray:
    """Interpolate a grid field at arbitrary points (Fourier in theta, spline in r)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape)
    g = field.grid
    full = field.full()
    c = np.fft.fft(full, axis=1) / g.n_angles
    m = g.angle_grid.frequencies.astype(float)
    half = g.n_angles // 2
    c[:, half] *= 0.5
    basis = np.exp(1j * np.multiply.outer(theta, m))  # (P, n)
    rings = c @ basis.T  # (n_radii+1, P)
    rings = rings + np.multiply.outer(c[:, half], np.exp(1j * half * theta))
    if not np.iscomplexobj(field.values):
        rings = rings.real
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(g.nodes, rings, axis=0)
    return _spline_diagonal(spline, r)


def _value_at(field: DiskField, w: complex) -> float:
    if w == 0:
        return field.center
    return float(np.real(evaluate_field(field, abs(w), np.angle(w))[0]))


def _crossing_radii(e: Exhaustion, c: float) -> np.ndarray:
    g = e.grid
    u = e.u.full()
    if not np.all(u[-1] > c):
        raise LevelSetError(f"level {c} reaches the boundary circle")
    below = u < c
    # star-shaped: below-set on each ray is an initial segment
    first_above = np.argmax(~below, axis=0)
    if np.any(first_above == 0):
        raise LevelSetError(f"u(0) >= {c}: the sublevel set is empty or misses the origin")
    rows = np.arange(u.shape[0])[:, None]
    if np.any(below & (rows >= first_above[None, :])):
        raise LevelSetError(f"sublevel set of {c} is not star-shaped about the origin")
    lo = g.nodes[first_above - 1]
    hi = g.nodes[first_above]
    spline = e.u_smooth.ray_spline()

    def f(rr):
        out = _spline_diagonal(spline, rr)
        if e.atoms:
            out = out + e.green_part(rr, g.theta)
        return out - c

    for _ in range(64):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        lo = np.where(fm < 0, mid, lo)
        hi = np.where(fm < 0, hi, mid)
    return 0.5 * (lo + hi)


def _radial_profile_root(e: Exhaustion, c: float) -> float:
    if not e.u_smooth.values.any() and len(e.atoms) == 1 and e.atoms[0][0] == 0:
        m = e.atoms[0][1]
        return float(np.exp(c / m))
    return float(np.mean(_crossing_radii(e, c)))


def _smooth_inside(field_r: np.ndarray, grid, radius: np.ndarray) -> np.ndarray:
    """Per ray ``int_0^R q r dr`` for grid data ``field_r = q * r`` (full rows)."""
    from scipy.interpolate import CubicSpline

    anti = CubicSpline(grid.nodes, field_r, axis=0).antiderivative()
    return _spline_diagonal(anti, radius) - anti(0.0)


def _gauss(radius: np.ndarray, order: int):
    """Nodes/weights for ``int_0^R f(r) r dr`` via ``r = R t^2`` (handles log r at 0)."""
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    r = np.multiply.outer(t ** 2, radius)  # (Q, n)
    wt = np.multiply.outer(2.0 * w * t ** 3, radius ** 2)
    return r, wt


def _ray_integral_inside(e: Exhaustion, radius, smooth: DiskField,
                         pole_times: DiskField | None = None, order: int | None = None):
    """Mean over rays of ``int_0^R [smooth + green(u) * pole_times] r dr``."""
    g = e.grid
    radius = np.broadcast_to(np.asarray(radius, float), (g.n_angles,))
    full = smooth.full()
    per_ray = _smooth_inside(full * g.nodes[:, None], g, radius)
    if e.atoms and pole_times is not None:
        order = order or max(64, 2 * g.n_radii)
        r, wt = _gauss(radius, order)
        spline = pole_times.ray_spline()
        vals = np.stack([_spline_diagonal(spline, r[q]) for q in range(r.shape[0])])
        green = e.green_part(r, g.theta[None, :])
        per_ray = per_ray + np.sum(wt * green * vals, axis=0)
    return float(np.mean(per_ray))


def level_set(e: Exhaustion, c: float) -> LevelSetData:
    """Level curve ``S_{c,u}`` and the density of the Demailly measure on it.

    Radial ``u`` uses a single circle; otherwise the curve is ``r = R(theta)``
    and the Demailly density is the flux ``|grad u| ds / (2 pi)`` rescaled to
    the normalized arclength measure of the curve.
    """
    if not c < 0:
        raise LevelSetError("level must be negative")
    g = e.grid
    n = g.n_angles
    if e.is_radial():
        radius = _radial_profile_root(e, c)
        R = np.full(n, radius)
    else:
        radius = None
        R = _crossing_radii(e, c)
    ur, ut = e.gradient_on_rays(R)
    if np.min(ur) <= 1e-10 * max(1.0, float(np.max(np.abs(ur)))):
        raise LevelSetError(f"level {c} is not a regular value (du/dr vanishes on S_c)")
    Rf = CircleFunction(g.angle_grid, R)
    dR = Rf.derivative(1).values
    ds = np.sqrt(R ** 2 + dR ** 2) * g.angle_grid.spacing
    length = float(np.sum(ds))
    # grad u is normal to S_c, so the flux density is |grad u| ds
    grad = np.sqrt(ur ** 2 + ut ** 2)
    weights = ds / length
    v_cu = length * grad / TWO_PI
    mass = float(np.sum(v_cu * weights))
    return LevelSetData(float(c), g.theta, R, radius, v_cu, weights, mass,
                        _riesz_mass_inside(e, R))


def _atoms_inside(e: Exhaustion, R: np.ndarray):
    out = []
    for w, m in e.atoms:
        if w == 0:
            out.append((w, m))
            continue
        k = int(np.argmin(np.abs(np.angle(np.exp(1j * (e.grid.theta - np.angle(w)))))))
        if abs(w) < R[k]:
            out.append((w, m))
    return out


def _riesz_mass_inside(e: Exhaustion, R) -> float:
    """Normalized Riesz mass of ``{r < R(theta)}``."""
    g = e.grid
    per = _smooth_inside(e.riesz_density.full() * g.nodes[:, None], g,
                         np.broadcast_to(np.asarray(R, float), (g.n_angles,)))
    # (1/2pi) * int dtheta int q r dr = mean over rays
    return float(np.mean(per)) + sum(m for _, m in _atoms_inside(e, np.broadcast_to(R, (g.n_angles,))))


def demailly_pairing(e: Exhaustion, c: float, v: DiskField, ls: LevelSetData | None = None) -> float:
    """``int_{S_c} v d mu_{c,u}``."""
    ls = ls or level_set(e, c)
    vals = v.on_rays(ls.radii)
    return float(np.sum(np.real(vals) * ls.v_cu * ls.weights))


def dlj_rhs(e: Exhaustion, c: float, v: DiskField, v_laplacian: DiskField,
            ls: LevelSetData | None = None) -> float:
    """``int_B (v Lap u - u Lap v) + c int_B Lap v`` over ``B = {u < c}`` (normalized)."""
    ls = ls or level_set(e, c)
    smooth = v * e.riesz_density - e.u_smooth * v_laplacian + c * v_laplacian
    total = _ray_integral_inside(e, ls.radii, smooth, pole_times=-v_laplacian)
    for w, m in _atoms_inside(e, ls.radii):
        total += m * _value_at(v, w)
    return total


def whole_disk_norm(e: Exhaustion, v: DiskField, v_laplacian: DiskField) -> float:
    """``int_D (v Lap u - u Lap v)`` in the normalized Riesz convention."""
    smooth = v * e.riesz_density - e.u_smooth * v_laplacian
    total = _ray_integral_inside(e, np.ones(e.grid.n_angles), smooth, pole_times=-v_laplacian)
    for w, m in e.atoms:
        total += m * _value_at(v, w)
    return total


@dataclass(frozen=True)
class ShuNorm:
    sup_demailly: float
    whole_disk: float
    levels: tuple

    @property
    def discrepancy(self) -> float:
        return abs(self.sup_demailly - self.whole_disk)


def shu_norm(e: Exhaustion, v: DiskField, v_laplacian: DiskField, c_sequence) -> ShuNorm:
    """Both sides of ``||v||_u = sup_c int_{S_c} v d mu_c = int (v Lap u - u Lap v)``."""
    if np.min(v.values) < -1e-12:
        raise ValueError("v must be non-negative")
    pairings = [demailly_pairing(e, c, v) for c in c_sequence]
    return ShuNorm(max(pairings), whole_disk_norm(e, v, v_laplacian), tuple(pairings))


def majorant_norm(e: Exhaustion, v_boundary: CircleFunction) -> float:
    """``int h dRiesz`` where ``h`` is the harmonic extension of ``v_boundary``."""
    if np.min(np.real(v_boundary.values)) < 0:
        raise ValueError("boundary data must be non-negative")
    h = harmonic_extension(v_boundary, e.grid)
    total = _ray_integral_inside(e, np.ones(e.grid.n_angles), h * e.riesz_density)
    for w, m in e.atoms:
        total += m * _value_at(h, w)
    return total


def majorant_norm_boundary(e: Exhaustion, v_boundary: CircleFunction) -> float:
    """Same quantity by Fubini: ``int v V_u dnu``."""
    return float(np.real(boundary_integral(v_boundary * weight_balayage(e))))


def monotone_chain(e: Exhaustion, radii, v: DiskField, v_laplacian: DiskField) -> list[float]:
    """``||v||_{u_j}`` for ``u_j = u - P_{G_j} u`` on the disks ``|z| < r_j``."""
    radii = [float(r) for r in radii]
    if any(not 0 < r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing in (0, 1)")
    g = e.grid
    m = np.abs(g.angle_grid.frequencies)
    out = []
    for rj in radii:
        ring = np.real(e.u_on_rays(np.full(g.n_angles, rj)))
        coeff = np.fft.fft(ring)
        # P_{G_j} u on the polar grid nodes inside G_j (zero beyond, never used)
        scale = np.clip(g.nodes / rj, 0.0, 1.0)
        hj_full = np.fft.ifft(coeff[None, :] * scale[:, None] ** m[None, :], axis=1).real
        hj = DiskField(g, hj_full[1:], hj_full[0, 0])
        smooth = v * e.riesz_density - (e.u_smooth - hj) * v_laplacian
        total = _ray_integral_inside(e, np.full(g.n_angles, rj), smooth, pole_times=-v_laplacian)
        for w, mass in e.atoms:
            if abs(w) < rj:
                total += mass * _value_at(v, w)
        out.append(total)
    return out
