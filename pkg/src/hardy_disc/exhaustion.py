"""Subharmonic exhaustions of the disk built from boundary weights.

An :class:`Exhaustion` carries a negative subharmonic ``u`` on a polar grid,
the classical Laplacian of its smooth part and optionally point masses
``(w, m)`` contributing ``m * g(z, w)`` where ``g`` is the Green function of
the disk. Masses are in the normalized Riesz convention of :mod:`hardy_disc.disc`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .disc import (
    TWO_PI,
    CircleFunction,
    DiskField,
    GridMismatchError,
    PolarGrid,
    area_integral,
    boundary_integral,
    harmonic_extension,
    laplacian,
    poisson_average_rings,
    poisson_kernel,
)

TAGS = ("kappa_rho", "lsc_sum", "biharmonic", "green", "custom")


class ConstructionError(ValueError):
    """A construction has no admissible parameters on the given grid."""


# ---------------------------------------------------------------------------
# smoothing function


@dataclass(frozen=True)
class SmoothingKappa:
    """Non-decreasing ``kappa_c`` with ``kappa = c`` on ``t <= c``,
    ``kappa(0) = 0`` and ``kappa'(0) = 1``.

    For ``t > c``: ``kappa(t) = c + exp(-a / (t - c)^b)`` with
    ``a = -ln(-c)/e`` and ``b = -1/ln(-c)``. Note ``kappa''(0) < 0`` for every
    ``c`` in ``(-1, 0)``, so this function is not convex near 0; the
    constructions use :class:`ConvexProfile` instead.
    """

    c: float

    def __post_init__(self):
        if not -1.0 < self.c < 0.0:
            raise ValueError(f"kappa needs -1 < c < 0, got {self.c}")

    @property
    def a(self) -> float:
        return -math.log(-self.c) / math.e

    @property
    def b(self) -> float:
        return -1.0 / math.log(-self.c)

    def _expo(self, t):
        # exp(-a / (t - c)^b) on t > c, 0 elsewhere
        t = np.asarray(t, dtype=float)
        s = t - self.c
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-self.a * np.exp(-self.b * np.log(s[pos])))
        return out, s, pos

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        e, _, _ = self._expo(t)
        out = self.c + e
        # exp(-a (-c)^{-b}) = -c analytically; pin the cancellation
        out = np.where(t == 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def deriv(self, t):
        e, s, pos = self._expo(t)
        out = np.zeros_like(s)
        out[pos] = e[pos] / (math.e * s[pos] ** (self.b + 1.0))
        return out if out.ndim else float(out)

    def second(self, t):
        e, s, pos = self._expo(t)
        out = np.zeros_like(s)
        sp = s[pos]
        out[pos] = (e[pos] / (math.e * sp ** (2.0 * self.b + 2.0))
                    * (1.0 / math.e - (self.b + 1.0) * sp ** self.b))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ConvexProfile:
    """Convex smoothing profile used by the boundary-weight construction.

    ``F(t) = (|L| / alpha) * (exp(alpha * (1 - 1/x)) - 1)`` with
    ``x = 1 - t / L`` on ``L < t <= 0`` and ``F = L / alpha`` for ``t <= L``.
    ``F(0) = 0``, ``F'(0) = 1``; ``F`` is C-infinity, non-decreasing and
    convex whenever ``alpha >= 2``.
    """

    level: float
    alpha: float = 2.0

    def __post_init__(self):
        if not self.level < 0.0:
            raise ValueError(f"profile level must be negative, got {self.level}")
        if self.alpha < 2.0:
            raise ValueError("alpha < 2 breaks convexity")

    @property
    def flat_value(self) -> float:
        return self.level / self.alpha

    def _x(self, t):
        t = np.asarray(t, dtype=float)
        x = 1.0 - t / self.level
        pos = x > 0
        ehat = np.zeros_like(x)
        ehat[pos] = np.exp(self.alpha * (1.0 - 1.0 / x[pos]))
        return x, pos, ehat

    def __call__(self, t):
        x, pos, ehat = self._x(t)
        out = abs(self.level) / self.alpha * (ehat - 1.0)
        return out if out.ndim else float(out)

    def deriv(self, t):
        x, pos, ehat = self._x(t)
        out = np.zeros_like(x)
        out[pos] = ehat[pos] / x[pos] ** 2
        return out if out.ndim else float(out)

    def second(self, t):
        x, pos, ehat = self._x(t)
        out = np.zeros_like(x)
        xp = x[pos]
        out[pos] = ehat[pos] * (self.alpha / xp ** 4 - 2.0 / xp ** 3) / abs(self.level)
        return out if out.ndim else float(out)


def kappa_eval(k: SmoothingKappa, t):
    """``kappa`` restricted to its domain ``t <= 0``."""
    if np.any(np.asarray(t) > 0):
        raise ValueError("kappa is defined for t <= 0")
    return k(t)


def kappa_deriv(k: SmoothingKappa, t):
    if np.any(np.asarray(t) > 0):
        raise ValueError("kappa is defined for t <= 0")
    return k.deriv(t)


# ---------------------------------------------------------------------------
# exhaustions


def green_function(r, theta, pole: complex = 0j):
    """Green function of the disk ``log|(z - w) / (1 - conj(w) z)|``."""
    z = np.asarray(r) * np.exp(1j * np.asarray(theta))
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z - pole)) - np.log(np.abs(1.0 - np.conj(pole) * z))


def _green_log_derivative(z, pole):
    # g = Re L with L(z) = log((z - w) / (1 - conj(w) z))
    return 1.0 / (z - pole) + np.conj(pole) / (1.0 - np.conj(pole) * z)


@dataclass(frozen=True, eq=False)
class Exhaustion:
    """Negative subharmonic exhaustion on a polar grid.

    ``u = u_smooth + sum(m * g(., w) for (w, m) in atoms)``; ``riesz_density``
    is the classical Laplacian of ``u_smooth`` (the point masses are carried
    symbolically). ``total_mass`` is the normalized Riesz mass, ``inf`` when
    the construction certifies divergence.
    """

    u_smooth: DiskField
    riesz_density: DiskField
    tag: str
    atoms: tuple = ()
    mass_override: float | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown construction tag {self.tag!r}")
        if self.u_smooth.grid != self.riesz_density.grid:
            raise GridMismatchError("u and riesz density live on different grids")
        for w, m in self.atoms:
            if abs(w) >= 1 or m < 0:
                raise ValueError(f"bad point mass {(w, m)}")

    @property
    def grid(self) -> PolarGrid:
        return self.u_smooth.grid

    @property
    def u(self) -> DiskField:
        """Full ``u`` on the grid (center ``-inf`` for a pole at the origin)."""
        if not self.atoms:
            return self.u_smooth
        g = self.grid
        r, t = np.meshgrid(g.radii, g.theta, indexing="ij")
        vals = self.u_smooth.values + self.green_part(r, t)
        center = self.u_smooth.center + float(self.green_part(np.array(0.0), np.array(0.0)))
        return _field_with_pole(g, vals, center)

    def green_part(self, r, theta):
        out = np.zeros(np.broadcast(np.asarray(r), np.asarray(theta)).shape)
        for w, m in self.atoms:
            out = out + m * green_function(r, theta, w)
        return out

    @property
    def total_mass(self) -> float:
        if self.mass_override is not None:
            return self.mass_override
        return area_integral(self.riesz_density, True) + sum(m for _, m in self.atoms)

    @property
    def in_e0(self) -> bool:
        return np.isfinite(self.total_mass)

    # evaluation along the grid rays --------------------------------------------
    def u_on_rays(self, radius) -> np.ndarray:
        radius = np.broadcast_to(np.asarray(radius, float), (self.grid.n_angles,))
        out = self.u_smooth.on_rays(radius)
        if self.atoms:
            out = out + self.green_part(radius, self.grid.theta)
        return out

    def gradient_on_rays(self, radius):
        """``(du/dr, (1/r) du/dtheta)`` at ``(radius[k], theta[k])``."""
        from .disc import _spline_diagonal

        g = self.grid
        radius = np.broadcast_to(np.asarray(radius, float), (g.n_angles,))
        full = self.u_smooth.full()
        ur = _spline_diagonal(self.u_smooth.ray_spline(full), radius, nu=1)
        dtheta = _theta_derivative(full)
        ut = _spline_diagonal(self.u_smooth.ray_spline(dtheta), radius) / radius
        if self.atoms:
            z = radius * np.exp(1j * g.theta)
            for w, m in self.atoms:
                d = _green_log_derivative(z, w)
                ur = ur + m * np.real(d * np.exp(1j * g.theta))
                ut = ut - m * np.imag(d * z) / radius
        return ur, ut

    def scaled(self, t: float) -> "Exhaustion":
        """``t * u`` for ``t > 0``."""
        if not t > 0:
            raise ValueError("scale must be positive")
        mass = None if self.mass_override is None else t * self.mass_override
        return Exhaustion(self.u_smooth * t, self.riesz_density * t, self.tag,
                          tuple((w, t * m) for w, m in self.atoms), mass,
                          dict(self.info, scale=t * self.info.get("scale", 1.0)))

    def is_radial(self, tol: float = 1e-12) -> bool:
        if any(abs(w) > 0 for w, _ in self.atoms):
            return False
        v = self.u_smooth.values
        return bool(np.max(np.ptp(v, axis=1)) <= tol * max(1.0, np.max(np.abs(v))))


def _field_with_pole(grid, values, center) -> DiskField:
    return DiskField(grid, values, center)


def _theta_derivative(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    m = np.fft.fftfreq(n, 1.0 / n)
    m[n // 2] = 0.0
    d = np.fft.ifft(np.fft.fft(values, axis=-1) * (1j * m), axis=-1)
    return d if np.iscomplexobj(values) else d.real


def green_exhaustion(grid: PolarGrid, pole: complex = 0j, mass: float = 1.0) -> Exhaustion:
    """``mass * g(z, pole)``; its Riesz measure is a point mass at ``pole``."""
    zero = DiskField.constant(grid, 0.0)
    return Exhaustion(zero, zero, "green", ((complex(pole), float(mass)),))


def custom_exhaustion(u: DiskField, riesz_density: DiskField | None = None) -> Exhaustion:
    """Wrap a user field; the density defaults to the finite-difference Laplacian."""
    if riesz_density is None:
        riesz_density = laplacian(u)
    if np.max(u.values) > 1e-12 or u.center > 1e-12:
        raise ValueError("an exhaustion must be non-positive")
    return Exhaustion(u, riesz_density, "custom")


def _check_weight(psi: CircleFunction, strict: bool = True):
    if not psi.is_real:
        raise TypeError("boundary weight must be real")
    if not np.all(np.isfinite(psi.values)):
        raise ValueError("boundary weight must be finite")
    if strict and np.min(psi.values) <= 0:
        raise ValueError(f"boundary weight must be positive, min = {np.min(psi.values):.3g}")


def _rho_data(psi: CircleFunction, grid: PolarGrid):
    """rho = (r^2 - 1) psi / 2 with its classical Laplacian and |grad rho|^2."""
    p0 = psi.values
    p1 = psi.derivative(1).values
    p2 = psi.derivative(2).values
    r = grid.radii[:, None]
    rho = 0.5 * (r ** 2 - 1.0) * p0
    lap = 2.0 * p0 + (r ** 2 - 1.0) / (2.0 * r ** 2) * p2
    grad2 = (r * p0) ** 2 + (0.5 * (r ** 2 - 1.0) * p1 / r) ** 2
    return rho, lap, grad2


def _rho_laplacian(psi: CircleFunction, grid: PolarGrid) -> DiskField:
    _, lap, _ = _rho_data(psi, grid)
    const = np.ptp(psi.values) <= 1e-14 * np.max(np.abs(psi.values))
    center = 2.0 * float(np.mean(psi.values)) if const else -np.inf
    if not const:
        # (r^2 - 1)/(2 r^2) psi'' is unbounded at the origin
        center = float(np.mean(lap[0]))
    return DiskField(grid, lap, center)


def build_rho(psi: CircleFunction, grid: PolarGrid) -> DiskField:
    """``rho(r, theta) = (r^2 - 1) psi(theta) / 2``.

    The center value is the ring mean ``-mean(psi)/2``; ``rho`` is
    discontinuous at the origin unless ``psi`` is constant.
    """
    _check_weight(psi)
    if psi.grid != grid.angle_grid:
        raise GridMismatchError("psi and grid angles differ")
    rho, _, _ = _rho_data(psi, grid)
    return DiskField(grid, rho, -0.5 * float(np.mean(psi.values)))


def rho_laplacian(psi: CircleFunction, grid: PolarGrid) -> DiskField:
    """``2 psi + (r^2 - 1)/(2 r^2) psi''`` with ``psi''`` spectral."""
    _check_weight(psi)
    return _rho_laplacian(psi, grid)


def _bad_level(psi: CircleFunction, grid: PolarGrid):
    """Largest rho on nodes where Lap(rho) <= 0 (the origin counts when psi varies)."""
    rho, lap, _ = _rho_data(psi, grid)
    bad = lap <= 0.0
    worst = float(np.max(rho[bad])) if bad.any() else -np.inf
    if np.ptp(psi.values) > 1e-12 * np.max(psi.values):
        worst = max(worst, -0.5 * float(np.min(psi.values)))
    return worst, bad


def _layer_nodes(psi: CircleFunction, grid: PolarGrid, level: float) -> np.ndarray:
    rho, _, _ = _rho_data(psi, grid)
    return np.sum((rho > level) & (rho < 0.0), axis=0)


MIN_LAYER_NODES = 4


def required_radii(psi: CircleFunction, nodes: int = 48, level: float | None = None) -> int:
    """Smallest power-of-two ``n_radii`` resolving the transition layer with ``nodes`` nodes."""
    probe = PolarGrid(max(psi.grid.n_angles, 64), psi.grid.n_angles)
    if level is None:
        worst, _ = _bad_level(psi, probe)
        level = worst / 1.1 if np.isfinite(worst) else -0.5 * float(np.max(psi.values))
    # layer at angle theta: 1 - r^2 < 2|level| / psi(theta)
    rmin = np.sqrt(np.clip(1.0 - 2.0 * abs(level) / np.max(psi.values), 0.0, None))
    width = 1.0 - rmin
    n = 8
    while n * width < nodes and n < 8192:
        n *= 2
    return n


def construct_exhaustion_c2(psi: CircleFunction, grid: PolarGrid | None = None, *,
                            level: float | None = None, min_level: float | None = None,
                            alpha: float = 2.0) -> Exhaustion:
    """Exhaustion ``u = F(rho)`` whose boundary weight is ``psi``.

    ``rho = (r^2 - 1) psi / 2`` and ``F`` is a :class:`ConvexProfile` flat
    below the rho-level ``level``. The level defaults to ``worst / 1.1`` where
    ``worst`` is the largest rho on the region where ``Lap(rho) <= 0``; then
    ``u`` is constant on a neighbourhood of that region and subharmonic.
    ``min_level`` bounds ``u`` from below (``u >= min_level``).
    """
    _check_weight(psi)
    if grid is None:
        grid = PolarGrid(required_radii(psi), psi.grid.n_angles)
    if psi.grid != grid.angle_grid:
        raise GridMismatchError("psi and grid angles differ")
    worst, bad = _bad_level(psi, grid)
    if level is None:
        if np.isfinite(worst):
            level = worst / 1.1
        else:
            level = -0.5 * float(np.max(psi.values))
        if min_level is not None:
            level = max(level, alpha * min_level)
    if not level < 0.0:
        raise ConstructionError(f"no admissible level: Lap(rho) <= 0 up to rho = {worst:.3g}")
    if not level > worst:
        j, k = np.argwhere(bad & (_rho_data(psi, grid)[0] >= level))[0]
        raise ConstructionError(
            f"level {level:.4g} does not cover the non-subharmonic region of rho "
            f"(e.g. r={grid.radii[j]:.4f}, theta={grid.theta[k]:.4f}, worst rho {worst:.4g})")
    if min_level is not None and level / alpha < min_level - 1e-15:
        raise ConstructionError(
            f"flat value {level / alpha:.4g} below the requested bound {min_level:.4g}")
    layer = _layer_nodes(psi, grid, level)
    if np.min(layer) < MIN_LAYER_NODES:
        k = np.argwhere(layer < MIN_LAYER_NODES).ravel()
        raise ConstructionError(
            f"transition layer unresolved at {k.size} angles "
            f"(theta in [{grid.theta[k].min():.3f}, {grid.theta[k].max():.3f}], "
            f"{int(layer.min())} radial nodes); psi too rough for n_radii={grid.n_radii}")

    profile = ConvexProfile(level, alpha)
    rho, lap, grad2 = _rho_data(psi, grid)
    u = profile(rho)
    density = profile.deriv(rho) * lap + profile.second(rho) * grad2
    if np.ptp(psi.values) <= 1e-12 * np.max(psi.values):
        rho0 = -0.5 * float(psi.values[0])
        u0 = profile(rho0)
        d0 = profile.deriv(rho0) * 2.0 * float(psi.values[0])
    else:
        u0, d0 = profile.flat_value, 0.0
    info = {"level": level, "flat_value": profile.flat_value, "alpha": alpha,
            "bad_rho_max": worst, "psi": psi}
    return Exhaustion(DiskField(grid, u, u0), DiskField(grid, density, d0), "kappa_rho",
                      info=info)


def construct_exhaustion_lsc(psi_seq, depth: int, grid: PolarGrid | None = None) -> Exhaustion:
    """Truncated telescoping sum for a non-decreasing sequence of smooth weights.

    The sequence is shifted to ``s_n = psi_n - 2^{-(n+1)}`` (with ``s_{-1} = 0``)
    so consecutive gaps ``d_n = s_n - s_{n-1}`` are bounded below; term ``n``
    is the boundary-weight exhaustion of ``d_n`` with ``u_n >= -2^{-n}``.
    The weight of the truncated sum is ``s_{depth-1}``.
    """
    psi_seq = list(psi_seq)
    if not 1 <= depth <= len(psi_seq):
        raise ValueError(f"depth must be in [1, {len(psi_seq)}]")
    for n, p in enumerate(psi_seq):
        _check_weight(p, strict=(n == 0))
    for n in range(1, len(psi_seq)):
        if np.any(psi_seq[n].values < psi_seq[n - 1].values - 1e-14):
            raise ValueError(f"sequence not non-decreasing at index {n}")
    shifted = [p - 2.0 ** -(n + 1) for n, p in enumerate(psi_seq)]
    gaps = [shifted[0]] + [shifted[n] - shifted[n - 1] for n in range(1, len(shifted))]
    for n in range(depth):
        if np.min(gaps[n].values) <= 0:
            raise ValueError(f"shifted gap d_{n} is not positive (min {np.min(gaps[n].values):.3g})")
    if grid is None:
        nr = max(required_radii(gaps[n]) for n in range(depth))
        grid = PolarGrid(nr, psi_seq[0].grid.n_angles)

    terms = []
    levels = []
    prev_region = None
    for n in range(depth):
        bound = -(2.0 ** -n)
        worst, _ = _bad_level(gaps[n], grid)
        level = worst / 1.1 if np.isfinite(worst) else -0.5 * float(np.max(gaps[n].values))
        level = max(level, 2.0 * bound)
        rho = _rho_data(gaps[n], grid)[0]
        if prev_region is not None:
            # nest {rho_{n-1} < L_{n-1}} inside {rho_n < L_n}; pushing L_n toward 0 grows the set
            for _ in range(60):
                if np.all((rho < level)[prev_region]):
                    break
                level /= 1.1
            else:
                raise ConstructionError(f"cannot nest sublevel sets at term {n}")
        term = construct_exhaustion_c2(gaps[n], grid, level=level, min_level=bound)
        terms.append(term)
        levels.append(level)
        prev_region = rho < level

    u = terms[0].u_smooth
    dens = terms[0].riesz_density
    for t in terms[1:]:
        u = u + t.u_smooth
        dens = dens + t.riesz_density
    weight = shifted[depth - 1]
    tail = float(np.max(psi_seq[-1].values - weight.values))
    info = {"levels": levels, "weight": weight, "gaps": gaps[:depth], "tail_bound": tail,
            "flat_values": [t.info["flat_value"] for t in terms]}
    return Exhaustion(u, dens, "lsc_sum", info=info)


def _r_dr(field: DiskField) -> DiskField:
    """``r * d/dr`` of a harmonic extension, via the multiplier ``|m| r^|m|``."""
    g = field.grid
    m = np.abs(g.angle_grid.frequencies)
    bf = field.boundary()
    c = np.fft.fft(bf.values)
    vals = np.fft.ifft(c[None, :] * m[None, :] * g.radii[:, None] ** m[None, :], axis=1)
    if bf.is_real:
        vals = vals.real
    return DiskField(g, vals, 0.0)


def construct_biharmonic(psi: CircleFunction, M: float | None = None,
                         grid: PolarGrid | None = None, margin: float = 1e-6,
                         tol: float = 1e-12) -> Exhaustion:
    """``u = (|z|^2 - 1)(P psi + M) / 2``; ``Lap u = 2(P psi + M) + 2 r d_r P psi``.

    ``Lap u`` is harmonic so ``u`` is biharmonic, and the boundary weight is
    ``psi + M``. When ``M`` is omitted the smallest value keeping ``Lap u >= 0``
    on the grid is used, plus ``margin``.
    """
    _check_weight(psi, strict=False)
    if np.min(psi.values) < 0:
        raise ValueError("psi must be non-negative")
    if grid is None:
        grid = PolarGrid(psi.grid.n_angles // 2, psi.grid.n_angles)
    H = harmonic_extension(psi, grid)
    rH = _r_dr(H)
    base = H + rH
    m_min = -min(float(np.min(base.values)), float(base.center))
    if M is None:
        M = m_min + margin
    density = 2.0 * (base + M)
    low = min(float(np.min(density.values)), float(density.center))
    if low < -tol:
        raise ConstructionError(f"M = {M:.6g} gives Lap u down to {low:.6g}; need M >= {m_min:.6g}")
    if float(np.min(psi.values)) + M <= 0.0:
        raise ConstructionError("degenerate weight psi + M is not bounded below by a positive constant")
    r = grid.radii[:, None]
    u = DiskField(grid, 0.5 * (r ** 2 - 1.0) * (H.values + M), -0.5 * (H.center + M))
    return Exhaustion(u, density, "biharmonic", info={"M": M, "psi": psi, "M_min": m_min})


# ---------------------------------------------------------------------------
# boundary weight


def weight_balayage(e: Exhaustion) -> CircleFunction:
    """Balayage ``V_u(theta) = int P(z, e^{i theta}) dRiesz(z)``.

    The angular part of the area integral is done in Fourier space (the
    Poisson average of each ring), Simpson in r; point masses contribute
    ``m * P(w, theta)`` exactly.
    """
    g = e.grid
    if g.n_radii < 4:
        raise ValueError("weight_balayage needs at least 4 radii")
    rings = poisson_average_rings(e.riesz_density)
    if np.isrealobj(e.riesz_density.values):
        rings = rings.real
    integrand = np.vstack([np.zeros((1, g.n_angles)), g.radii[:, None] * rings])
    V = simpson(integrand, x=g.nodes, axis=0)
    for w, m in e.atoms:
        V = V + m * poisson_kernel(abs(w), np.angle(w), g.theta)
    return CircleFunction(g.angle_grid, V)


def weight_normal_derivative(e: Exhaustion) -> CircleFunction:
    """``du/dr`` at the boundary (one-sided differences plus exact pole terms)."""
    from .disc import radial_boundary_derivative

    V = radial_boundary_derivative(e.u_smooth)
    for w, m in e.atoms:
        V = V + m * poisson_kernel(abs(w), np.angle(w), e.grid.theta)
    return V


def mass_budget(e: Exhaustion) -> tuple[float, float]:
    """``(int V_u dnu, total Riesz mass)``; equal for finite-mass exhaustions."""
    return boundary_integral(weight_balayage(e)), e.total_mass


def _is_harmonic(f: DiskField, rel: float = 1e-3) -> bool:
    """Discrete Laplacian small relative to the field (boundary row skipped)."""
    res = laplacian(f).values[:-1]
    scale = max(1.0, float(np.max(np.abs(f.values))))
    return float(np.max(np.abs(res))) <= rel * scale


def weight_radial(e: Exhaustion) -> CircleFunction:
    """``V_u(theta) = (1/2) int_0^1 Lap u(s e^{i theta}) ds`` (classical Laplacian).

    Valid only when ``Lap u`` is harmonic.
    """
    if e.atoms:
        raise ValueError("radial weight formula needs an absolutely continuous Riesz measure")
    if e.tag != "biharmonic" and not _is_harmonic(e.riesz_density):
        raise ValueError("radial weight formula needs a harmonic Riesz density")
    g = e.grid
    V = 0.5 * simpson(e.riesz_density.full(), x=g.nodes, axis=0)
    return CircleFunction(g.angle_grid, V)


def biharmonic_residual(e: Exhaustion) -> float:
    """``sup |Lap^2 u|`` over interior nodes, as ``Lap`` of the Riesz density.

    Uses a fourth-order radial stencil per Fourier mode (spectral in theta).
    Ghost rows at ``-r`` come from the parity ``d_m(-r) = (-1)^m d_m(r)`` of a
    smooth function, so the stencil reaches the first ring without the
    ``h^2 / r`` loss of the second-order polar operator.
    """
    dens = e.riesz_density
    grid = dens.grid
    h = grid.h
    n = grid.n_angles
    m = np.abs(np.fft.fftfreq(n, 1.0 / n))
    c = np.fft.fft(dens.values, axis=1)
    c0 = np.zeros((1, n), dtype=complex)
    c0[0, 0] = dens.center * n
    ghost = c[1::-1] * ((-1.0) ** m)[None, :]
    ext = np.vstack([ghost, c0, c])
    r = np.concatenate([[-2 * h, -h, 0.0], grid.radii])
    k = np.arange(3, ext.shape[0] - 2)
    f = [ext[k + j] for j in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    rk = r[k][:, None]
    lap = np.fft.ifft(d2 + d1 / rk - m ** 2 * f[2] / rk ** 2, axis=1).real
    return float(np.max(np.abs(lap)))
