"""Grids, Fourier analysis on the circle and harmonic machinery on the unit disk.

Measure conventions used throughout the package:

* boundary measure ``dnu = dtheta / (2 pi)`` so the circle has total mass 1;
* Poisson kernel ``P(z, zeta) = (1 - |z|^2) / |zeta - z|^2`` which integrates
  to 1 against ``dnu``;
* Riesz measure of a subharmonic ``u`` is ``(1 / 2 pi) * Lap(u) * dA`` where
  ``Lap`` is the classical Laplacian, so ``log|z|`` has unit mass at 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Two objects live on incompatible grids."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class AngleGrid:
    """Uniform grid ``theta_k = 2 pi k / n_angles`` on the circle."""

    n_angles: int

    def __post_init__(self):
        n = self.n_angles
        if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 8:
            raise ValueError(f"n_angles must be a power of two >= 8, got {n!r}")

    @cached_property
    def theta(self) -> np.ndarray:
        t = TWO_PI * np.arange(self.n_angles) / self.n_angles
        t.flags.writeable = False
        return t

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_angles

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer frequency of each FFT bin (Nyquist bin reported as -n/2)."""
        m = np.fft.fftfreq(self.n_angles, 1.0 / self.n_angles).round().astype(int)
        m.flags.writeable = False
        return m

    def refined(self, factor: int = 2) -> "AngleGrid":
        return AngleGrid(self.n_angles * factor)


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def _common_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"{a.grid} vs {b.grid}")
    return a.grid


class CircleFunction:
    """Samples of a function on an :class:`AngleGrid`.

    Arithmetic with scalars, arrays of matching length, or other circle
    functions on the same grid is supported and returns new objects.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: AngleGrid, values):
        values = np.asarray(values)
        if values.shape != (grid.n_angles,):
            raise GridMismatchError(
                f"expected {grid.n_angles} samples, got shape {values.shape}")
        if not np.iscomplexobj(values):
            values = values.astype(float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _frozen(values))

    def __setattr__(self, name, value):
        raise AttributeError("CircleFunction is immutable")

    # construction -----------------------------------------------------------
    @classmethod
    def from_function(cls, grid: AngleGrid, func) -> "CircleFunction":
        return cls(grid, func(grid.theta))

    @classmethod
    def from_coefficients(cls, grid: AngleGrid, coeffs: dict | None = None,
                          fft_coeffs=None) -> "CircleFunction":
        """Build from Fourier coefficients.

        ``coeffs`` maps integer frequency ``m`` to ``c_m``; alternatively give
        the full FFT-ordered array ``fft_coeffs`` (already divided by n).
        """
        n = grid.n_angles
        if fft_coeffs is None:
            fft_coeffs = np.zeros(n, dtype=complex)
            for m, c in (coeffs or {}).items():
                if abs(m) > n // 2:
                    raise ValueError(f"frequency {m} exceeds Nyquist for n={n}")
                fft_coeffs[m % n] += c
        values = np.fft.ifft(np.asarray(fft_coeffs) * n)
        return cls(grid, values)

    @classmethod
    def constant(cls, grid: AngleGrid, value) -> "CircleFunction":
        return cls(grid, np.full(grid.n_angles, value))

    # views ------------------------------------------------------------------
    @property
    def theta(self) -> np.ndarray:
        return self.grid.theta

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def fft_coefficients(self) -> np.ndarray:
        """Fourier coefficients ``c_m`` in FFT order (``values = sum c_m e^{im theta}``)."""
        return np.fft.fft(self.values) / self.grid.n_angles

    def coefficient(self, m: int) -> complex:
        return complex(self.fft_coefficients()[m % self.grid.n_angles])

    def coefficients(self) -> dict[int, complex]:
        c = self.fft_coefficients()
        return {int(m): complex(c[k]) for k, m in enumerate(self.grid.frequencies)}

    def real(self) -> "CircleFunction":
        return CircleFunction(self.grid, self.values.real)

    def imag(self) -> "CircleFunction":
        return CircleFunction(self.grid, self.values.imag)

    def conj(self) -> "CircleFunction":
        return CircleFunction(self.grid, np.conj(self.values))

    def abs(self) -> "CircleFunction":
        return CircleFunction(self.grid, np.abs(self.values))

    def apply(self, func) -> "CircleFunction":
        return CircleFunction(self.grid, func(self.values))

    def derivative(self, order: int = 1) -> "CircleFunction":
        """Spectral derivative in theta."""
        m = self.grid.frequencies.astype(float)
        mult = (1j * m) ** order
        if order % 2 == 1:
            mult[self.grid.n_angles // 2] = 0.0
        d = np.fft.ifft(np.fft.fft(self.values) * mult)
        if self.is_real:
            d = d.real
        return CircleFunction(self.grid, d)

    def evaluate(self, angles) -> np.ndarray:
        """Trigonometric interpolation at arbitrary angles."""
        angles = np.asarray(angles, dtype=float)
        c = self.fft_coefficients()
        m = self.grid.frequencies.astype(float)
        half = self.grid.n_angles // 2
        # split the Nyquist bin symmetrically so real data stays real
        c = c.copy()
        nyq = c[half]
        c[half] = nyq / 2
        out = np.exp(1j * np.multiply.outer(angles, m)) @ c
        out = out + (nyq / 2) * np.exp(1j * half * angles)
        if self.is_real:
            out = out.real
        return out

    def resample(self, grid: AngleGrid) -> "CircleFunction":
        return CircleFunction(grid, self.evaluate(grid.theta))

    def mean(self) -> complex | float:
        return boundary_integral(self)

    # arithmetic ---------------------------------------------------------------
    def _other(self, other):
        if isinstance(other, CircleFunction):
            _common_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return CircleFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return CircleFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return CircleFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return CircleFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CircleFunction(self.grid, self.values / self._other(other))

    def __rtruediv__(self, other):
        return CircleFunction(self.grid, self._other(other) / self.values)

    def __neg__(self):
        return CircleFunction(self.grid, -self.values)

    def __pow__(self, power):
        return CircleFunction(self.grid, self.values ** power)

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"CircleFunction(n_angles={self.grid.n_angles}, {kind})"


@dataclass(frozen=True)
class PolarGrid:
    """Uniform radii ``r_j = j / n_radii`` (j = 1..n_radii) plus the center."""

    n_radii: int
    n_angles: int

    def __post_init__(self):
        if int(self.n_radii) < 2:
            raise ValueError(f"n_radii must be >= 2, got {self.n_radii!r}")
        AngleGrid(self.n_angles)

    @cached_property
    def angle_grid(self) -> AngleGrid:
        return AngleGrid(self.n_angles)

    @property
    def theta(self) -> np.ndarray:
        return self.angle_grid.theta

    @property
    def h(self) -> float:
        return 1.0 / self.n_radii

    @cached_property
    def radii(self) -> np.ndarray:
        return _frozen(np.arange(1, self.n_radii + 1) / self.n_radii)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Radial nodes including the center, ``0, h, ..., 1``."""
        return _frozen(np.arange(0, self.n_radii + 1) / self.n_radii)

    def refined(self, factor: int = 2) -> "PolarGrid":
        return PolarGrid(self.n_radii * factor, self.n_angles * factor)


class DiskField:
    """Scalar field on a :class:`PolarGrid`.

    ``values[j, k]`` is the value at ``(radii[j], theta[k])``; ``center`` is
    the value at the origin. The center may be ``-inf`` only for fields that
    carry a logarithmic pole there (Green-type exhaustions).
    """

    __slots__ = ("grid", "values", "center")

    def __init__(self, grid: PolarGrid, values, center):
        values = np.asarray(values)
        if values.shape != (grid.n_radii, grid.n_angles):
            raise GridMismatchError(
                f"expected shape {(grid.n_radii, grid.n_angles)}, got {values.shape}")
        if not np.iscomplexobj(values):
            values = values.astype(float)
        if not np.all(np.isfinite(values)):
            raise ValueError("DiskField values must be finite off the center")
        if np.isnan(center):
            raise ValueError("DiskField center value is NaN")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "center", center.item() if hasattr(center, "item") else center)

    def __setattr__(self, name, value):
        raise AttributeError("DiskField is immutable")

    @classmethod
    def from_function(cls, grid: PolarGrid, func, center=None) -> "DiskField":
        """Sample ``func(r, theta)``; the center defaults to ``func(0, 0)``."""
        r, t = np.meshgrid(grid.radii, grid.theta, indexing="ij")
        values = func(r, t)
        if center is None:
            center = func(np.array(0.0), np.array(0.0))
        return cls(grid, values, center)

    @classmethod
    def constant(cls, grid: PolarGrid, value) -> "DiskField":
        return cls(grid, np.full((grid.n_radii, grid.n_angles), value), value)

    def full(self) -> np.ndarray:
        """Array of shape ``(n_radii + 1, n_angles)`` with the center replicated as row 0."""
        row0 = np.full((1, self.grid.n_angles), self.center,
                       dtype=np.result_type(self.values, np.asarray(self.center)))
        return np.vstack([row0, self.values])

    def boundary(self) -> CircleFunction:
        return CircleFunction(self.grid.angle_grid, self.values[-1])

    def ring(self, j: int) -> CircleFunction:
        return CircleFunction(self.grid.angle_grid, self.values[j])

    def real(self) -> "DiskField":
        return DiskField(self.grid, self.values.real, np.real(self.center))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.center))

    def ray_spline(self, values=None) -> CubicSpline:
        """Cubic spline in ``r`` along every ray, vectorised over angles."""
        data = self.full() if values is None else values
        return CubicSpline(self.grid.nodes, data, axis=0)

    def on_rays(self, radius) -> np.ndarray:
        """Value at ``(radius[k], theta[k])`` for every grid angle (spline in r)."""
        radius = np.broadcast_to(np.asarray(radius, dtype=float), (self.grid.n_angles,))
        return _spline_diagonal(self.ray_spline(), radius)

    def _other(self, other):
        if isinstance(other, DiskField):
            _common_grid(self, other)
            return other.values, other.center
        return other, other

    def __add__(self, other):
        v, c = self._other(other)
        return DiskField(self.grid, self.values + v, self.center + c)

    __radd__ = __add__

    def __sub__(self, other):
        v, c = self._other(other)
        return DiskField(self.grid, self.values - v, self.center - c)

    def __rsub__(self, other):
        v, c = self._other(other)
        return DiskField(self.grid, v - self.values, c - self.center)

    def __mul__(self, other):
        v, c = self._other(other)
        return DiskField(self.grid, self.values * v, self.center * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, c = self._other(other)
        return DiskField(self.grid, self.values / v, self.center / c)

    def __neg__(self):
        return DiskField(self.grid, -self.values, -self.center)

    def __repr__(self):
        return f"DiskField(n_radii={self.grid.n_radii}, n_angles={self.grid.n_angles})"


def _spline_diagonal(spline: CubicSpline, radius: np.ndarray, nu: int = 0) -> np.ndarray:
    """Evaluate a column-vectorised spline at a different abscissa per column."""
    # locate the interval per column and evaluate its polynomial piece
    x = spline.x
    idx = np.clip(np.searchsorted(x, radius, side="right") - 1, 0, len(x) - 2)
    dx = radius - x[idx]
    cols = np.arange(radius.size)
    coef = spline.c[:, idx, cols]  # (4, n)
    k = coef.shape[0] - 1
    out = np.zeros(radius.shape, dtype=coef.dtype)
    for p in range(k - nu + 1):
        power = k - p - nu
        factor = np.prod(np.arange(power + 1, power + nu + 1)) if nu else 1.0
        out = out + coef[p] * factor * dx ** power
    return out


def _check_grid(obj, grid):
    if obj.grid != grid:
        raise GridMismatchError(f"{obj.grid} vs {grid}")


# ---------------------------------------------------------------------------
# operations


def poisson_kernel(r, t, zeta_angle):
    """``(1 - r^2) / (1 - 2 r cos(t - theta) + r^2)``, paired with ``dnu``."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0) or np.any(r < 0.0):
        raise ValueError("poisson_kernel needs 0 <= r < 1")
    return (1.0 - r ** 2) / (1.0 - 2.0 * r * np.cos(np.asarray(t) - zeta_angle) + r ** 2)


def boundary_integral(bf: CircleFunction):
    """Trapezoid rule against the normalized arclength measure."""
    val = np.mean(bf.values)
    return complex(val) if np.iscomplexobj(val) else float(val)


def _radial_multiplier(grid: PolarGrid) -> np.ndarray:
    m = np.abs(grid.angle_grid.frequencies)
    return grid.radii[:, None] ** m[None, :]


def harmonic_extension(bf: CircleFunction, grid: PolarGrid) -> DiskField:
    """Poisson integral of ``bf`` sampled on ``grid`` (Fourier multiplier ``r^|m|``)."""
    if bf.grid != grid.angle_grid:
        raise GridMismatchError(f"boundary grid {bf.grid} does not match {grid}")
    if not np.all(np.isfinite(bf.values)):
        raise ValueError("boundary data must be finite")
    c = np.fft.fft(bf.values)
    vals = np.fft.ifft(c[None, :] * _radial_multiplier(grid), axis=1)
    center = c[0] / grid.n_angles
    if bf.is_real:
        vals, center = vals.real, center.real
    vals[-1] = bf.values
    return DiskField(grid, vals, center)


def poisson_average_rings(field: DiskField) -> np.ndarray:
    """Per ring ``r_j``, the Poisson integral of that ring's data evaluated on the ring.

    Row j holds ``(1/2pi) int P(r_j e^{it}, e^{i theta}) f(r_j, t) dt`` at every
    grid angle ``theta``; the angular integral is done exactly in Fourier space.
    """
    c = np.fft.fft(field.values, axis=1)
    return np.fft.ifft(c * _radial_multiplier(field.grid), axis=1)


def radial_boundary_derivative(field: DiskField) -> CircleFunction:
    """Second-order one-sided estimate of ``d/dr`` at ``r = 1``."""
    grid = field.grid
    if grid.n_radii + 1 < 3:
        raise ValueError("need at least 3 radial nodes")
    f = field.full()
    d = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * grid.h)
    return CircleFunction(grid.angle_grid, d)


def _theta_second_derivative(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    m = np.fft.fftfreq(n, 1.0 / n)
    d = np.fft.ifft(np.fft.fft(values, axis=-1) * (-(m ** 2)), axis=-1)
    return d if np.iscomplexobj(values) else d.real


def laplacian(field: DiskField) -> DiskField:
    """Classical Laplacian: central differences in r, spectral in theta.

    The center uses the ring average ``4 (mean(u(h, .)) - u(0)) / h^2``;
    the boundary row is extrapolated quadratically from the three rows below.
    """
    grid = field.grid
    if grid.n_radii < 4:
        raise ValueError("laplacian needs n_radii >= 4")
    if not field.is_finite():
        raise ValueError("laplacian of a field with a pole at the center")
    h = grid.h
    f = field.full()
    r = grid.radii[:-1, None]
    urr = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h ** 2
    ur = (f[2:] - f[:-2]) / (2.0 * h)
    utt = _theta_second_derivative(f[1:-1])
    lap = np.empty_like(field.values)
    lap[:-1] = urr + ur / r + utt / r ** 2
    lap[-1] = 3.0 * lap[-2] - 3.0 * lap[-3] + lap[-4]
    center = 4.0 * (np.mean(f[1]) - field.center) / h ** 2
    return DiskField(grid, lap, center)


def area_integral(field: DiskField, against_riesz_normalization: bool = False):
    """``iint f r dr dtheta``: Simpson in r, trapezoid in theta.

    With ``against_riesz_normalization`` the result is divided by ``2 pi`` so
    that integrating a classical Laplacian gives the normalized Riesz mass.
    """
    grid = field.grid
    if not field.is_finite():
        raise ValueError("area_integral of a field with a pole at the center")
    ring_means = np.mean(field.full(), axis=1)
    radial = simpson(ring_means * grid.nodes, x=grid.nodes)
    total = TWO_PI * radial
    if against_riesz_normalization:
        total /= TWO_PI
    return complex(total) if np.iscomplexobj(total) else float(total)


def analytic_completion(bf: CircleFunction) -> CircleFunction:
    """``bf + i * conjugate(bf)``: keep ``c_0``, double ``c_m`` for m > 0, drop m < 0.

    The Nyquist bin is dropped as well, so the result is a polynomial in
    ``e^{i theta}`` of degree below ``n/2``.
    """
    if not bf.is_real:
        raise TypeError("analytic_completion expects a real-valued CircleFunction")
    n = bf.grid.n_angles
    c = np.fft.fft(bf.values)
    mult = np.zeros(n)
    mult[0] = 1.0
    mult[1:n // 2] = 2.0
    return CircleFunction(bf.grid, np.fft.ifft(c * mult))


def analytic_part(bf: CircleFunction) -> CircleFunction:
    """Projection onto frequencies ``0 <= m < n/2`` (the Szego projection on the grid)."""
    n = bf.grid.n_angles
    c = np.fft.fft(bf.values)
    c[n // 2:] = 0.0
    return CircleFunction(bf.grid, np.fft.ifft(c))
