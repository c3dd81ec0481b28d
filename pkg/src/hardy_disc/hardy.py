"""Analytic functions on the disk, outer and inner factors, weighted Hardy spaces.

An :class:`AnalyticFunction` carries truncated Taylor coefficients (degrees
``0 .. n/2 - 1``) together with boundary samples on an :class:`AngleGrid`.
Factors with a closed form (Blaschke products, singular inner functions,
outer functions) also keep an exact evaluator, which is used for values
inside the disk and on refined boundary grids.

A :class:`HardyContext` couples a boundary weight ``V >= 1`` with the outer
function ``phi`` satisfying ``|phi|^2 V = 1`` on the circle. Powers of ``phi``
use the zero-free branch ``exp(s log phi)`` normalized by ``phi(0) > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .disc import AngleGrid, CircleFunction, analytic_completion, boundary_integral

__all__ = [
    "AnalyticFunction",
    "Factorization",
    "HardyContext",
    "MembershipReport",
    "BranchError",
    "sgn",
    "outer_from_modulus",
    "context_from_weight",
    "context_from_phi",
    "blaschke",
    "singular_inner",
    "compose_factorization",
    "recover_outer_part",
    "weighted_norm",
    "classical_norm",
    "membership",
    "transfer_to_classical",
    "transfer_from_classical",
    "transfer_lp",
    "is_outer",
]

ATOM_EXCLUSION = 1e-9
# boundary samples of phi below this fraction of max |phi| count as zeros
_ZERO_TOL = 1e-12


class BranchError(ValueError):
    """A power or logarithm of a function with zeros was requested."""


def sgn(alpha):
    """``|alpha| / alpha`` with ``sgn(0) = 0``."""
    alpha = np.asarray(alpha, dtype=complex)
    out = np.zeros_like(alpha)
    nz = alpha != 0
    out[nz] = np.abs(alpha[nz]) / alpha[nz]
    return out


@dataclass(frozen=True)
class Factorization:
    blaschke_zeros: tuple = ()
    singular_atoms: tuple = ()
    outer_log_modulus: CircleFunction | None = None


def _taylor_from_boundary(values: np.ndarray) -> np.ndarray:
    n = values.size
    return np.fft.fft(values)[: n // 2] / n


def _boundary_from_taylor(taylor: np.ndarray, n: int) -> np.ndarray:
    c = np.zeros(n, dtype=complex)
    c[: taylor.size] = taylor
    return np.fft.ifft(c) * n


def _taylor_from_func(func, grid: AngleGrid, rho: float) -> np.ndarray:
    """Coefficients from samples on the circle ``|z| = rho``."""
    n = grid.n_angles
    vals = func(rho * np.exp(1j * grid.theta))
    c = np.fft.fft(vals)[: n // 2] / n
    return c / rho ** np.arange(n // 2)


class AnalyticFunction:
    """Element of a Hardy space on the grid: Taylor coefficients and boundary samples.

    Parameters
    ----------
    taylor : array_like
        Coefficients ``a_0 .. a_N`` with ``N < n/2``.
    boundary : CircleFunction
        Nontangential boundary values on the grid.
    factored : Factorization, optional
        Blaschke zeros, singular atoms and the log-modulus of the outer part.
    func : callable, optional
        Exact evaluator on the closed disk (used in preference to the series).
    excluded : array_like of bool, optional
        Boundary samples that are not meaningful (atom angles, boundary zeros).
    """

    __slots__ = ("taylor", "boundary", "factored", "func", "excluded")

    def __init__(self, taylor, boundary: CircleFunction, factored: Factorization | None = None,
                 func: Callable | None = None, excluded=None):
        taylor = np.asarray(taylor, dtype=complex)
        n = boundary.grid.n_angles
        if taylor.ndim != 1 or taylor.size > n // 2:
            raise ValueError(f"at most {n // 2} Taylor coefficients fit on a grid of {n} angles")
        if excluded is None:
            excluded = ~np.isfinite(boundary.values)
        excluded = np.asarray(excluded, dtype=bool)
        if factored is not None:
            for z in factored.blaschke_zeros:
                if abs(z) >= 1:
                    raise ValueError(f"Blaschke zero {z} is not inside the disk")
        for name, val in (("taylor", taylor), ("excluded", excluded)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "factored", factored)
        object.__setattr__(self, "func", func)

    def __setattr__(self, name, value):
        raise AttributeError("AnalyticFunction is immutable")

    # construction ----------------------------------------------------------------
    @classmethod
    def from_taylor(cls, coeffs, grid: AngleGrid) -> "AnalyticFunction":
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.size > grid.n_angles // 2:
            raise ValueError("polynomial degree too high for the grid (aliasing)")
        b = CircleFunction(grid, _boundary_from_taylor(coeffs, grid.n_angles))
        c = coeffs.copy()
        return cls(c, b, func=lambda z: np.polynomial.polynomial.polyval(z, c))

    @classmethod
    def from_func(cls, func, grid: AngleGrid, rho: float = 1.0, **kw) -> "AnalyticFunction":
        """Wrap an exact evaluator; Taylor coefficients come from the circle ``|z| = rho``."""
        boundary = CircleFunction(grid, func(np.exp(1j * grid.theta)))
        if rho == 1.0:
            vals = np.where(np.isfinite(boundary.values), boundary.values, 0.0)
            taylor = _taylor_from_boundary(vals)
        else:
            taylor = _taylor_from_func(func, grid, rho)
        return cls(taylor, boundary, func=func, **kw)

    @classmethod
    def constant(cls, grid: AngleGrid, value=1.0) -> "AnalyticFunction":
        return cls.from_taylor([value], grid)

    # views ------------------------------------------------------------------------
    @property
    def grid(self) -> AngleGrid:
        return self.boundary.grid

    @property
    def degree_bound(self) -> int:
        return self.taylor.size - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.func is not None:
            return self.func(z)
        return np.polynomial.polynomial.polyval(z, self.taylor)

    def at_zero(self) -> complex:
        return complex(self(np.array(0j)))

    def boundary_at(self, grid: AngleGrid) -> np.ndarray:
        """Boundary samples on another grid (exact if an evaluator is known)."""
        if grid == self.grid:
            return self.boundary.values
        return self(np.exp(1j * grid.theta))

    def negative_frequency_residual(self) -> float:
        """Largest negative-frequency coefficient of the boundary data."""
        if np.any(self.excluded):
            raise ValueError("boundary has excluded samples; Fourier test undefined")
        c = self.boundary.fft_coefficients()
        n = c.size
        return float(np.max(np.abs(c[n // 2 + 1:]))) if n > 2 else 0.0

    def modulus_residual(self) -> float:
        """Factored-form check: ``|boundary|`` against ``exp(outer_log_modulus)``."""
        if self.factored is None or self.factored.outer_log_modulus is None:
            raise ValueError("no factored form")
        ok = ~self.excluded
        lhs = np.abs(self.boundary.values[ok])
        rhs = np.exp(self.factored.outer_log_modulus.values[ok])
        return float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)))

    def __mul__(self, other):
        if isinstance(other, AnalyticFunction):
            if other.grid != self.grid:
                raise ValueError("grid mismatch")
            n = self.grid.n_angles
            taylor = np.convolve(self.taylor, other.taylor)[: n // 2]
            func = None
            if self.func is not None and other.func is not None:
                f, g = self.func, other.func
                func = lambda z: f(z) * g(z)  # noqa: E731
            return AnalyticFunction(taylor, self.boundary * other.boundary,
                                    _merge_factored(self.factored, other.factored),
                                    func, self.excluded | other.excluded)
        if np.isscalar(other):
            f = self.func
            fac = self.factored
            if fac is not None and fac.outer_log_modulus is not None:
                fac = Factorization(fac.blaschke_zeros, fac.singular_atoms,
                                    fac.outer_log_modulus + float(np.log(abs(other))))
            return AnalyticFunction(self.taylor * other, self.boundary * other, fac,
                                    None if f is None else (lambda z: other * f(z)),
                                    self.excluded)
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        k = max(self.taylor.size, other.taylor.size)
        a = np.zeros(k, complex)
        b = np.zeros(k, complex)
        a[: self.taylor.size] = self.taylor
        b[: other.taylor.size] = other.taylor
        func = None
        if self.func is not None and other.func is not None:
            f, g = self.func, other.func
            func = lambda z: f(z) + g(z)  # noqa: E731
        return AnalyticFunction(a + b, self.boundary + other.boundary, None, func,
                                self.excluded | other.excluded)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __repr__(self):
        return f"AnalyticFunction(n_angles={self.grid.n_angles}, a0={self.taylor[0]:.6g})"


def _merge_factored(a: Factorization | None, b: Factorization | None):
    if a is None or b is None:
        return None
    if a.outer_log_modulus is None or b.outer_log_modulus is None:
        olm = None
    else:
        olm = a.outer_log_modulus + b.outer_log_modulus
    return Factorization(tuple(a.blaschke_zeros) + tuple(b.blaschke_zeros),
                         tuple(a.singular_atoms) + tuple(b.singular_atoms), olm)


# classical factors ---------------------------------------------------------------

def outer_from_modulus(w: CircleFunction) -> AnalyticFunction:
    """Outer function with boundary modulus ``w``, positive at the origin."""
    vals = np.asarray(w.values)
    if np.iscomplexobj(vals) or np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("modulus must be real, finite and strictly positive")
    log_w = w.apply(np.log)
    return _outer_from_log(log_w)


def _outer_from_log(log_w: CircleFunction, scale: complex = 1.0) -> AnalyticFunction:
    comp = analytic_completion(log_w)
    boundary = CircleFunction(log_w.grid, scale * np.exp(comp.values))
    coeffs = np.fft.fft(comp.values) / log_w.grid.n_angles
    ell = coeffs[: log_w.grid.n_angles // 2].copy()

    def func(z):
        return scale * np.exp(np.polynomial.polynomial.polyval(z, ell))

    taylor = _taylor_from_boundary(boundary.values)
    fac = Factorization((), (), log_w + float(np.log(abs(scale))))
    return AnalyticFunction(taylor, boundary, fac, func)


def blaschke(zeros, grid: AngleGrid) -> AnalyticFunction:
    """Finite Blaschke product, factor ``z`` for a zero at the origin."""
    zeros = tuple(complex(z) for z in zeros)
    for z in zeros:
        if abs(z) >= 1:
            raise ValueError(f"zero {z} is not inside the open disk")

    def func(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for a in zeros:
            if a == 0:
                out = out * z
            else:
                out = out * (abs(a) / a) * (a - z) / (1 - np.conj(a) * z)
        return out

    f = AnalyticFunction.from_func(func, grid)
    fac = Factorization(zeros, (), CircleFunction.constant(grid, 0.0))
    return AnalyticFunction(f.taylor, f.boundary, fac, func)


def singular_inner(atoms, grid: AngleGrid) -> AnalyticFunction:
    """``exp(-sum m_k (zeta_k + z) / (zeta_k - z))`` for point masses on the circle.

    Boundary samples closer than ``ATOM_EXCLUSION`` to an atom are marked
    excluded. Taylor coefficients are taken from a circle inside the disk,
    since the boundary values oscillate without bound near an atom.
    """
    atoms = tuple((float(t), float(m)) for t, m in atoms)
    for _, m in atoms:
        if m < 0:
            raise ValueError("singular masses must be non-negative")
    zetas = [(np.exp(1j * t), m) for t, m in atoms]

    def func(z):
        z = np.asarray(z, dtype=complex)
        expo = np.zeros_like(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            for zeta, m in zetas:
                expo = expo - m * (zeta + z) / (zeta - z)
            return np.exp(expo)

    theta = grid.theta
    excluded = np.zeros(grid.n_angles, dtype=bool)
    for t, _ in atoms:
        d = np.abs(np.angle(np.exp(1j * (theta - t))))
        excluded |= d < ATOM_EXCLUSION
    boundary = CircleFunction(grid, np.where(excluded, 0.0, func(np.exp(1j * theta))))
    # aliasing decays like rho^n; amplification of high coefficients like rho^(-n/2)
    rho = 1.0 - 24.0 / grid.n_angles if atoms else 1.0
    taylor = _taylor_from_func(func, grid, rho) if atoms else np.array([1.0 + 0j])
    fac = Factorization((), atoms, CircleFunction.constant(grid, 0.0))
    return AnalyticFunction(taylor, boundary, fac, func, excluded)


def is_outer(f: AnalyticFunction) -> float:
    """``|log|f(0)| - mean log|f*||``; small values certify outerness on the grid."""
    f0 = f.at_zero()
    if f0 == 0:
        raise ValueError("f(0) = 0: not an outer function")
    ok = ~f.excluded & (f.boundary.values != 0)
    mean_log = float(np.sum(np.log(np.abs(f.boundary.values[ok])))) / f.grid.n_angles
    return abs(float(np.log(abs(f0))) - mean_log)


# contexts ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HardyContext:
    """Weight ``V >= 1``, its u-inner outer function ``phi`` and the exponent ``p``.

    ``scale`` is the factor applied to the input weight to reach ``min V = 1``.
    ``bounded`` is False for weights with boundary singularities, where only
    finite samples are used in quadratures. ``mass`` is ``int V dnu`` or
    ``inf`` when refinement shows divergence.
    """

    weight: CircleFunction
    phi: AnalyticFunction
    p: float
    scale: float = 1.0
    bounded: bool = True
    mass: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.p < np.inf:
            raise ValueError("p must lie in [1, inf)")
        fin = np.isfinite(self.weight.values)
        if np.min(self.weight.values[fin]) < 1 - 1e-12:
            raise ValueError("weight must be >= 1")

    @property
    def grid(self) -> AngleGrid:
        return self.weight.grid

    @property
    def sgn_convention(self):
        return sgn

    @property
    def excluded(self) -> np.ndarray:
        return ~np.isfinite(self.weight.values) | self.phi.excluded

    def inner_identity_residual(self) -> float:
        ok = ~self.excluded
        prod = np.abs(self.phi.boundary.values[ok]) ** 2 * self.weight.values[ok]
        return float(np.max(np.abs(prod - 1.0)))

    def weight_at(self, grid: AngleGrid) -> np.ndarray:
        if grid == self.grid:
            return self.weight.values
        mod = np.abs(self.phi.boundary_at(grid))
        with np.errstate(divide="ignore"):
            return np.where(mod > _ZERO_TOL * np.max(mod), 1.0 / mod ** 2, np.inf)

    def log_phi(self) -> CircleFunction:
        """Boundary values of the analytic branch of ``log phi``."""
        return _boundary_log(self.phi)

    def phi_power(self, s: float) -> AnalyticFunction:
        """``phi^s = exp(s log phi)``."""
        return _power(self.phi, s)


def _boundary_log(phi: AnalyticFunction) -> CircleFunction:
    vals = phi.boundary.values
    grid = phi.grid
    fac = phi.factored
    f0 = phi.at_zero()
    if f0 == 0:
        raise BranchError("phi(0) = 0")
    arg0 = float(np.angle(f0))
    finite = ~phi.excluded & (vals != 0) & np.isfinite(vals)
    if fac is not None and fac.outer_log_modulus is not None and np.all(finite) \
            and not fac.blaschke_zeros and not fac.singular_atoms:
        comp = analytic_completion(fac.outer_log_modulus)
        return CircleFunction(grid, comp.values + 1j * arg0)
    # boundary zeros: unwrap the argument over the finite samples and fix the
    # 2 pi ambiguity by the mean value property of Im log phi
    out = np.full(vals.shape, -np.inf + 0j)
    arg = np.unwrap(np.angle(vals[finite]))
    k = np.round((arg0 - np.mean(arg)) / (2 * np.pi))
    arg = arg + 2 * np.pi * k
    out[finite] = np.log(np.abs(vals[finite])) + 1j * arg
    return CircleFunction(grid, out)


def _power(phi: AnalyticFunction, s: float) -> AnalyticFunction:
    if s == 1.0:
        return phi
    log_phi = _boundary_log(phi)
    grid = phi.grid
    finite = np.isfinite(log_phi.values)
    bvals = np.where(finite, np.exp(s * np.where(finite, log_phi.values, 0.0)), 0.0)
    boundary = CircleFunction(grid, bvals)
    fac = None
    func = None
    if phi.factored is not None and phi.factored.outer_log_modulus is not None and np.all(finite):
        fac = Factorization((), (), s * phi.factored.outer_log_modulus)
        ell = np.fft.fft(log_phi.values)[: grid.n_angles // 2] / grid.n_angles

        def func(z):
            return np.exp(s * np.polynomial.polynomial.polyval(z, ell))
    elif phi.func is not None:
        # continuation of the branch from the origin along rays
        f = phi.func
        a0 = np.log(phi.at_zero())

        def func(z):
            z = np.asarray(z, dtype=complex)
            t = np.linspace(0.0, 1.0, 257)
            path = f(np.multiply.outer(z, t))
            steps = np.angle(path[..., 1:] / path[..., :-1])
            arg = np.imag(a0) + np.sum(steps, axis=-1)
            return np.exp(s * (np.log(np.abs(path[..., -1])) + 1j * arg))
    taylor = _taylor_from_boundary(bvals)
    return AnalyticFunction(taylor, boundary, fac, func, ~finite | phi.excluded)


def _positive_at_zero(phi: AnalyticFunction) -> AnalyticFunction:
    f0 = phi.at_zero()
    if f0 == 0:
        raise BranchError("phi vanishes at the origin")
    rot = abs(f0) / f0
    return phi if abs(rot - 1) < 1e-15 else rot * phi


def context_from_weight(V: CircleFunction, p: float = 2.0) -> HardyContext:
    """Context of a bounded weight: ``phi = outer(V^{-1/2})``, rescaled so ``min V = 1``."""
    vals = np.asarray(V.values)
    if np.iscomplexobj(vals) or np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("weight must be finite and strictly positive (log V integrable)")
    m = float(np.min(vals))
    scale = 1.0 / m if m < 1 else 1.0
    W = V * scale
    log_phi_mod = W.apply(np.log) * -0.5
    phi = _outer_from_log(log_phi_mod)
    return HardyContext(W, phi, float(p), scale, True, float(boundary_integral(W)))


def _winding_number(phi: AnalyticFunction, n: int) -> int:
    rho = 1.0 - 4.0 / n
    t = np.linspace(0.0, 2 * np.pi, 16 * n, endpoint=False)
    vals = phi(rho * np.exp(1j * t))
    if np.any(vals == 0):
        return -1
    steps = np.angle(np.roll(vals, -1) / vals)
    return int(round(float(np.sum(steps)) / (2 * np.pi)))


def _weight_mass_ratio(phi: AnalyticFunction, grid: AngleGrid, levels: int = 3):
    masses = []
    g = grid
    for _ in range(levels):
        mod = np.abs(phi.boundary_at(g))
        with np.errstate(divide="ignore"):
            v = np.where(mod > _ZERO_TOL * np.max(mod), 1.0 / mod ** 2, np.inf)
        masses.append(float(np.sum(v[np.isfinite(v)])) / g.n_angles)
        g = g.refined()
    return masses


def _diverges(values, ratio: float = 1.25) -> bool:
    return all(b > ratio * a for a, b in zip(values, values[1:]))


def context_from_phi(phi: AnalyticFunction, p: float = 2.0, *, depth: int = 3,
                     build_exhaustion: bool = True, grid=None):
    """Context and exhaustion for a zero-free ``phi`` with bounded boundary modulus.

    ``V = 1 / |phi*|^2``. Bounded weights go through the smooth construction;
    weights with boundary singularities (E-only mode) use the truncated
    monotone construction on ``1 / (|phi*|^2 + 4^{-k} / 2)`` and report mass ``inf``
    when the boundary quadrature of ``V`` keeps growing under refinement.
    """
    from .exhaustion import construct_exhaustion_c2, construct_exhaustion_lsc

    n = phi.grid.n_angles
    if _winding_number(phi, n) != 0:
        raise ValueError("phi has zeros in the disk (argument principle)")
    mod = np.abs(phi.boundary.values)
    if not np.all(np.isfinite(mod)):
        raise ValueError("boundary modulus of phi must be bounded")
    tiny = _ZERO_TOL * float(np.max(mod))
    bounded = bool(np.all(mod > tiny))
    phi = _positive_at_zero(phi)
    if bounded:
        res = is_outer(phi)
        if res > 1e-6:
            raise ValueError(f"phi is not outer (residual {res:.2e})")
        phi = AnalyticFunction(phi.taylor, phi.boundary,
                               Factorization((), (), CircleFunction(phi.grid, np.log(mod))),
                               phi.func, phi.excluded)
    with np.errstate(divide="ignore"):
        V = np.where(mod > tiny, 1.0 / mod ** 2, np.inf)
    m = float(np.min(V))
    scale = 1.0 / m if m < 1 else 1.0
    if scale != 1.0:
        phi = phi * float(1.0 / np.sqrt(scale))
    W = CircleFunction(phi.grid, V * scale)
    masses = _weight_mass_ratio(phi, phi.grid)
    diverging = (not bounded) and _diverges(masses)
    mass = float("inf") if diverging else masses[-1]
    ctx = HardyContext(W, phi, float(p), scale, bounded, mass,
                       {"mass_refinement": masses, "divergent": diverging})
    if not build_exhaustion:
        return ctx, None
    if bounded:
        e = construct_exhaustion_c2(W, grid)
    else:
        mod2 = np.abs(phi.boundary.values) ** 2
        seq = [CircleFunction(phi.grid, 1.0 / (mod2 + 0.5 * 4.0 ** -k)) for k in range(depth)]
        e = construct_exhaustion_lsc(seq, depth, grid)
        if diverging:
            from dataclasses import replace
            e = replace(e, mass_override=float("inf"))
    return ctx, e


# factorization ----------------------------------------------------------------------

def compose_factorization(B: AnalyticFunction, S: AnalyticFunction, ctx: HardyContext,
                          F: AnalyticFunction) -> AnalyticFunction:
    """``f = B S phi^{2/p} F``."""
    return B * S * ctx.phi_power(2.0 / ctx.p) * F


def recover_outer_part(f: AnalyticFunction, B: AnalyticFunction, S: AnalyticFunction,
                       ctx: HardyContext, *, max_excluded: float = 0.05,
                       check: bool = True) -> AnalyticFunction:
    """``F = f / (B S phi^{2/p})`` on the boundary samples.

    Samples where ``|B S|`` is below ``1e-8`` or that are excluded in any
    factor are dropped and listed in ``F.excluded``; the Taylor coefficients
    of ``F`` come from the remaining samples (excluded ones filled by
    trigonometric interpolation of the rest is not attempted, so the
    analyticity check requires an empty exclusion list).
    """
    denom = B * S * ctx.phi_power(2.0 / ctx.p)
    dv = denom.boundary.values
    bad = f.excluded | denom.excluded | (np.abs(dv) < 1e-8)
    if bad.mean() > max_excluded:
        raise ValueError(f"{int(bad.sum())} boundary samples excluded; too many to recover F")
    vals = np.zeros_like(dv)
    vals[~bad] = f.boundary.values[~bad] / dv[~bad]
    boundary = CircleFunction(f.grid, vals)
    taylor = _taylor_from_boundary(vals)
    F = AnalyticFunction(taylor, boundary, excluded=bad)
    if check and not bad.any():
        res = F.negative_frequency_residual()
        scale = max(1.0, float(np.max(np.abs(vals))))
        if res > 1e-8 * scale:
            raise ValueError(f"recovered F is not analytic (negative frequencies {res:.2e})")
        if F.at_zero() != 0:
            r = is_outer(F)
            if r > 1e-6:
                raise ValueError(f"recovered F is not outer (residual {r:.2e})")
    return F


# norms and isometries ------------------------------------------------------------

def classical_norm(f, p: float, excluded=None) -> float:
    """``L^p(dnu)`` norm of boundary samples (CircleFunction or AnalyticFunction)."""
    vals = f.boundary.values if isinstance(f, AnalyticFunction) else f.values
    if excluded is None:
        excluded = f.excluded if isinstance(f, AnalyticFunction) else np.zeros(vals.size, bool)
    ok = ~np.asarray(excluded)
    n = vals.size
    if np.isinf(p):
        return float(np.max(np.abs(vals[ok])))
    return float((np.sum(np.abs(vals[ok]) ** p) / n) ** (1.0 / p))


def weighted_norm(f, ctx: HardyContext, p: float | None = None) -> float:
    """``(int |f*|^p V dnu)^{1/p}`` over the non-excluded samples."""
    p = ctx.p if p is None else p
    vals = f.boundary.values if isinstance(f, AnalyticFunction) else f.values
    excl = ctx.excluded.copy()
    if isinstance(f, AnalyticFunction):
        excl |= f.excluded
    ok = ~excl
    s = np.sum(np.abs(vals[ok]) ** p * ctx.weight.values[ok]) / vals.size
    return float(s ** (1.0 / p))


@dataclass(frozen=True)
class MembershipReport:
    classical_norm: float
    weighted_norm: float
    refinement: tuple
    divergent: bool
    excluded: tuple

    @property
    def member(self) -> bool:
        return not self.divergent and np.isfinite(self.weighted_norm)


def membership(f: AnalyticFunction, ctx: HardyContext, levels: int = 3) -> MembershipReport:
    """Classical and weighted norms, plus a divergence flag from grid refinement."""
    p = ctx.p
    seq = []
    g = f.grid
    for _ in range(levels):
        fv = f.boundary_at(g)
        V = ctx.weight_at(g) if g != ctx.grid else ctx.weight.values
        with np.errstate(invalid="ignore"):
            integrand = np.abs(fv) ** p * V
        ok = np.isfinite(integrand)
        seq.append(float(np.sum(integrand[ok]) / g.n_angles))
        g = g.refined()
    divergent = _diverges(seq)
    return MembershipReport(classical_norm(f, p), weighted_norm(f, ctx),
                            tuple(seq), divergent,
                            tuple(np.flatnonzero(ctx.excluded | f.excluded)))


def transfer_to_classical(f: AnalyticFunction, ctx: HardyContext) -> AnalyticFunction:
    """``F = phi^{-2/p} f``, an isometry of ``H^p_u`` onto ``H^p``."""
    return f * ctx.phi_power(-2.0 / ctx.p)


def transfer_from_classical(F: AnalyticFunction, ctx: HardyContext) -> AnalyticFunction:
    return F * ctx.phi_power(2.0 / ctx.p)


def transfer_lp(g: CircleFunction, ctx: HardyContext, direction: str = "to_classical",
                p: float | None = None) -> CircleFunction:
    """Multiply (``from_classical``) or divide (``to_classical``) by ``phi^{2/p}``."""
    p = ctx.p if p is None else p
    w = ctx.phi_power(2.0 / p).boundary.values
    if direction == "to_classical":
        with np.errstate(divide="ignore", invalid="ignore"):
            return CircleFunction(g.grid, np.where(w != 0, g.values / np.where(w != 0, w, 1), 0))
    if direction == "from_classical":
        return CircleFunction(g.grid, g.values * w)
    raise ValueError("direction must be 'to_classical' or 'from_classical'")
