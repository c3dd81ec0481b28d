"""Linear functionals on weighted Hardy spaces and the extremal problem pair.

Everything is transferred to the classical side first: ``f = phi^{2/p} F``
and ``g = phi^{2/q} sgn(phi^2) G`` give ``f g V = F G`` on the circle, so the
weighted problems reduce to problems for ``F`` and ``G`` on ``L^p(dnu)``.
All integrals use the normalized measure ``dnu = dtheta / 2 pi``.

The primal problem
    Lambda = sup |lambda(F)|,  lambda(F) = int F G e^{i theta} dnu,  ||F||_p <= 1
is solved over polynomials of degree ``<= N`` in its min-norm form
    1 / Lambda_N = min { ||F||_p : lambda(F) = 1 },
and the dual problem
    Gamma = inf { ||G - H||_q : H analytic }
over polynomials ``H`` of degree ``<= N`` by iteratively reweighted least
squares. ``Lambda_N`` increases and ``Gamma_N`` decreases with ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .disc import CircleFunction
from .hardy import (
    AnalyticFunction,
    HardyContext,
    classical_norm,
    membership,
    sgn,
    transfer_to_classical,
    weighted_norm,
)

WEIGHT_CLIP = (1e-8, 1e8)


def conjugate_exponent(p: float) -> float:
    if p < 1:
        raise ValueError("exponent must be >= 1")
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_conjugate(p: float, q: float):
    lhs = (0.0 if np.isinf(p) else 1.0 / p) + (0.0 if np.isinf(q) else 1.0 / q)
    if abs(lhs - 1.0) > 1e-12:
        raise ValueError(f"exponents p={p}, q={q} are not conjugate")


@dataclass(frozen=True, eq=False)
class BoundaryFunctional:
    """``g`` in ``L^q(V dnu)`` with its classical transfer ``G``."""

    g: CircleFunction
    G: CircleFunction
    q: float
    ctx: HardyContext

    def __post_init__(self):
        _check_conjugate(self.ctx.p, self.q)

    @property
    def p(self) -> float:
        return self.ctx.p

    @classmethod
    def from_classical(cls, G: CircleFunction, ctx: HardyContext) -> "BoundaryFunctional":
        """``g = phi^{2/q} sgn(phi^2) G``."""
        q = conjugate_exponent(ctx.p)
        s = 0.0 if np.isinf(q) else 2.0 / q
        phi_b = ctx.phi.boundary.values
        factor = ctx.phi_power(s).boundary.values * sgn(phi_b ** 2)
        return cls(CircleFunction(G.grid, factor * G.values), G, q, ctx)

    def transfer_error(self) -> float:
        """``| ||g||_{L^q(V dnu)} - ||G||_q |``."""
        if np.isinf(self.q):
            lhs = classical_norm(self.g, np.inf, self.ctx.excluded)
        else:
            lhs = weighted_norm(self.g, self.ctx, self.q)
        return abs(lhs - classical_norm(self.G, self.q, self.ctx.excluded))


@dataclass(frozen=True, eq=False)
class ExtremalSolution:
    lambda_value: float
    gamma_value: float
    maximizer: AnalyticFunction | None
    minimizer: AnalyticFunction | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return abs(self.lambda_value - self.gamma_value)

    @property
    def weak_duality_ok(self) -> bool:
        return self.lambda_value <= self.gamma_value + 1e-6

    @property
    def certified(self) -> bool:
        return bool(self.diagnostics.get("certified", False))


# functionals ----------------------------------------------------------------------

def functional_LG(G: CircleFunction, f: AnalyticFunction, ctx: HardyContext,
                  q: float | None = None) -> complex:
    """``L_G(f) = int F G dnu`` with ``F`` the classical transfer of ``f``."""
    q = conjugate_exponent(ctx.p) if q is None else q
    _check_conjugate(ctx.p, q)
    F = transfer_to_classical(f, ctx)
    ok = ~(F.excluded | ctx.excluded)
    return complex(np.sum(F.boundary.values[ok] * G.values[ok]) / G.grid.n_angles)


@dataclass(frozen=True)
class AnnihilatorReport:
    residual: float
    transfer_error: float


def annihilator_check(G: AnalyticFunction, test_set, ctx: HardyContext) -> AnnihilatorReport:
    """Orthogonality of ``g = phi^{2/q} sgn(phi^2) G`` to ``H^p_u`` when ``G(0) = 0``."""
    if abs(G.at_zero()) > 1e-12:
        raise ValueError("G(0) must vanish")
    bf = BoundaryFunctional.from_classical(G.boundary, ctx)
    n = G.grid.n_angles
    ok = ~ctx.excluded
    res = 0.0
    for f in test_set:
        keep = ok & ~f.excluded
        val = np.sum((f.boundary.values * bf.g.values * ctx.weight.values)[keep]) / n
        res = max(res, abs(val))
    return AnnihilatorReport(float(res), bf.transfer_error())


def lambda_functional(f: AnalyticFunction, bf: BoundaryFunctional) -> complex:
    """``lambda(f) = int F G e^{i theta} dnu``."""
    F = transfer_to_classical(f, bf.ctx)
    grid = bf.G.grid
    ok = ~(F.excluded | bf.ctx.excluded)
    vals = F.boundary.values * bf.G.values * np.exp(1j * grid.theta)
    return complex(np.sum(vals[ok]) / grid.n_angles)


def predual_pairing(G_rep: AnalyticFunction, coset_rep: CircleFunction, ctx: HardyContext) -> complex:
    """``int [f phi^{-2/q}] [G phi^{-2/p}] dnu`` for ``G`` in ``H^p_u`` and ``f`` in ``L^q_u``."""
    q = conjugate_exponent(ctx.p)
    if np.isinf(q):
        raise ValueError("predual pairing needs q < inf")
    rep = membership(G_rep, ctx)
    if rep.divergent:
        raise ValueError("G is not in H^p_u (weighted norm diverges under refinement)")
    a = ctx.phi_power(-2.0 / q).boundary.values * coset_rep.values
    b = ctx.phi_power(-2.0 / ctx.p).boundary.values * G_rep.boundary.values
    ok = ~(ctx.excluded | G_rep.excluded)
    return complex(np.sum((a * b)[ok]) / coset_rep.grid.n_angles)


# solvers ---------------------------------------------------------------------------

def _basis(grid, N: int) -> np.ndarray:
    return np.exp(1j * np.multiply.outer(grid.theta, np.arange(N + 1)))


def _tail(bf: BoundaryFunctional, N: int) -> np.ndarray:
    """``gamma_n = lambda(z^n)`` for ``n = 0..N``: the coefficients ``G_hat(-1-n)``."""
    grid = bf.G.grid
    E = _basis(grid, N)
    w = bf.G.values * np.exp(1j * grid.theta)
    return E.T @ w / grid.n_angles


def _lp_mean(F: np.ndarray, p: float) -> float:
    return float(np.mean(np.abs(F) ** p))


def _primal_min_norm(E, gamma, p, x0, iterations):
    """Minimize ``mean |E a|^p`` subject to ``gamma . a = 1``."""
    k = gamma.size
    a0 = np.conj(gamma) / np.vdot(gamma, gamma).real
    # orthonormal basis of {a : gamma . a = 0}
    _, _, vh = np.linalg.svd(gamma[None, :])
    Z = np.conj(vh[1:].T)  # (k, k-1)
    if k == 1:
        return a0, {"iterations": 0, "converged": True, "message": "fixed"}
    EZ = E @ Z
    F0 = E @ a0
    m = E.shape[0]

    def fun(x):
        xc = x[: k - 1] + 1j * x[k - 1:]
        F = F0 + EZ @ xc
        absF = np.abs(F)
        val = np.mean(absF ** p)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(absF > 0, absF ** (p - 2), 0.0) if p < 2 else absF ** (p - 2)
        g = (p / 2.0) * (EZ.conj().T @ (w * F)) / m
        return val, np.concatenate([2 * g.real, 2 * g.imag])

    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": iterations, "maxcor": 30, "ftol": 1e-16, "gtol": 1e-13})
    xc = res.x[: k - 1] + 1j * res.x[k - 1:]
    return a0 + Z @ xc, {"iterations": int(res.nit), "converged": bool(res.success),
                         "message": str(res.message), "grad_norm": float(np.linalg.norm(res.jac))}


def primal_extremal(bf: BoundaryFunctional, N: int = 32, iterations: int = 5000,
                    seed: int | None = 0, init: str = "closed_form"):
    """``Lambda_N`` and the normalized maximizer ``f = phi^{2/p} F`` (``lambda(f) > 0``).

    Returns ``(lambda_value, maximizer, diagnostics)``. ``init`` is
    ``"closed_form"`` (the ``p = 2`` solution) or ``"random"``.
    """
    p = bf.p
    grid = bf.G.grid
    if 2 * (N + 1) > grid.n_angles:
        raise ValueError("degree too high for the boundary grid")
    gamma = _tail(bf, N)
    diag = {"p": p, "N": N, "seed": seed, "certified": p > 1}
    if p == 1:
        diag["caveat"] = "p = 1: extremal functions exist only under continuity of G"
    norm_g = float(np.linalg.norm(gamma))
    if norm_g < 1e-14:
        diag.update(iterations=0, converged=True)
        return 0.0, None, diag
    E = _basis(grid, N)
    if p == 2:
        a = np.conj(gamma) / norm_g
        diag.update(iterations=0, converged=True, method="closed form")
        lam = norm_g
    else:
        k = gamma.size
        if init == "random":
            rng = np.random.default_rng(seed)
            x0 = rng.normal(scale=1.0 / norm_g, size=2 * (k - 1))
        else:
            x0 = np.zeros(2 * (k - 1))
        a, info = _primal_min_norm(E, gamma, p, x0, iterations)
        diag.update(info, method="L-BFGS on the min-norm form")
        nrm = _lp_mean(E @ a, p) ** (1.0 / p)
        lam = 1.0 / nrm
        a = a / nrm
        if not info["converged"]:
            diag["certified"] = False
    F = AnalyticFunction.from_taylor(a, grid)
    f = F * bf.ctx.phi_power(2.0 / p)
    diag["lambda_check"] = abs(lambda_functional(f, bf) - lam)
    return float(lam), f, diag


def dual_extremal(bf: BoundaryFunctional, N: int = 32, iterations: int = 5000):
    """``Gamma_N`` and the minimizer ``h = phi^{2/q} sgn(phi^2) H``.

    Returns ``(gamma_value, minimizer, diagnostics)`` where ``minimizer`` is the
    classical best approximant ``H``; the weighted one is in
    ``diagnostics["h"]``.
    """
    q = bf.q
    grid = bf.G.grid
    E = _basis(grid, N)
    Gv = bf.G.values
    m = grid.n_angles
    diag = {"q": q, "N": N, "certified": not np.isinf(q)}
    if q == 2:
        b = E.conj().T @ Gv / m
        val = float(np.sqrt(np.mean(np.abs(Gv - E @ b) ** 2)))
        diag.update(iterations=0, converged=True, method="projection")
    elif np.isinf(q):
        b, val, info = _sup_norm_fit(E, Gv)
        diag.update(info, method="linear programming, polygonal modulus", caveat="q = inf")
    else:
        b, val, info = _irls(E, Gv, q, iterations)
        diag.update(info, method="IRLS")
        if not info["converged"]:
            diag["certified"] = False
    H = AnalyticFunction.from_taylor(b, grid)
    s = 0.0 if np.isinf(q) else 2.0 / q
    hv = bf.ctx.phi_power(s).boundary.values * sgn(bf.ctx.phi.boundary.values ** 2) * H.boundary.values
    diag["h"] = CircleFunction(grid, hv)
    if not np.isinf(q):
        diag["weighted_value"] = weighted_norm(bf.g - diag["h"], bf.ctx, q)
    return float(val), H, diag


def _irls(E, Gv, q, iterations, tol=1e-15):
    m = E.shape[0]
    b = E.conj().T @ Gv / m
    r = Gv - E @ b
    obj = np.mean(np.abs(r) ** q)
    step = 1.0
    it = 0
    converged = False
    stalls = 0
    for it in range(1, iterations + 1):
        w = np.clip(np.abs(r) ** (q - 2), *WEIGHT_CLIP)
        A = (E.conj().T * w) @ E
        rhs = (E.conj().T * w) @ Gv
        b_ls = np.linalg.solve(A, rhs)
        step = min(1.0, 2.0 * step)
        while True:
            b_new = b + step * (b_ls - b)
            r_new = Gv - E @ b_new
            obj_new = np.mean(np.abs(r_new) ** q)
            if obj_new <= obj or step < 1e-8:
                break
            step *= 0.5
        if obj_new > obj:
            stalls += 1
            if stalls > 3:
                break
            continue
        rel = (obj - obj_new) / max(obj, 1e-300)
        b, r, obj = b_new, r_new, obj_new
        if rel < tol:
            converged = True
            break
    return b, float(obj ** (1.0 / q)), {"iterations": it, "converged": converged,
                                       "final_step": step}


def _sup_norm_fit(E, Gv, directions: int = 64):
    """``min_b max |G - E b|`` with the modulus replaced by a regular polygon."""
    m, k = E.shape
    angles = np.pi * 2 * np.arange(directions) / directions
    cos, sin = np.cos(angles), np.sin(angles)
    # variables: Re b (k), Im b (k), t
    Er, Ei = E.real, E.imag
    Gr, Gi = Gv.real, Gv.imag
    rows, rhs = [], []
    for c, s in zip(cos, sin):
        # Re((G - E b) e^{-i a}) <= t
        re_part = np.hstack([-(Er * c + Ei * s), -(-Ei * c + Er * s)])
        rows.append(np.hstack([re_part, -np.ones((m, 1))]))
        rhs.append(-(Gr * c + Gi * s))
    A = np.vstack(rows)
    ub = np.concatenate(rhs)
    cost = np.zeros(2 * k + 1)
    cost[-1] = 1.0
    res = linprog(cost, A_ub=A, b_ub=ub, bounds=[(None, None)] * (2 * k + 1), method="highs")
    b = res.x[:k] + 1j * res.x[k:2 * k]
    val = float(np.max(np.abs(Gv - E @ b)))
    return b, val, {"iterations": int(getattr(res, "nit", 0)), "converged": bool(res.success),
                    "polygon_bound": float(res.x[-1])}


def duality_certificate(bf: BoundaryFunctional, N: int = 32, iterations: int = 5000,
                        seed: int = 0) -> ExtremalSolution:
    """Run both solvers and report the gap, weak duality and a uniqueness probe."""
    lam, f, pdiag = primal_extremal(bf, N, iterations, seed)
    gam, H, ddiag = dual_extremal(bf, N, iterations)
    diag = {"primal": pdiag, "dual": ddiag, "seed": seed,
            "certified": bool(pdiag["certified"] and ddiag["certified"])}
    p = bf.p
    if 1 < p < np.inf and f is not None:
        lam2, f2, _ = primal_extremal(bf, N, iterations, seed + 1, init="random")
        a = transfer_to_classical(f, bf.ctx).taylor
        b = transfer_to_classical(f2, bf.ctx).taylor
        k = min(a.size, b.size, N + 1)
        diag["uniqueness_distance"] = float(np.linalg.norm(a[:k] - b[:k]))
        diag["lambda_second_start"] = lam2
    if lam > gam + 1e-6:
        diag["weak_duality_violation"] = lam - gam
        diag["certified"] = False
    if p == 1 or np.isinf(bf.q):
        diag["certified"] = False
    return ExtremalSolution(lam, gam, f, H, diag)
