import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardy_disc.disc import AngleGrid, CircleFunction
from hardy_disc.exhaustion import weight_balayage
from hardy_disc.hardy import (
    AnalyticFunction,
    BranchError,
    blaschke,
    classical_norm,
    compose_factorization,
    context_from_phi,
    context_from_weight,
    is_outer,
    membership,
    outer_from_modulus,
    recover_outer_part,
    sgn,
    singular_inner,
    transfer_from_classical,
    transfer_lp,
    transfer_to_classical,
    weighted_norm,
)

G = AngleGrid(256)


def _exp_weight(grid=G):
    return CircleFunction.from_function(grid, lambda t: np.exp(2 - 2 * np.cos(t)))


def _rand_poly(rng, deg=8):
    return AnalyticFunction.from_taylor(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1), G)


def test_sgn_convention():
    assert sgn(0) == 0
    assert np.isclose(sgn(2j), -1j)
    assert np.isclose(sgn(-3.0), -1)


def test_analytic_function_from_taylor():
    f = AnalyticFunction.from_taylor([1, 2, 3], G)
    z = 0.3 - 0.4j
    assert f(z) == pytest.approx(1 + 2 * z + 3 * z ** 2)
    assert f.negative_frequency_residual() < 1e-14
    with pytest.raises(ValueError):
        AnalyticFunction.from_taylor(np.ones(200), G)
    with pytest.raises(AttributeError):
        f.taylor = None


def test_outer_from_modulus_trivial():
    o = outer_from_modulus(CircleFunction.constant(G, 1.0))
    assert np.allclose(o.boundary.values, 1.0)


def test_outer_from_modulus_exp():
    o = outer_from_modulus(CircleFunction.from_function(G, lambda t: np.exp(np.cos(t) - 1)))
    assert o.at_zero() == pytest.approx(np.exp(-1), abs=1e-15)
    assert np.max(np.abs(o.boundary.values - np.exp(np.exp(1j * G.theta) - 1))) < 1e-13
    assert o(0.5j) == pytest.approx(np.exp(0.5j - 1))
    assert is_outer(o) < 1e-8
    assert o.negative_frequency_residual() < 1e-10


def test_outer_rejects_zero_modulus():
    with pytest.raises(ValueError):
        outer_from_modulus(CircleFunction.from_function(G, lambda t: 1 - np.cos(t)))


def test_context_trivial_and_exp():
    ctx = context_from_weight(CircleFunction.constant(G, 1.0))
    assert np.allclose(ctx.phi.boundary.values, 1.0)
    ctx = context_from_weight(_exp_weight())
    assert ctx.inner_identity_residual() < 1e-10
    assert np.max(np.abs(ctx.phi.boundary.values - np.exp(np.exp(1j * G.theta) - 1))) < 1e-12
    assert is_outer(ctx.phi) < 1e-6


def test_context_rescales_small_weights():
    ctx = context_from_weight(CircleFunction.from_function(G, lambda t: 0.25 * (2 + np.cos(t))))
    assert ctx.scale == pytest.approx(4.0)
    assert np.min(ctx.weight.values) == pytest.approx(1.0)


def test_context_rejects_vanishing_weight():
    with pytest.raises(ValueError):
        context_from_weight(CircleFunction.from_function(G, lambda t: 1 - np.cos(t)))


def test_context_from_phi_round_trip():
    g = AngleGrid(128)
    phi = AnalyticFunction.from_func(lambda z: np.exp(z - 1), g)
    ctx, e = context_from_phi(phi, 2)
    assert np.max(np.abs(ctx.weight.values - np.exp(2 - 2 * np.cos(g.theta)))) < 1e-12
    back = context_from_weight(weight_balayage(e), 2)
    assert np.max(np.abs(back.phi.boundary.values - phi.boundary.values)) < 1e-4


def test_context_from_phi_rejects_zeros():
    with pytest.raises(ValueError):
        context_from_phi(AnalyticFunction.from_taylor([0.2, 1.0], G), build_exhaustion=False)


def test_context_from_phi_unbounded_weight():
    g = AngleGrid(64)
    half = AnalyticFunction.from_taylor([0.5, 0.5], g)
    ctx, e = context_from_phi(half, 2)
    assert not ctx.bounded
    assert ctx.mass == np.inf and e.total_mass == np.inf
    m = ctx.diagnostics["mass_refinement"]
    assert m[1] / m[0] > 1.9 and m[2] / m[1] > 1.9


def test_blaschke():
    assert np.allclose(blaschke([], G).boundary.values, 1.0)
    z = blaschke([0], G)
    assert z(0.3 + 0.1j) == pytest.approx(0.3 + 0.1j)
    b = blaschke([0.5], G)
    assert b.at_zero() == pytest.approx(0.5)
    assert np.max(np.abs(np.abs(b.boundary.values) - 1)) < 1e-12
    with pytest.raises(ValueError):
        blaschke([1.0], G)


def test_singular_inner():
    assert np.allclose(singular_inner([], G).boundary.values, 1.0)
    s = singular_inner([(0.0, 1.0)], G)
    assert s.at_zero() == pytest.approx(np.exp(-1), abs=1e-15)
    assert s.excluded[0]
    ok = ~s.excluded
    assert np.max(np.abs(np.abs(s.boundary.values[ok]) - 1)) < 1e-9
    # Taylor series agrees with the closed form inside
    assert abs(np.polynomial.polynomial.polyval(0.4, s.taylor) - s(0.4)) < 1e-9
    with pytest.raises(ValueError):
        singular_inner([(0.0, -1.0)], G)


def test_singular_inner_modulus_grows_away_from_atom():
    s = singular_inner([(0.0, 1.0)], G)
    t = np.linspace(0.05, np.pi, 40)
    mod = np.abs(s(0.8 * np.exp(1j * t)))
    assert np.all(np.diff(mod) > 0)


def test_is_outer_examples():
    with pytest.raises(ValueError):
        is_outer(AnalyticFunction.from_taylor([0, 1], G))
    s = singular_inner([(0.1, 1.0)], G)
    assert is_outer(s) == pytest.approx(1.0, abs=1e-6)


def test_compose_trivial():
    ctx = context_from_weight(CircleFunction.constant(G, 1.0))
    F = AnalyticFunction.from_taylor([1, 0.5], G)
    one = AnalyticFunction.constant(G)
    f = compose_factorization(one, one, ctx, F)
    assert np.allclose(f.boundary.values, F.boundary.values)


def test_compose_exp_weight_gives_phi():
    ctx = context_from_weight(_exp_weight(), 2)
    one = AnalyticFunction.constant(G)
    f = compose_factorization(one, one, ctx, one)
    assert np.max(np.abs(f.boundary.values - np.exp(np.exp(1j * G.theta) - 1))) < 1e-12
    assert weighted_norm(f, ctx) == pytest.approx(1.0, abs=1e-12)


def test_recover_z_times_phi_power():
    ctx = context_from_weight(_exp_weight(), 4)
    z = blaschke([0], G)
    one = AnalyticFunction.constant(G)
    f = z * ctx.phi_power(0.5)
    F = recover_outer_part(f, z, one, ctx)
    assert np.max(np.abs(F.boundary.values - 1)) < 1e-12


def test_recover_synthetic_outer():
    ctx = context_from_weight(_exp_weight(), 2)
    rng = np.random.default_rng(3)
    a = 0.2 * rng.normal(size=5)
    logw = lambda t: a[0] + a[1] * np.cos(t) + a[2] * np.sin(t) + a[3] * np.cos(2 * t) + a[4] * np.sin(2 * t)
    F = outer_from_modulus(CircleFunction.from_function(G, lambda t: np.exp(logw(t))))
    B = blaschke([0.3, -0.4j], G)
    S = singular_inner([(1.0, 0.7)], G)
    f = compose_factorization(B, S, ctx, F)
    R = recover_outer_part(f, B, S, ctx, check=False)
    ok = ~R.excluded
    assert np.max(np.abs(R.boundary.values[ok] - F.boundary.values[ok])) < 1e-7


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_norm_invariance_under_inner_factors(p):
    ctx = context_from_weight(_exp_weight(), p)
    rng = np.random.default_rng(int(p))
    F = _rand_poly(rng)
    base = weighted_norm(compose_factorization(AnalyticFunction.constant(G), AnalyticFunction.constant(G), ctx, F), ctx)
    B = blaschke([0.5, -0.2 + 0.6j], G)
    S = singular_inner([(2.0, 0.4)], G)
    f = compose_factorization(B, S, ctx, F)
    assert abs(weighted_norm(f, ctx) - base) < 1e-8
    assert abs(base - classical_norm(F, p)) < 1e-8
    # modulus multiplicativity off the atoms
    ok = ~f.excluded
    lhs = np.abs(f.boundary.values[ok])
    rhs = (np.abs(ctx.phi.boundary.values) ** (2 / p) * np.abs(F.boundary.values))[ok]
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, rhs.max())


def test_weighted_norm_monomials():
    ctx = context_from_weight(CircleFunction.constant(G, 1.0), 3.0)
    for n in (0, 3, 16):
        assert weighted_norm(AnalyticFunction.from_taylor([0] * n + [1], G), ctx) == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0, 4.0]), st.floats(-3, 3))
def test_norm_axioms(seed, p, lam):
    ctx = context_from_weight(_exp_weight(), p)
    rng = np.random.default_rng(seed)
    f, g = _rand_poly(rng, 4), _rand_poly(rng, 4)
    assert weighted_norm(f + g, ctx) <= weighted_norm(f, ctx) + weighted_norm(g, ctx) + 1e-12
    assert weighted_norm(lam * f, ctx) == pytest.approx(abs(lam) * weighted_norm(f, ctx), rel=1e-12, abs=1e-14)


def test_membership_reports():
    ctx = context_from_weight(_exp_weight(), 2)
    rep = membership(AnalyticFunction.constant(G), ctx)
    assert rep.member
    assert rep.weighted_norm == pytest.approx(np.sqrt(ctx.mass), abs=1e-12)

    g = AngleGrid(64)
    half = AnalyticFunction.from_taylor([0.5, 0.5], g)
    ctx2, _ = context_from_phi(half, 2, build_exhaustion=False)
    assert membership(AnalyticFunction.constant(g), ctx2).divergent
    rep = membership(half * ctx2.phi_power(1.0), ctx2)
    assert not rep.divergent
    assert rep.weighted_norm == pytest.approx(np.sqrt(2) / 2, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_transfer_isometry_and_inverse(p):
    ctx = context_from_weight(_exp_weight(), p)
    rng = np.random.default_rng(7)
    for _ in range(5):
        f = _rand_poly(rng) * ctx.phi_power(2 / p)
        F = transfer_to_classical(f, ctx)
        assert abs(classical_norm(F, p) - weighted_norm(f, ctx)) < 1e-9
        back = transfer_from_classical(F, ctx)
        assert np.max(np.abs(back.boundary.values - f.boundary.values)) < 1e-10


def test_transfer_of_phi_power_is_one():
    ctx = context_from_weight(_exp_weight(), 4)
    F = transfer_to_classical(ctx.phi_power(0.5), ctx)
    assert np.max(np.abs(F.boundary.values - 1)) < 1e-12
    ident = context_from_weight(CircleFunction.constant(G, 1.0), 4)
    f = AnalyticFunction.from_taylor([1, 2j], G)
    assert np.allclose(transfer_to_classical(f, ident).boundary.values, f.boundary.values)


def test_transfer_lp():
    ctx = context_from_weight(_exp_weight(), 2)
    rng = np.random.default_rng(11)
    c = {k: rng.normal() + 1j * rng.normal() for k in range(-5, 6)}
    g = CircleFunction.from_coefficients(G, c)
    h = transfer_lp(g, ctx, "to_classical")
    assert abs(weighted_norm(g, ctx) - classical_norm(h, 2)) < 1e-10
    back = transfer_lp(h, ctx, "from_classical")
    assert np.max(np.abs(back.values - g.values)) < 1e-12
    with pytest.raises(ValueError):
        transfer_lp(g, ctx, "sideways")


def test_branch_needs_nonzero_origin():
    ctx = context_from_weight(_exp_weight(), 2)
    z = AnalyticFunction.from_taylor([0, 1], G)
    from hardy_disc.hardy import _power

    with pytest.raises(BranchError):
        _power(z, 0.5)
    assert ctx.phi_power(1.0) is ctx.phi
