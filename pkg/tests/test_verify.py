import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyberg import geometry as geo
from polyberg import kernels as ker
from polyberg.errors import DomainError
from polyberg.multipoly import MixedPoly, ball_moment, random_mixed_poly, wirtinger_deriv
from polyberg.params import SpaceParams
from polyberg.special_fn import RPolyParams, UniPoly, r_poly
from polyberg import verify as vf
from polyberg.verify import MCConfig, VerifyReport, mc_integrate, numeric_wirtinger


# exact interval integration

def test_interval_integral_examples():
    assert vf.interval_integrate_poly(UniPoly([1.0]), 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert vf.interval_integrate_poly(UniPoly([4.0, -6.0]), 0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    # int_0^1 t (1-t) dt = 1/6
    assert vf.interval_integrate_poly(UniPoly([0.0, 1.0]), 1.0, 0.0) == pytest.approx(1 / 6, rel=1e-14)
    with pytest.raises(DomainError):
        vf.interval_integrate_poly(UniPoly([1.0]), -1.0, 0.0)
    with pytest.raises(DomainError):
        vf.normalized_interval_integral(UniPoly([1.0]), 0.0, -2.0)


def test_interval_integral_against_quadrature():
    from scipy import integrate

    h = UniPoly([0.3, -1.0, 2.0, 0.5])
    for a, b in ((0.5, 1.5), (2.0, 0.0), (1.0, 3.0)):
        want, _ = integrate.quad(lambda t: h(t) * (1 - t) ** a * t ** b, 0, 1, epsabs=1e-14, epsrel=1e-13)
        assert vf.interval_integrate_poly(h, a, b) == pytest.approx(want, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(coeffs=st.lists(st.floats(-5, 5), min_size=1, max_size=7),
       alpha=st.sampled_from([-0.5, 0.0, 1.0, 2.5]), beta=st.sampled_from([0.0, 0.5, 2.0]))
def test_interval_reproducing_property(coeffs, alpha, beta):
    h = UniPoly(coeffs)
    R = r_poly(RPolyParams(len(coeffs) - 1, alpha, beta))
    got = vf.normalized_interval_integral(h * R, alpha, beta)
    assert abs(got - coeffs[0]) <= 1e-10 * max(1.0, max(abs(c) for c in coeffs))


# MC configuration and reports

def test_mc_config():
    cfg = MCConfig(samples=10, seed=-1, chunk=4)
    assert cfg.seed == 2 ** 64 - 1
    assert cfg.n_chunks == 3
    assert [cfg.chunk_size(i) for i in range(3)] == [4, 4, 2]
    with pytest.raises(DomainError):
        MCConfig(samples=0)
    with pytest.raises(DomainError):
        MCConfig(chunk=0)


def test_report_semantics():
    rep = VerifyReport("demo")
    rep.add("a", 1e-12, 1e-10)
    assert rep.passed
    rep.add("b", 0.5, 1e-3, bound="lower")
    assert rep.passed
    rep.add("c", float("nan"), 1.0)
    assert not rep.passed
    assert [c.id for c in rep.failures()] == ["c"]
    data = json.loads(rep.to_json())
    assert set(data) == {"suite", "checks", "pass"}
    assert data["pass"] is False
    assert set(data["checks"][0]) == {"id", "residual", "tol", "sigma", "pass"}
    assert data["checks"][2]["residual"] is None
    inner = VerifyReport("x")
    inner.add("y", 0.0, 0.0)
    outer = VerifyReport("all")
    outer.extend(inner, prefix="x")
    assert outer.checks[0].id == "x/y"


def test_lower_bound_check_fails_below():
    rep = VerifyReport("demo")
    rep.add("nonzero", 1e-20, 1e-12, bound="lower")
    assert not rep.passed


def test_mc_tol():
    assert vf.mc_tol(1.0, 0.0) == pytest.approx(4.0 + 64 * np.finfo(float).eps)
    assert vf.mc_tol(0.0, 100.0, tol_scale=2.0) == pytest.approx(2 * 64 * np.finfo(float).eps * 100)


# sampling and Monte Carlo integration

@pytest.mark.parametrize("n, alpha", [(1, 0.0), (2, 0.5), (3, -0.5)])
def test_mc_sample_ball_moments(n, alpha):
    params = SpaceParams(n, 1, alpha)
    z = vf.mc_sample_ball(params, np.random.default_rng(5), 1_000_000)
    assert z.shape == (1_000_000, n)
    assert np.all(geo.norm_sq(z) < 1)
    pairs = [((0,) * n, (0,) * n)]
    e = [tuple(int(i == s) for i in range(n)) for s in range(n)]
    pairs += [(e[0], e[0]), (e[-1], e[0]), (tuple(2 * x for x in e[0]), tuple(2 * x for x in e[0]))]
    if n > 1:
        both = tuple(a + b for a, b in zip(e[0], e[1]))
        pairs += [(both, both), (e[0], e[1])]
    for j, k in pairs:
        vals = MixedPoly.monomial(j, k)(z)
        est = vals.mean()
        err = math.sqrt(vals.real.var() + vals.imag.var()) / math.sqrt(vals.size)
        assert abs(est - ball_moment(j, k, n, alpha)) <= 4 * err + 1e-15


def test_mc_integrate_constant():
    params = SpaceParams(2, 2, 0.5)
    est, err = mc_integrate(lambda z: np.ones(z.shape[0]), "ball", MCConfig(100_000, 3), params)
    assert est == 1.0
    assert err == 0.0


def test_mc_integrate_second_moment():
    params = SpaceParams(1, 1, 0.0)
    est, err = mc_integrate(lambda z: np.abs(z[:, 0]) ** 2, "ball", MCConfig(400_000, 8), params)
    assert abs(est - 0.5) <= 4 * err
    assert 0 < err < 1e-3


@pytest.mark.parametrize("params", [SpaceParams(1, 2, 0.0), SpaceParams(2, 3, 0.5)])
def test_kernel_norm_is_diagonal_value(params):
    zero = np.zeros(params.n)
    est, err = mc_integrate(lambda w: np.abs(ker.kernel_ball(params, zero, w)) ** 2, "ball",
                            MCConfig(500_000, 21), params)
    want = ker.kernel_ball_diag(params, zero)
    assert abs(est - want) <= 4 * err


def test_mc_siegel_pullback_normalization():
    # V 1 has the norm of the constant function 1
    params = SpaceParams(2, 2, 0.5)
    V1 = ker.V_operator(params, MixedPoly.constant(2))
    est, err = mc_integrate(lambda x: np.abs(V1(x)) ** 2, "siegel", MCConfig(200_000, 4), params)
    assert abs(est - 1) <= vf.mc_tol(err, 1.0)


def test_mc_determinism_across_threads_and_chunking():
    params = SpaceParams(2, 2, 0.0)
    f = random_mixed_poly(np.random.default_rng(0), 2, 2, max_degree=3, max_terms=6)
    cfg = MCConfig(150_000, 17, chunk=10_000)
    runs = [mc_integrate(f, "ball", cfg, params, threads=t) for t in (1, 1, 3, 8)]
    assert all(r == runs[0] for r in runs)
    other = mc_integrate(f, "ball", MCConfig(150_000, 18, chunk=10_000), params)
    assert other != runs[0]


def test_mc_vector_integrand_matches_scalar():
    params = SpaceParams(1, 2, 0.0)
    cfg = MCConfig(50_000, 2)
    f, g = MixedPoly.z(1, 0) * MixedPoly.zbar(1, 0), MixedPoly.constant(1, 2.0)
    est, err = mc_integrate(lambda z: np.stack([f(z), g(z)], axis=-1), "ball", cfg, params)
    e0, s0 = mc_integrate(f, "ball", cfg, params)
    assert est.shape == (2,)
    assert est[0] == pytest.approx(e0, rel=1e-14)
    assert err[0] == pytest.approx(s0, rel=1e-12)


def test_mc_non_finite_reports_nan():
    params = SpaceParams(1, 1, 0.0)
    est, err = mc_integrate(lambda z: np.full(z.shape[0], np.inf), "ball", MCConfig(1000, 0), params)
    assert math.isnan(est.real)
    rep = VerifyReport("x")
    rep.add("bad", abs(est - 1), 1.0)
    assert not rep.passed
    with pytest.raises(ValueError):
        mc_integrate(lambda z: z[:, 0], "disk", MCConfig(10), params)


# finite-difference Wirtinger derivatives

def test_numeric_wirtinger_trivial():
    f = MixedPoly.zbar(1, 0)
    assert abs(numeric_wirtinger(f, (1,), np.array([0.2 + 0.1j])) - 1) <= 1e-8
    g = MixedPoly.z(2, 1)
    assert abs(numeric_wirtinger(g, (0, 1), np.array([0.2, 0.1j]))) <= 1e-10


def test_numeric_wirtinger_matches_symbolic(rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        f = random_mixed_poly(rng, n, None, max_degree=5, max_terms=10)
        order = int(rng.integers(1, 4))
        k = tuple(int(x) for x in rng.multinomial(order, [1 / n] * n))
        z = geo.random_ball_points(rng, n, 1, rmax=0.5)[0]
        want = complex(wirtinger_deriv(f, k)(z))
        got, scale = numeric_wirtinger(f, k, z, h=vf.wirtinger_step(order), with_scale=True)
        assert abs(got - want) <= 1e-6 * max(abs(want), scale)


def test_numeric_wirtinger_convergence_order():
    # D(exp(zbar) sin z) = exp(zbar) sin z, a smooth non-polynomial fixture
    f = lambda p: np.exp(np.conj(p[..., 0])) * np.sin(p[..., 0])
    z = np.array([0.3 - 0.2j])
    want = complex(f(z))
    for richardson, expected in ((False, 2), (True, 4)):
        errs = [abs(numeric_wirtinger(f, (1,), z, h=h, richardson=richardson) - want) for h in (0.1, 0.05)]
        order = math.log2(errs[0] / errs[1])
        assert order == pytest.approx(expected, abs=0.1)
    # the default operator (one Richardson level) converges at order >= 2
    assert order >= 2


def test_numeric_wirtinger_margins():
    f = MixedPoly.zbar(1, 0)
    with pytest.raises(DomainError):
        numeric_wirtinger(f, (1,), np.array([0.9995]), h=1e-3, domain="ball")
    with pytest.raises(DomainError):
        numeric_wirtinger(f, (1,), np.array([1e-4j]), h=1e-3, domain="siegel")
    with pytest.raises(DomainError):
        numeric_wirtinger(f, (1, 0), np.array([0.1]))


def test_wirtinger_step():
    assert vf.wirtinger_step(1) == 1e-3
    assert vf.wirtinger_step(3) == 1e-3
    assert vf.wirtinger_step(4) > 1e-3


# suites

CELL = SpaceParams(2, 2, 0.5)


def test_suite_mvp_passes():
    rep = vf.suite_mvp(CELL, trials=30)
    assert rep.passed, rep.failures()
    assert {c.id for c in rep.checks} == {"weighted/constant", "weighted/random", "unweighted/recentered"}


def test_suite_mvp_detects_wrong_radial_weight(monkeypatch):
    # with R of the wrong degree the mean-value identity must fail
    monkeypatch.setattr(vf, "_r_minus", lambda p: r_poly(RPolyParams(p.m - 2, p.alpha, p.n - 1)))
    rep = vf.suite_mvp(SpaceParams(1, 3, 0.0), trials=30)
    assert not rep.passed


def test_suite_reproducing_passes_and_caps_z():
    rep = vf.suite_reproducing(CELL, cfg=MCConfig(100_000, 1))
    assert rep.passed, rep.failures()
    assert len(rep.checks) == 1 + 5 * 4
    with pytest.raises(DomainError):
        vf.suite_reproducing(CELL, z_list=np.array([[0.8, 0.0]]), cfg=MCConfig(1000))


def test_suite_identities_passes():
    rep = vf.suite_identities(SpaceParams(1, 3, 1.7), count=50, variant_points=100)
    assert rep.passed, rep.failures()
    assert any(c.id == "kernel/halfplane" for c in rep.checks)


def test_suite_unitary_passes():
    rep = vf.suite_unitary(CELL, MCConfig(100_000, 2), n_points=50)
    assert rep.passed, rep.failures()
    assert any(c.id == "polyanalytic/remark_D10" for c in rep.checks)


def test_suite_berezin_skips_null_operator_for_m1():
    ids = {c.id for c in vf.suite_berezin(SpaceParams(2, 1, 0.0), count=20).checks}
    assert "S/berezin_zero" not in ids
    rep = vf.suite_berezin(SpaceParams(2, 2, 0.0), count=20)
    assert rep.passed, rep.failures()
    assert {"S/berezin_zero", "S/nonzero", "cayley_transport"} <= {c.id for c in rep.checks}


def test_run_suite_dispatch():
    cfg = MCConfig(20_000, 3)
    rep = vf.run_suite("all", SpaceParams(1, 2, 0.0), cfg)
    prefixes = {c.id.split("/")[0] for c in rep.checks}
    assert prefixes == set(vf.SUITES)
    assert rep.suite == "all"
    with pytest.raises(ValueError):
        vf.run_suite("nope", SpaceParams(1, 2, 0.0), cfg)


def test_tol_scale_tightens():
    rep = vf.suite_mvp(CELL, trials=10, tol_scale=1e-30)
    assert not rep.passed
