import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyberg.errors import DomainError
from polyberg.multipoly import (
    MixedPoly, MultiIndex, ball_moment, compute_g, integrate_ball, inner_product, is_m_analytic,
    linear_change, multi_indices, multi_indices_below, random_mixed_poly, recenter, wirtinger_deriv,
)
from polyberg.params import SpaceParams
from polyberg.special_fn import UniPoly
from polyberg.verify import MCConfig, mc_integrate


def _poly_strategy(dim, max_deg=3):
    idx = st.tuples(*[st.integers(0, max_deg)] * dim)
    coef = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
    return st.dictionaries(st.tuples(idx, idx), coef, max_size=8).map(lambda t: MixedPoly(dim, t))


def _points(rng, n, size, scale=0.8):
    return scale * (rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))) / math.sqrt(2 * n)


def test_multi_index():
    k = MultiIndex((2, 0, 3))
    assert k.order == 5
    assert k.factorial == 12
    assert MultiIndex.unit(3, 1) == (0, 1, 0)
    with pytest.raises(Exception):
        MultiIndex((1, -1))


def test_multi_index_enumeration():
    assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert len(multi_indices(3, 3)) == math.comb(5, 2)
    assert len(multi_indices_below(2, 3)) == 1 + 2 + 3


def test_no_zero_coefficients_stored():
    p = MixedPoly(1, {((1,), (0,)): 1.0, ((0,), (0,)): 0.0})
    assert len(p) == 1
    assert (p - p).is_zero()


def test_dimension_mismatch_rejected():
    with pytest.raises(DomainError):
        MixedPoly(2, {((1,), (0,)): 1.0})
    with pytest.raises(DomainError):
        wirtinger_deriv(MixedPoly.z(2, 0), (1,))


@pytest.mark.parametrize("p, k, want", [
    (MixedPoly.zbar(1, 0), (1,), MixedPoly.constant(1)),
    (MixedPoly.z(1, 0), (1,), MixedPoly(1)),
    (MixedPoly.monomial((0, 0), (1, 2)), (1, 1), MixedPoly.monomial((0, 0), (0, 1), 2.0)),
    (MixedPoly.monomial((2, 1), (3, 0), 1j), (2, 0), MixedPoly.monomial((2, 1), (1, 0), 6j)),
])
def test_wirtinger_examples(p, k, want):
    assert wirtinger_deriv(p, k) == want


@pytest.mark.parametrize("p, m, want", [
    (MixedPoly.monomial((3,), (0,)), 1, True),
    (MixedPoly.monomial((0, 0), (1, 1)), 2, False),
    (MixedPoly.monomial((0, 0), (1, 1)), 3, True),
])
def test_is_m_analytic_examples(p, m, want):
    assert is_m_analytic(p, m) is want
    assert is_m_analytic(p, m, route="derivative") is want


def test_is_m_analytic_routes_agree(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        p = random_mixed_poly(rng, n, None, max_degree=5, max_terms=10)
        assert is_m_analytic(p, m) == is_m_analytic(p, m, route="derivative")


def test_is_m_analytic_rejects_order_zero():
    with pytest.raises(DomainError):
        is_m_analytic(MixedPoly.constant(1), 0)


def test_empty_polynomial_is_in_every_space():
    assert is_m_analytic(MixedPoly(2), 1)


def test_compute_g_examples():
    p = MixedPoly.monomial((2, 1), (0, 0), 3.0) + MixedPoly.z(2, 0)
    assert compute_g(p, 1) == p
    assert compute_g(p, 3).allclose(p)
    assert compute_g(MixedPoly.zbar(1, 0), 2).is_zero()
    with pytest.raises(DomainError):
        compute_g(MixedPoly.zbar(1, 0), 1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_compute_g_is_analytic(n, m, rng):
    for _ in range(10):
        p = random_mixed_poly(rng, n, m, max_degree=5, max_terms=15)
        g = compute_g(p, m)
        # zbar terms cancel, up to rounding of the largest input coefficient
        zbar_part = max((abs(c) for (_, k), c in g.terms.items() if any(k)), default=0.0)
        assert zbar_part <= 1e-12 * p.max_abs_coeff()
        for s in range(n):
            d = wirtinger_deriv(g, MultiIndex.unit(n, s))
            assert d.max_abs_coeff() <= 1e-12 * p.max_abs_coeff()


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_reconstruction_identity(n, m, rng):
    # p = -sum_{0<|k|<m} (-1)^|k|/k! (D^k p) zbar^k + g
    zero = (0,) * n
    for _ in range(10):
        p = random_mixed_poly(rng, n, m, max_degree=5, max_terms=15)
        rebuilt = compute_g(p, m)
        for k in multi_indices_below(n, m):
            if sum(k) == 0:
                continue
            coef = (-1) ** sum(k) / MultiIndex(k).factorial
            rebuilt = rebuilt - wirtinger_deriv(p, k) * MixedPoly(n, {(zero, k): coef})
        assert (rebuilt - p).max_abs_coeff() <= 1e-12 * p.max_abs_coeff()


def test_product_degree_and_evaluation(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        p = random_mixed_poly(rng, n, max_degree=4, max_terms=8)
        q = random_mixed_poly(rng, n, max_degree=4, max_terms=8)
        z = _points(rng, n, 20)
        np.testing.assert_allclose((p * q)(z), p(z) * q(z), rtol=1e-12, atol=1e-14)
        assert (p * q).zbar_degree() == p.zbar_degree() + q.zbar_degree()


@settings(max_examples=100, deadline=None)
@given(p=_poly_strategy(2), q=_poly_strategy(2), pt=st.tuples(*[st.floats(-0.9, 0.9)] * 4))
def test_arithmetic_is_pointwise(p, q, pt):
    z = np.array([complex(pt[0], pt[1]), complex(pt[2], pt[3])])
    pz, qz = complex(p(z)), complex(q(z))
    scale = 1 + abs(pz) + abs(qz) + abs(pz * qz)
    assert abs(complex((p + q)(z)) - (pz + qz)) <= 1e-12 * scale
    assert abs(complex((p * q)(z)) - pz * qz) <= 1e-12 * scale
    assert abs(complex(p.conj()(z)) - np.conj(pz)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(p=_poly_strategy(3))
def test_json_round_trip(p):
    q = MixedPoly.from_json(p.to_json())
    assert q == p
    assert p.to_json() == q.to_json()


def test_json_schema_and_canonical_order():
    p = MixedPoly(2, {((0, 1), (1, 0)): 2 - 1j, ((0, 0), (0, 0)): 1.0, ((1, 0), (0, 0)): 0.5j})
    data = json.loads(p.to_json())
    assert data["dim"] == 2
    assert [set(t) for t in data["terms"]] == [{"j", "k", "re", "im"}] * 3
    # graded order: constant first, then by total degree
    assert data["terms"][0] == {"j": [0, 0], "k": [0, 0], "re": 1.0, "im": 0.0}
    assert data["terms"][-1]["k"] == [1, 0]
    shuffled = MixedPoly(2, dict(reversed(list(p.terms.items()))))
    assert shuffled.to_json() == p.to_json()


def test_recenter_examples():
    p = MixedPoly.zbar(2, 0)
    assert recenter(p, np.zeros(2)) == p
    c = 0.3 - 0.4j
    q = recenter(p, [c, 0])
    assert q.terms[((0, 0), (0, 0))] == pytest.approx(np.conj(c))


def test_recenter_preserves_values_and_round_trips(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        p = random_mixed_poly(rng, n, max_degree=4, max_terms=12)
        a = _points(rng, n, 1)[0]
        q = recenter(p, a)
        z = _points(rng, n, 50)
        pz = p(z)
        assert np.max(np.abs(q(z - a) - pz)) <= 1e-12 * np.max(np.abs(pz))
        back = recenter(q, -a)
        assert (back - p).max_abs_coeff() <= 1e-12 * p.max_abs_coeff()


def test_linear_change_identity_and_values(rng):
    p = random_mixed_poly(rng, 2, max_degree=4, max_terms=10)
    assert linear_change(p, np.eye(2)).allclose(p)
    M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    z = _points(rng, 2, 30)
    np.testing.assert_allclose(linear_change(p, M)(z), p(z @ M.T), rtol=1e-11, atol=1e-12)


def test_linear_change_breaks_componentwise_degree():
    f = MixedPoly.monomial((0, 0), (1, 1))
    g = linear_change(f, np.array([[1, 1], [-1, 1]]))
    # conj(z1 + z2) conj(z2 - z1) = zbar2^2 - zbar1^2
    assert g.terms[((0, 0), (0, 2))] == pytest.approx(1.0)
    assert g.terms[((0, 0), (2, 0))] == pytest.approx(-1.0)
    assert ((0, 0), (1, 1)) not in g.terms


def test_linear_change_keeps_total_zbar_degree(rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        p = random_mixed_poly(rng, n, m, max_degree=4, max_terms=10)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = linear_change(p, M)
        assert is_m_analytic(g, m)
        # invertible change: the top zbar-degree cannot drop
        assert linear_change(g, np.linalg.inv(M)).allclose(p, tol=1e-9)


def test_ball_moment_examples():
    assert ball_moment((0,), (0,), 1, 0.0) == 1.0
    assert ball_moment((0, 0, 0), (0, 0, 0), 3, 1.7) == pytest.approx(1.0, rel=1e-14)
    assert ball_moment((1, 0), (0, 1), 2, 0.0) == 0.0
    assert ball_moment((1,), (1,), 1, 0.0) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(DomainError):
        ball_moment((1,), (1,), 1, -1.0)


def test_ball_moment_unit_disk_quadrature():
    # n = 1: int_D |z|^{2k} (alpha+1)(1-|z|^2)^alpha dA/pi = (alpha+1) B(k+1, alpha+1)
    for alpha in (-0.5, 0.0, 2.0):
        for k in range(5):
            want = (alpha + 1) * math.gamma(k + 1) * math.gamma(alpha + 1) / math.gamma(k + alpha + 2)
            assert ball_moment((k,), (k,), 1, alpha) == pytest.approx(want, rel=1e-13)


def test_ball_moment_disk_rejection_sampling():
    # independent oracle: uniform points of the square, kept inside the disk
    rng = np.random.default_rng(123)
    xy = rng.uniform(-1, 1, (2_000_000, 2))
    z = xy[:, 0] + 1j * xy[:, 1]
    z = z[np.abs(z) < 1]
    vals = np.abs(z) ** 2
    est, err = vals.mean(), vals.std() / math.sqrt(vals.size)
    assert abs(est - ball_moment((1,), (1,), 1, 0.0)) <= 4 * err


def test_ball_moment_against_monte_carlo(rng):
    cfg = MCConfig(samples=1_000_000, seed=11)
    for n, alpha in ((1, 0.0), (2, 0.5), (3, -0.5)):
        params = SpaceParams(n, 1, alpha)
        pairs = []
        while len(pairs) < 10:
            j = tuple(int(x) for x in rng.multinomial(int(rng.integers(0, 4)), [1 / n] * n))
            k = tuple(int(x) for x in rng.multinomial(int(rng.integers(0, 4)), [1 / n] * n))
            pairs.append((j, k))
        pairs[0] = (pairs[0][1], pairs[0][1])   # at least one diagonal moment
        mons = [MixedPoly.monomial(j, k) for j, k in pairs]
        est, err = mc_integrate(lambda w: np.stack([p(w) for p in mons], axis=-1), "ball", cfg, params)
        for (j, k), e, s in zip(pairs, est, err):
            assert abs(e - ball_moment(j, k, n, alpha)) <= 4 * s + 1e-15


def test_inner_product_examples():
    params = SpaceParams(1, 2, 0.0)
    one, z, zb = MixedPoly.constant(1), MixedPoly.z(1, 0), MixedPoly.zbar(1, 0)
    assert inner_product(one, one, params) == pytest.approx(1.0)
    assert inner_product(z, zb, params) == 0
    assert inner_product(z, z, params) == pytest.approx(0.5)
    assert inner_product(z, z, params) == pytest.approx(ball_moment((1,), (1,), 1, 0.0))


def test_inner_product_matches_integrate_ball(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        params = SpaceParams(n, 3, float(rng.uniform(-0.9, 3)))
        p = random_mixed_poly(rng, n, 3, max_degree=4, max_terms=8)
        q = random_mixed_poly(rng, n, 3, max_degree=4, max_terms=8)
        want = integrate_ball(p * q.conj(), params.alpha)
        assert inner_product(p, q, params) == pytest.approx(want, rel=1e-12, abs=1e-14)
        assert inner_product(p, q, params) == pytest.approx(np.conj(inner_product(q, p, params)), rel=1e-12)


def test_inner_product_positive(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        params = SpaceParams(n, 4, float(rng.uniform(-0.9, 3)))
        p = random_mixed_poly(rng, n, 4)
        v = inner_product(p, p, params)
        assert abs(v.imag) <= 1e-12 * abs(v.real)
        assert v.real > 0


def test_radial_expansion(rng):
    h = UniPoly([1.0, -2.0, 0.5])
    p = MixedPoly.radial(h, 3)
    z = _points(rng, 3, 10)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    np.testing.assert_allclose(p(z), h(r2), rtol=1e-13)


def test_random_poly_respects_order(rng):
    for m in (1, 2, 3):
        for _ in range(20):
            p = random_mixed_poly(rng, 2, m, max_degree=6, max_terms=40)
            assert is_m_analytic(p, m)
            assert 1 <= len(p) <= 40
            assert all(0 <= c.real < 1 and 0 <= c.imag < 1 for c in p.terms.values())
