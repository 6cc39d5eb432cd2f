"""Exact and Monte Carlo verification harnesses.

Exact checks integrate polynomials against Beta moments (interval) or
monomial moments (ball).  Stochastic checks sample mu_alpha with a
seeded, chunked RNG: chunk i draws from SeedSequence([seed, i]) and the
per-chunk statistics are merged in chunk order, so the estimate does not
depend on how many threads evaluate the chunks.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from . import kernels as ker
from .errors import DomainError
from .multipoly import (MixedPoly, MultiIndex, integrate_ball, inner_product, multi_indices,
                        random_mixed_poly, recenter, wirtinger_deriv)
from .params import SpaceParams
from .special_fn import RPolyParams, UniPoly, beta_fn, log_beta, r_poly

SIGMA_RULE = 4.0
# rounding floor added to 4 sigma: a zero-variance integrand still carries ~1 ulp of error
MC_ROUNDING_ULPS = 64
# sampled radii are capped so every MC point keeps the kernels' domain margin
MC_RADIUS_CAP = 1 - 1e-8
REPRODUCING_Z_CAP = 0.7


@dataclass(frozen=True)
class MCConfig:
    samples: int = 200_000
    seed: int = 0
    chunk: int = 1 << 16

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples}")
        if int(self.chunk) != self.chunk or self.chunk < 1:
            raise DomainError(f"chunk must be a positive integer, got {self.chunk}")
        object.__setattr__(self, "seed", int(self.seed) & (2 ** 64 - 1))

    @property
    def n_chunks(self) -> int:
        return -(-self.samples // self.chunk)

    def chunk_rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, index]))

    def chunk_size(self, index: int) -> int:
        return min(self.chunk, self.samples - index * self.chunk)


@dataclass
class Check:
    """One verified quantity; ``bound="lower"`` marks a value that must reach ``tol``."""

    id: str
    residual: float
    tol: float
    sigma: float | None = None
    bound: str = "upper"

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.residual):
            return False
        if self.bound == "lower":
            return bool(self.residual >= self.tol)
        return bool(self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {"id": self.id, "residual": _num(self.residual), "tol": _num(self.tol),
                "sigma": _num(self.sigma), "pass": self.passed}


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class VerifyReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, id: str, residual, tol, sigma=None, bound: str = "upper") -> Check:
        c = Check(id, float(residual), float(tol), None if sigma is None else float(sigma), bound)
        self.checks.append(c)
        return c

    def extend(self, other: "VerifyReport", prefix: str | None = None):
        for c in other.checks:
            name = f"{prefix}/{c.id}" if prefix else c.id
            self.checks.append(Check(name, c.residual, c.tol, c.sigma, c.bound))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "checks": [c.to_dict() for c in self.checks], "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# exact integration

def _moment_ratios(alpha: float, beta: float, count: int) -> np.ndarray:
    """B(alpha+1, beta+s+1) / B(alpha+1, beta+1) for s < count, as long double products."""
    ld = np.longdouble
    a, b = ld(alpha), ld(beta)
    out = np.ones(count, dtype=ld)
    for s in range(1, count):
        out[s] = out[s - 1] * (b + s) / (a + b + s + 1)
    return out


def _moment_sum(h: UniPoly, alpha: float, beta: float) -> np.longdouble:
    # alternating coefficients cancel heavily, so accumulate in long double
    c = np.asarray(h.coeffs)
    c = c.astype(np.clongdouble if np.iscomplexobj(c) else np.longdouble)
    return np.sum(c * _moment_ratios(alpha, beta, c.size))


def interval_integrate_poly(h: UniPoly, alpha: float, beta: float) -> float:
    """int_0^1 h(t) (1-t)^alpha t^beta dt = sum_s h_s B(alpha+1, beta+s+1), exactly."""
    if not (alpha > -1 and beta > -1):
        raise DomainError(f"alpha and beta must exceed -1, got ({alpha}, {beta})")
    return float(_moment_sum(h, alpha, beta) * np.longdouble(beta_fn(alpha + 1, beta + 1)))


def normalized_interval_integral(h: UniPoly, alpha: float, beta: float) -> float:
    """The same integral divided by B(alpha+1, beta+1)."""
    if not (alpha > -1 and beta > -1):
        raise DomainError(f"alpha and beta must exceed -1, got ({alpha}, {beta})")
    return float(_moment_sum(h, alpha, beta))


# Monte Carlo

def mc_sample_ball(params: SpaceParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Points of B_n distributed by mu_alpha, shape (size, n).

    Direction: normalized complex Gaussian.  Squared radius: Beta(n, alpha+1),
    drawn as G1 / (G1 + G2) with G1 ~ Gamma(n) and G2 ~ Gamma(alpha+1).
    """
    n = params.n
    g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    g /= np.sqrt(geo.norm_sq(g))[:, None]
    g1 = rng.gamma(n, size=size)
    g2 = rng.gamma(params.alpha + 1, size=size)
    r = np.minimum(np.sqrt(g1 / (g1 + g2)), MC_RADIUS_CAP)
    return g * r[:, None]


def siegel_pullback_weight(params: SpaceParams, z) -> np.ndarray:
    """Density of nu_alpha pulled back through omega, relative to mu_alpha.

    d nu_alpha(omega z) = (c_alpha/4) defect(omega z)^alpha J_R omega(z) d mu(z),
    so against mu_alpha the factor is defect^alpha J_R omega / (4 (1-|z|^2)^alpha).
    """
    a = params.alpha
    defect = geo.siegel_defect(geo.cayley_to_siegel(z))
    return defect ** a * geo.omega_real_jacobian(z) / (4 * (1 - geo.norm_sq(z)) ** a)


@dataclass
class _Stats:
    count: int
    mean: np.ndarray
    m2re: np.ndarray
    m2im: np.ndarray

    def merge(self, other: "_Stats") -> "_Stats":
        n = self.count + other.count
        d = other.mean - self.mean
        w = other.count / n
        return _Stats(n, self.mean + d * w,
                      self.m2re + other.m2re + d.real ** 2 * self.count * w,
                      self.m2im + other.m2im + d.imag ** 2 * self.count * w)


def _chunk_stats(vals: np.ndarray) -> _Stats:
    # samples on the last, contiguous axis so numpy sums pairwise
    rows = np.ascontiguousarray(np.moveaxis(vals, 0, -1))
    with np.errstate(invalid="ignore", over="ignore"):
        mean = rows.mean(axis=-1)
        dev = rows - mean[..., None]
        return _Stats(vals.shape[0], mean, np.sum(dev.real ** 2, axis=-1), np.sum(dev.imag ** 2, axis=-1))


def mc_integrate(f: Callable, domain: str, cfg: MCConfig, params: SpaceParams,
                 threads: int = 1):
    """Estimate int f against mu_alpha (ball) or nu_alpha (Siegel domain).

    ``f`` maps points (N, n) to values (N,) or (N, k).  Returns
    ``(estimate, stderr)``; stderr = sqrt(var(Re) + var(Im)) / sqrt(N).
    Non-finite samples make the estimate NaN instead of raising.
    """
    if domain not in ker.DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")

    def run(index: int) -> _Stats:
        z = mc_sample_ball(params, cfg.chunk_rng(index), cfg.chunk_size(index))
        if domain == "ball":
            vals = np.asarray(f(z), dtype=complex)
        else:
            xi = geo.cayley_to_siegel(z)
            w = siegel_pullback_weight(params, z)
            vals = np.asarray(f(xi), dtype=complex)
            vals = vals * (w if vals.ndim == 1 else w[:, None])
        return _chunk_stats(vals)

    indices = range(cfg.n_chunks)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, indices))
    else:
        parts = [run(i) for i in indices]
    total = parts[0]
    for p in parts[1:]:
        total = total.merge(p)
    N = total.count
    if N > 1:
        var = (total.m2re + total.m2im) / (N - 1)
    else:
        var = np.zeros_like(total.m2re)
    stderr = np.sqrt(var / N)
    est = total.mean
    bad = ~np.isfinite(est)
    if np.any(bad):
        est = np.where(bad, np.nan, est)
        stderr = np.where(bad, np.nan, stderr)
    if est.ndim == 0:
        return complex(est), float(stderr)
    return est, stderr


# finite-difference Wirtinger derivatives

def _stencil(k: Sequence[int], z: np.ndarray, h: float):
    steps = [s for s, e in enumerate(k) for _ in range(e)]
    n = z.shape[-1]
    moves = []
    for s in steps:
        e = np.zeros(n, dtype=complex)
        e[s] = 1
        moves.append([(h * e, 1 / (4 * h)), (-h * e, -1 / (4 * h)),
                      (1j * h * e, 1j / (4 * h)), (-1j * h * e, -1j / (4 * h))])
    pts, wts = [], []
    for combo in itertools.product(*moves):
        pts.append(z + sum((c[0] for c in combo), np.zeros(n, dtype=complex)))
        wts.append(np.prod([c[1] for c in combo]))
    return np.array(pts), np.array(wts)


def numeric_wirtinger(f: Callable, k: Sequence[int], z, h: float = 1e-3, domain: str | None = None,
                      richardson: bool = True, with_scale: bool = False):
    """Nested central differences for D^k = d^{|k|}/dzbar^k at a single point.

    Each factor is (1/2)[(f(z+h e_j) - f(z-h e_j))/(2h) + i (f(z+ih e_j) - f(z-ih e_j))/(2h)].
    With ``richardson`` the result is (4 D(h/2) - D(h)) / 3.  With
    ``with_scale`` also returns max |f| over the stencil points.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    k = tuple(int(e) for e in k)
    if len(k) != z.size:
        raise DomainError(f"multi-index {k} does not match point dimension {z.size}")
    domain = domain or getattr(f, "domain", "none")
    order = sum(k)
    if domain == "ball" and math.sqrt(geo.norm_sq(z)) + order * h > 1 - geo.DOMAIN_MARGIN:
        raise DomainError(f"stencil of radius {order * h} leaves the ball")

    def approx(step):
        pts, wts = _stencil(k, z, step)
        if domain == "siegel":
            geo.check_siegel(pts)
        vals = np.asarray(f(pts), dtype=complex)
        return complex(np.sum(wts * vals)), float(np.max(np.abs(vals)))

    d1, s1 = approx(h)
    if richardson:
        d2, s2 = approx(h / 2)
        value, scale = (4 * d2 - d1) / 3, max(s1, s2)
    else:
        value, scale = d1, s1
    return (value, scale) if with_scale else value


# suites

def mc_tol(stderr: float, reference, tol_scale: float = 1.0) -> float:
    """4 sigma plus a rounding floor of a few ulps of the reference value."""
    floor = MC_ROUNDING_ULPS * np.finfo(float).eps * max(1.0, abs(reference))
    return (SIGMA_RULE * stderr + floor) * tol_scale


def _r_minus(params: SpaceParams) -> UniPoly:
    return r_poly(RPolyParams(params.m - 1, params.alpha, params.n - 1))


def _polys(rng, params: SpaceParams, count: int, max_degree: int = 6, max_terms: int = 40):
    return [random_mixed_poly(rng, params.n, params.m, max_degree, max_terms) for _ in range(count)]


def _rel(a, b, floor=0.0):
    a, b = np.asarray(a), np.asarray(b)
    den = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.abs(a - b) / den
    out = np.where(den == 0, 0.0, out)
    return float(np.max(out)) if out.size else 0.0


def suite_mvp(params: SpaceParams, trials: int = 100, seed: int = 0, tol_scale: float = 1.0) -> VerifyReport:
    """Weighted mean-value property by exact moments, plus its recentered alpha = 0 form."""
    rep = VerifyReport("mvp")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    n, m = params.n, params.m
    radial = MixedPoly.radial(_r_minus(params), n)

    def mvp_residual(f, rad, alpha, center_value):
        got = integrate_ball(f * rad, alpha)
        return abs(got - center_value) / max(1.0, abs(center_value))

    one = MixedPoly.constant(n)
    rep.add("weighted/constant", mvp_residual(one, radial, params.alpha, 1.0), 1e-9 * tol_scale)
    worst = 0.0
    for f in _polys(rng, params, trials):
        worst = max(worst, mvp_residual(f, radial, params.alpha, f.terms.get(((0,) * n, (0,) * n), 0j)))
    rep.add("weighted/random", worst, 1e-9 * tol_scale)

    # f(a) as the average of f(a + r zeta) R(|zeta|^2) against mu_0
    radial0 = MixedPoly.radial(r_poly(RPolyParams(m - 1, 0.0, n - 1)), n)
    worst = 0.0
    for f in _polys(rng, params, max(1, trials // 10), max_degree=4, max_terms=15):
        a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / 2
        r = float(rng.uniform(0.2, 1.5))
        g = recenter(f, a).scaled(r)
        fa = complex(f(a))
        worst = max(worst, mvp_residual(g, radial0, 0.0, fa))
    rep.add("unweighted/recentered", worst, 1e-9 * tol_scale)
    return rep


def default_z_list(params: SpaceParams, seed: int = 0, count: int = 3) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    pts = geo.random_ball_points(rng, params.n, count, rmax=REPRODUCING_Z_CAP)
    return np.concatenate([np.zeros((1, params.n), dtype=complex), pts])


def suite_reproducing(params: SpaceParams, z_list=None, cfg: MCConfig | None = None,
                      n_polys: int = 5, threads: int = 1, tol_scale: float = 1.0) -> VerifyReport:
    """<f, K_z> = f(z) by Monte Carlo, and exactly at z = 0."""
    cfg = cfg or MCConfig()
    rep = VerifyReport("rk")
    Z = default_z_list(params, cfg.seed) if z_list is None else geo.as_points(z_list, params.n).reshape(-1, params.n)
    r = np.sqrt(geo.norm_sq(Z))
    if np.any(r > REPRODUCING_Z_CAP + 1e-12):
        raise DomainError(f"reproducing checks are limited to |z| <= {REPRODUCING_Z_CAP}")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    polys = _polys(rng, params, n_polys, max_degree=4, max_terms=10)

    radial = MixedPoly.radial(_r_minus(params), params.n)
    zero = (0,) * params.n
    worst = max(abs(integrate_ball(f * radial, params.alpha) - f.terms.get((zero, zero), 0j))
                / max(1.0, abs(f.terms.get((zero, zero), 0j))) for f in polys)
    rep.add("z0/exact", worst, 1e-9 * tol_scale)

    def integrand(w):
        K = np.stack([np.conj(ker.kernel_ball(params, z, w)) for z in Z], axis=-1)
        F = np.stack([f(w) for f in polys], axis=-1)
        return (F[:, :, None] * K[:, None, :]).reshape(w.shape[0], -1)

    est, err = mc_integrate(integrand, "ball", cfg, params, threads)
    est, err = est.reshape(len(polys), len(Z)), err.reshape(len(polys), len(Z))
    for i, f in enumerate(polys):
        fz = f(Z)
        for j in range(len(Z)):
            rep.add(f"f{i}/z{j}", abs(est[i, j] - fz[j]), mc_tol(err[i, j], fz[j], tol_scale), err[i, j])
    return rep


def _points(params: SpaceParams, seed: int, count: int, stream: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, stream]))
    return rng, geo.random_ball_points(rng, params.n, count), geo.random_siegel_points(rng, params.n, count)


def _variant_gap(vs: dict) -> float:
    keys = list(vs)
    return max(_rel(vs[a], vs[b]) for a in keys for b in keys if a < b) if len(keys) > 1 else 0.0


def _gram_check(G: np.ndarray) -> tuple[float, float]:
    herm = float(np.max(np.abs(G - G.conj().T)) / np.max(np.abs(G)))
    lam = np.linalg.eigvalsh((G + G.conj().T) / 2)
    tr = float(np.real(np.trace(G)))
    return herm, max(0.0, -float(lam[0]) / tr)


def suite_identities(params: SpaceParams, seed: int = 0, count: int = 200, tol_scale: float = 1.0,
                     variant_points: int = 1000) -> VerifyReport:
    """Deterministic pointwise identities of the geometry and the kernels."""
    rep = VerifyReport("identities")
    n, m, alpha = params.n, params.m, params.alpha
    tol = 1e-10 * tol_scale
    rng, Z, X = _points(params, seed, count, 4)
    A = geo.random_ball_points(rng, n, count)
    W = geo.random_ball_points(rng, n, count)
    Y = geo.random_siegel_points(rng, n, count)
    zeros = np.zeros_like(Z)

    # Moebius maps
    res = geo.mobius_identities(zeros, Z, W)
    rep.add("mobius/a0", max(float(np.max(v)) for v in res.values()), 0.0)
    res = geo.mobius_identities(A, Z, W)
    pz, pw = geo.mobius(A, Z), geo.mobius(A, W)
    za, aw = 1 - geo.inner(Z, A), 1 - geo.inner(A, W)
    scale_zw = np.maximum(np.abs(1 - geo.inner(pz, pw)),
                          np.abs((1 - geo.norm_sq(A)) * (1 - geo.inner(Z, W)) / (za * aw)))
    rep.add("mobius/phi_zw", np.max(res["phi_zw"] / np.maximum(scale_zw, 1e-300)), tol)
    rep.add("mobius/phi_zz", np.max(res["phi_zz"] / np.maximum(1 - geo.norm_sq(pz), 1e-300)), tol)
    rep.add("mobius/phi_z0", np.max(res["phi_z0"] / np.abs(1 - geo.inner(pz, A))), tol)
    rep.add("mobius/jacobian", np.max(res["jacobian"] / geo.mobius_real_jacobian(A, Z)), tol)
    rep.add("mobius/involution", np.max(np.abs(geo.mobius(A, pz) - Z)), tol)

    # shift factors
    p = ker.pessoa_factor(m, A, Z)
    rep.add("p/abs", np.max(np.abs(np.abs(p) - 1)), tol)
    rep.add("p/inversion", np.max(np.abs(ker.pessoa_factor(m, A, pz) * p - 1)), tol)
    g = ker.norm_factor_ball(params, A, Z)
    rep.add("g/a0", np.max(np.abs(ker.norm_factor_ball(params, zeros, Z) - 1)), 0.0)
    rep.add("g/product", np.max(np.abs(ker.norm_factor_ball(params, A, pz) * g - 1)), tol)
    gw = ker.norm_factor_ball(params, A, pw)
    lhs = np.abs(gw) ** 2 * geo.mobius_real_jacobian(A, W) * (1 - geo.norm_sq(pw)) ** alpha
    rhs = (1 - geo.norm_sq(W)) ** alpha
    rep.add("g/main_property", _rel(lhs, rhs), tol)

    # Cayley transform
    base = np.zeros(n, dtype=complex)
    base[-1] = 1j
    rep.add("cayley/omega0", float(np.max(np.abs(geo.cayley_to_siegel(np.zeros(n)) - base))), 0.0)
    rep.add("cayley/roundtrip_ball", np.max(np.abs(geo.cayley_to_ball(geo.cayley_to_siegel(Z)) - Z)), tol)
    rep.add("cayley/roundtrip_siegel", _rel(geo.cayley_to_siegel(geo.cayley_to_ball(X)), X), tol)
    px, py = geo.cayley_to_ball(X), geo.cayley_to_ball(Y)
    d = 1 - 1j * X[..., -1]
    rep.add("cayley/psi_abs", _rel(1 - geo.norm_sq(px), 4 * geo.siegel_defect(X) / np.abs(d) ** 2), tol)
    dy = 1 + 1j * np.conj(Y[..., -1])
    lam = geo.siegel_lambda(X, Y)
    ip = 1 - geo.inner(px, py)
    rep.add("cayley/psi_inner_prod", _rel(ip, 4 * lam / (d * dy)), tol)
    cj = geo.cayley_jacobians(X, "siegel")
    rep.add("cayley/psi_det", np.max(cj.det_residual / np.abs(cj.complex_det)), tol)
    rep.add("cayley/psi_real_jacobian", np.max(cj.real_residual / cj.real), tol)
    cj = geo.cayley_jacobians(Z, "ball")
    rep.add("cayley/omega_det", np.max(cj.det_residual / np.abs(cj.complex_det)), tol)
    rep.add("cayley/omega_real_jacobian", np.max(cj.real_residual / cj.real), tol)
    rep.add("cayley/inverse_jacobians",
            _rel(geo.psi_real_jacobian(X) * geo.omega_real_jacobian(px), np.ones(count)), tol)
    for beta in (0.5, 1.7, n + m + alpha):
        lhs = geo.principal_pow(ip, beta)
        rhs = (4 ** beta * geo.principal_pow(lam, beta)
               / (geo.principal_pow(d, beta) * geo.principal_pow(dy, beta)))
        rep.add(f"cayley/magic_power/{beta:g}", _rel(lhs, rhs), 1e-11 * tol_scale)

    # distances
    rep.add("rho/siegel_vs_ball", np.max(np.abs(geo.rho_siegel(X, Y) - geo.rho_ball(px, py))), tol)
    rep.add("rho/ball_vs_mobius", np.max(np.abs(geo.rho_ball(Z, W) - np.sqrt(geo.norm_sq(geo.mobius(Z, W))))), tol)
    rep.add("rho/symmetry", max(np.max(np.abs(geo.rho_ball(Z, W) - geo.rho_ball(W, Z))),
                                np.max(np.abs(geo.rho_siegel(X, Y) - geo.rho_siegel(Y, X)))), tol)
    M = geo.random_unitary(rng, n)
    rep.add("rho/rotation", np.max(np.abs(geo.rho_ball(Z @ M.T, W @ M.T) - geo.rho_ball(Z, W))), tol)

    # Siegel factors
    h, q = ker.siegel_factors(params, X)
    rep.add("h/base_point", abs(complex(ker.siegel_factors(params, base)[0]) - 1), tol)
    rep.add("q/abs", np.max(np.abs(np.abs(q) - 1)), tol)
    h_abs = 4 * (1 - geo.norm_sq(px)) ** alpha * geo.psi_real_jacobian(X) / geo.siegel_defect(X) ** alpha
    rep.add("h/abs", _rel(np.abs(h) ** 2, h_abs), 1e-11 * tol_scale)
    hw = ker.siegel_factors(params, geo.cayley_to_siegel(Z))[0]
    lhs = 0.25 * np.abs(hw) ** 2 * ((1 - geo.norm_sq(Z)) / np.abs(1 + Z[..., -1]) ** 2) ** alpha \
        * geo.omega_real_jacobian(Z)
    rep.add("h/main_property", _rel(lhs, (1 - geo.norm_sq(Z)) ** alpha), 1e-11 * tol_scale)

    # kernels
    rng_v, Zv, Xv = _points(params, seed, variant_points, 5)
    Wv = geo.random_ball_points(rng_v, n, variant_points)
    Yv = geo.random_siegel_points(rng_v, n, variant_points)
    rep.add("kernel/ball_variants", _variant_gap(ker.kernel_ball_variants(params, Zv, Wv)), 1e-9 * tol_scale)
    rep.add("kernel/siegel_variants", _variant_gap(ker.kernel_siegel_variants(params, Xv, Yv)), 1e-9 * tol_scale)
    r0 = _r_minus(params)(geo.norm_sq(geo.to_ext(W)))
    rep.add("kernel/ball_at_0", _rel(ker.kernel_ball(params, np.zeros(n), W), r0), tol)
    rep.add("kernel/ball_diag", _rel(ker.kernel_ball(params, Z, Z), ker.kernel_ball_diag(params, Z)), tol)
    rep.add("kernel/siegel_diag", _rel(ker.kernel_siegel(params, X, X), ker.kernel_siegel_diag(params, X)), tol)
    anchor = ker._norm_constant(params)
    rep.add("kernel/siegel_base_point", _rel(ker.kernel_siegel(params, base, base), anchor), 1e-12 * tol_scale)
    K = ker.kernel_ball(params, Z, W)
    rep.add("kernel/ball_hermitian", _rel(K, np.conj(ker.kernel_ball(params, W, Z))), tol)
    Ks = ker.kernel_siegel(params, X, Y)
    rep.add("kernel/siegel_hermitian", _rel(Ks, np.conj(ker.kernel_siegel(params, Y, X))), tol)
    rep.add("kernel/siegel_pushforward", _rel(ker.kernel_siegel_pushforward(params, Xv, Yv),
                                              ker.kernel_siegel(params, Xv, Yv)), tol)
    rep.add("kernel/ball_pushforward", _rel(ker.kernel_ball_pushforward(params, Zv, Wv),
                                            ker.kernel_ball(params, Zv, Wv)), tol)
    if n == 1:
        rep.add("kernel/halfplane", _rel(ker.kernel_halfplane(params, X, Y), Ks), tol)
    rep.add("kernel/rotation", _rel(ker.kernel_ball(params, Z @ M.T, W @ M.T), K), tol)
    for name, spec, pts in (("ball", ker.KernelSpec(params, "ball"), Z[:20]),
                            ("siegel", ker.KernelSpec(params, "siegel"), X[:20])):
        herm, neg = _gram_check(ker.gram_matrix(spec, pts))
        rep.add(f"gram/{name}_hermitian", herm, 1e-12 * tol_scale)
        rep.add(f"gram/{name}_psd", neg, 1e-8 * tol_scale)
    return rep


def _pointwise_rel(got, want) -> float:
    """max |got - want| relative to the largest |want| over the sample."""
    return float(np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300))


def wirtinger_step(order: int) -> float:
    """Finite-difference step: 1e-3 up to third order.

    At fourth order roundoff grows like eps / h^4 and overtakes the h^4
    truncation error below h ~ 3e-3, so a slightly larger step is used.
    """
    return 1e-3 if order <= 3 else 4e-3


def remark_fixture_residual(f: MixedPoly, xi: np.ndarray) -> float:
    """n = 2, m = 2: D^{(1,0)} of u = q_2 (f o psi) against 2i (D^{(1,0)} f)(psi(xi)) / (1 - i xi_2)."""
    def u(points):
        pts = np.asarray(points)
        q = (1 + 1j * np.conj(pts[..., 1])) / (1 - 1j * pts[..., 1])
        return q * f(geo.cayley_to_ball(pts))

    df = wirtinger_deriv(f, (1, 0))
    worst = 0.0
    for x in xi:
        num = numeric_wirtinger(u, (1, 0), x, h=1e-3, domain="siegel")
        want = 2j * complex(df(geo.cayley_to_ball(x))) / (1 - 1j * x[1])
        worst = max(worst, abs(num - want) / abs(want))
    return worst


def suite_unitary(params: SpaceParams, cfg: MCConfig | None = None, threads: int = 1,
                  n_points: int = 200, tol_scale: float = 1.0) -> VerifyReport:
    """Unitarity of U_a and V, U_a^2 = I, V* V = I, and preserved polyanalyticity."""
    cfg = cfg or MCConfig()
    rep = VerifyReport("unitary")
    n, m = params.n, params.m
    tol = 1e-10 * tol_scale
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 6]))
    f = random_mixed_poly(rng, n, m, max_degree=4, max_terms=10)
    a = geo.random_ball_points(rng, n, 1, rmax=0.6)[0]
    norm2 = inner_product(f, f, params).real

    Uf = ker.U_operator(params, a, f)
    Vf = ker.V_operator(params, f)
    est, err = mc_integrate(lambda w: np.stack([np.abs(f(w)) ** 2, np.abs(Uf(w)) ** 2], axis=-1),
                            "ball", cfg, params, threads)
    rep.add("norm/f", abs(est[0] - norm2), mc_tol(err[0], norm2, tol_scale), err[0])
    rep.add("norm/U_a", abs(est[1] - norm2), mc_tol(err[1], norm2, tol_scale), err[1])
    est, err = mc_integrate(lambda x: np.abs(Vf(x)) ** 2, "siegel", cfg, params, threads)
    rep.add("norm/V", abs(est - norm2), mc_tol(err, norm2, tol_scale), err)

    Z = geo.random_ball_points(rng, n, n_points)
    X = geo.random_siegel_points(rng, n, n_points)
    fz = f(Z)
    rep.add("U/a0", _pointwise_rel(ker.apply_U(params, np.zeros(n), f, Z), fz), 0.0)
    rep.add("U/involution", _pointwise_rel(ker.apply_U(params, a, Uf, Z), fz), tol)
    base = np.zeros(n, dtype=complex)
    base[-1] = 1j
    one = MixedPoly.constant(n)
    rep.add("V/base_point", abs(complex(ker.apply_V(params, one, base)) - 1), tol)
    PX = geo.cayley_to_ball(X)
    rep.add("V/roundtrip", _pointwise_rel(ker.apply_V_inverse(params, Vf, PX), f(PX)), tol)

    # D^k of order m vanishes for U_a f and V f
    step = wirtinger_step(m)
    worst_u = worst_v = 0.0
    zs = geo.random_ball_points(rng, n, 3, rmax=0.5)
    xs = geo.random_siegel_points(rng, n, 3, floor=0.5)
    for k in multi_indices(n, m):
        for z in zs:
            val, scale = numeric_wirtinger(Uf, k, z, h=step, with_scale=True)
            worst_u = max(worst_u, abs(val) / scale)
        for x in xs:
            val, scale = numeric_wirtinger(Vf, k, x, h=step, with_scale=True)
            worst_v = max(worst_v, abs(val) / scale)
    rep.add("polyanalytic/U_a", worst_u, 1e-4 * tol_scale)
    rep.add("polyanalytic/V", worst_v, 1e-4 * tol_scale)
    if n == 2 and m == 2:
        # the extra zbar_1 keeps D^{(1,0)} f away from zero
        fr = f + MixedPoly.zbar(n, 0)
        rep.add("polyanalytic/remark_D10", remark_fixture_residual(fr, xs), 1e-6 * tol_scale)
    return rep


def suite_berezin(params: SpaceParams, seed: int = 0, count: int = 100, tol_scale: float = 1.0) -> VerifyReport:
    """Finite-rank Berezin transforms: non-injectivity, rank one, Cayley transport."""
    rep = VerifyReport("berezin")
    n = params.n
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    ball = ker.KernelSpec(params, "ball")
    siegel = ker.KernelSpec(params, "siegel")
    Z = geo.random_ball_points(rng, n, count)
    X = geo.random_siegel_points(rng, n, count)

    rep.add("zero_operator", np.max(np.abs(ker.berezin_finite_rank(ker.FiniteRankOp(), ball, Z))), 0.0)
    one = MixedPoly.constant(n)
    rank_one = ker.FiniteRankOp([(1.0, one, one)])
    rep.add("rank_one", _rel(ker.berezin_finite_rank(rank_one, ball, Z), 1 / ker.kernel_ball(params, Z, Z).real),
            1e-10 * tol_scale)
    if params.m >= 2:
        # S = <., z1> z1 - <., zbar1> zbar1 lies in the space only when m >= 2
        S = ker.nonzero_berezin_null_operator(n)
        rep.add("S/berezin_zero", np.max(np.abs(ker.berezin_finite_rank(S, ball, Z))), 1e-14 * tol_scale)
        z1 = MixedPoly.z(n, 0)
        val = abs(inner_product(S.apply(z1, params), z1, params))
        rep.add("S/nonzero", val, 1e-12, bound="lower")

    # Ber_H2(A)(xi) = Ber_H1(V* A V)(psi(xi)) with A = sum c <., V l> V r
    polys = _polys(rng, params, 4, max_degree=3, max_terms=8)
    coefs = [complex(c) for c in rng.standard_normal(2) + 1j * rng.standard_normal(2)]
    on_ball = ker.FiniteRankOp([(coefs[0], polys[0], polys[1]), (coefs[1], polys[2], polys[3])])
    on_siegel = ker.FiniteRankOp([(c, ker.V_operator(params, l), ker.V_operator(params, r))
                                  for c, l, r in on_ball.terms])
    b2 = ker.berezin_finite_rank(on_siegel, siegel, X)
    PX = geo.cayley_to_ball(X)
    b1 = ker.berezin_finite_rank(on_ball, ball, PX)
    scale = sum(abs(c) * np.abs(l(PX)) * np.abs(r(PX)) for c, l, r in on_ball.terms) / ker.kernel_ball_diag(params, PX)
    rep.add("cayley_transport", float(np.max(np.abs(b2 - b1) / scale)), 1e-10 * tol_scale)
    return rep


SUITES = ("mvp", "rk", "identities", "unitary", "berezin")


def run_suite(name: str, params: SpaceParams, cfg: MCConfig | None = None, threads: int = 1,
              tol_scale: float = 1.0, z_list=None) -> VerifyReport:
    cfg = cfg or MCConfig()
    if name == "mvp":
        return suite_mvp(params, seed=cfg.seed, tol_scale=tol_scale)
    if name == "rk":
        return suite_reproducing(params, z_list, cfg, threads=threads, tol_scale=tol_scale)
    if name == "identities":
        return suite_identities(params, seed=cfg.seed, tol_scale=tol_scale)
    if name == "unitary":
        return suite_unitary(params, cfg, threads=threads, tol_scale=tol_scale)
    if name == "berezin":
        return suite_berezin(params, seed=cfg.seed, tol_scale=tol_scale)
    if name == "all":
        rep = VerifyReport("all")
        for s in SUITES:
            rep.extend(run_suite(s, params, cfg, threads, tol_scale, z_list), prefix=s)
        return rep
    raise ValueError(f"unknown suite {name!r}")
