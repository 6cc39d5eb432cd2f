"""Reproducing kernels of A_m^2(B_n, mu_alpha) and A_m^2(H_n, nu_alpha).

Also the weighted shifts that transport functions between these spaces:
U_a f = (f o phi_a) p_{m,a} g_{alpha,a} on the ball and
V u = (u o psi) h_alpha q_m from the ball to the Siegel domain.
All non-integer powers are principal-branch powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError
from .geometry import (
    ball_ratio_ext, cayley_to_ball, cayley_to_siegel, check_ball, check_siegel, inner,
    mobius, norm_sq, principal_pow, siegel_defect, siegel_lambda, siegel_ratio_ext, to_ext,
)
from .multipoly import MixedPoly, inner_product
from .params import SpaceParams
from .special_fn import JacobiParams, RPolyParams, UniPoly, jacobi_eval, log_beta, r_poly, rising

DOMAINS = ("ball", "siegel")


@dataclass(frozen=True)
class KernelSpec:
    params: SpaceParams
    domain: str = "ball"

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")

    def kernel(self, z, w):
        fn = kernel_ball if self.domain == "ball" else kernel_siegel
        return fn(self.params, z, w)

    def diag(self, z):
        fn = kernel_ball_diag if self.domain == "ball" else kernel_siegel_diag
        return fn(self.params, z)


@dataclass(frozen=True)
class FnHandle:
    """A complex function on a domain, evaluated on point arrays of shape (..., n)."""

    fn: Callable[[np.ndarray], np.ndarray]
    domain: str = "ball"
    note: str = ""

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))

    @classmethod
    def from_poly(cls, p: MixedPoly, domain: str = "ball") -> "FnHandle":
        return cls(p, domain, note=f"polynomial with {len(p)} terms")


Member = Union[MixedPoly, FnHandle]


@dataclass
class FiniteRankOp:
    """A h = sum_i c_i <h, left_i> right_i."""

    terms: list[tuple[complex, Member, Member]] = field(default_factory=list)

    def apply(self, h: MixedPoly, params: SpaceParams) -> MixedPoly:
        """Exact image of a polynomial; every member must be a MixedPoly."""
        out = MixedPoly(h.dim)
        for c, left, right in self.terms:
            if not (isinstance(left, MixedPoly) and isinstance(right, MixedPoly)):
                raise TypeError("exact application needs polynomial-backed members")
            out = out + right * (c * inner_product(h, left, params))
        return out


def _mean_exponent(p: SpaceParams) -> float:
    return p.n + 1 + p.alpha


def _require_right_half_plane(t, what: str):
    if np.any(np.real(t) <= 0):
        raise DomainError(f"{what} left the right half-plane; principal powers would not factor")


def _r(p: SpaceParams):
    return r_poly(RPolyParams(p.m - 1, p.alpha, p.n - 1))


# weighted shift on the ball

def pessoa_factor(m: int, a, z):
    """p_{m,a}(z) = ((1 - <a,z>) / (1 - <z,a>))^(m-1), a unimodular factor."""
    a, z = check_ball(a), check_ball(z)
    return ((1 - inner(a, z)) / (1 - inner(z, a))) ** (m - 1)


def norm_factor_ball(params: SpaceParams, a, z):
    """g_{alpha,a}(z) = (1-|a|^2)^((n+1+alpha)/2) / (1 - <z,a>)^(n+1+alpha)."""
    a, z = check_ball(a), check_ball(z)
    e = _mean_exponent(params)
    base = 1 - inner(z, a)
    _require_right_half_plane(base, "1 - <z, a>")
    return (1 - norm_sq(a)) ** (e / 2) / principal_pow(base, e)


def shift_weight(params: SpaceParams, a, z):
    """J_a = p_{m,a} g_{alpha,a}, the multiplier of U_a."""
    return pessoa_factor(params.m, a, z) * norm_factor_ball(params, a, z)


def apply_U(params: SpaceParams, a, f, z):
    """(U_a f)(z) = f(phi_a(z)) p_{m,a}(z) g_{alpha,a}(z)."""
    return f(mobius(a, z)) * shift_weight(params, a, z)


def U_operator(params: SpaceParams, a, f) -> FnHandle:
    a = np.asarray(a, dtype=complex)
    return FnHandle(lambda z: apply_U(params, a, f, z), "ball", "U_a f")


# ball kernel

def _ball_prefactor(params: SpaceParams, z, w):
    z, w = check_ball(z), check_ball(w)
    base = 1 - inner(w, z)
    _require_right_half_plane(base, "1 - <w, z>")
    return (1 - inner(z, w)) ** (params.m - 1) / principal_pow(base, params.n + params.m + params.alpha)


def _dist_arg(ratio):
    """rho^2 = 1 - ratio kept in extended precision.

    Near a root of R the relative value of the kernel is as sensitive to
    rho^2 as R'/R, so the argument must not be rounded to double first.
    """
    return np.clip(1 - ratio, 0, 1)


def _out(v):
    return np.asarray(v).astype(complex)


def kernel_ball(params: SpaceParams, z, w):
    """K_z(w): the reproducing kernel at z, evaluated at w."""
    return _out(_ball_prefactor(params, z, w) * _r(params)(_dist_arg(ball_ratio_ext(z, w))))


def _norm_constant(params: SpaceParams) -> float:
    n, m, a = params.n, params.m, params.alpha
    return math.comb(n + m - 1, n) * math.exp(log_beta(a + 1, n) - log_beta(a + m, n))


def kernel_ball_diag(params: SpaceParams, z):
    """K_z(z) = ||K_z||^2 in closed form."""
    z = check_ball(z)
    return _norm_constant(params) * (1 - norm_sq(z)) ** (-(params.n + params.alpha + 1))


def _jacobi_factor(params: SpaceParams) -> float:
    n, m, a = params.n, params.m, params.alpha
    return (-1) ** (m - 1) * math.exp(log_beta(a + 1, n) - log_beta(a + m, n))


def _explicit_sum(params: SpaceParams, x):
    n, m, a = params.n, params.m, params.alpha
    ld = np.longdouble
    x = np.asarray(x).astype(ld)
    lead = (-1) ** (m - 1) / (rising(a + 1, n, ld) * ld(math.factorial(m - 1)))
    terms = [(-1) ** s * ld(math.comb(m - 1, s)) * rising(a + s + 1, m + n - 1, ld) for s in range(m)]
    return (lead * UniPoly(np.array(terms, dtype=ld)))(x)


def kernel_ball_variants(params: SpaceParams, z, w) -> dict[str, np.ndarray]:
    """The kernel through four equivalent closed forms.

    ``rk``: R polynomial of the squared distance; ``jacobi``: Jacobi
    polynomial of 2 rho^2 - 1; ``jacobi2``: the same with rho^2 expanded
    through the Moebius identity; ``explicit``: terminal Gamma-ratio sum.
    """
    z, w = check_ball(z), check_ball(w)
    pref = _ball_prefactor(params, z, w)
    x = ball_ratio_ext(z, w)
    return _variants(params, pref, x)


def _variants(params: SpaceParams, pref, x) -> dict[str, np.ndarray]:
    rho2 = _dist_arg(x)
    jp = JacobiParams(params.alpha, params.n, params.m - 1)
    c = _jacobi_factor(params)
    return {
        "rk": _out(pref * _r(params)(rho2)),
        "jacobi": _out(pref * c * jacobi_eval(jp, 2 * rho2 - 1)),
        "jacobi2": _out(pref * c * jacobi_eval(jp, 1 - 2 * x)),
        "explicit": _out(pref * _explicit_sum(params, x)),
    }


# Siegel domain

def siegel_factors(params: SpaceParams, xi):
    """(h_alpha(xi), q_m(xi)) with h_alpha = (2/(1 - i xi_n))^(n+alpha+1)."""
    xi = check_siegel(xi)
    xn = xi[..., -1]
    base = 2 / (1 - 1j * xn)
    _require_right_half_plane(base, "2 / (1 - i xi_n)")
    h = principal_pow(base, _mean_exponent(params))
    q = ((1 + 1j * np.conj(xn)) / (1 - 1j * xn)) ** (params.m - 1)
    return h, q


def cayley_weight(params: SpaceParams, xi):
    h, q = siegel_factors(params, xi)
    return h * q


def apply_V(params: SpaceParams, f, xi):
    """(V f)(xi) = f(psi(xi)) h_alpha(xi) q_m(xi)."""
    return f(cayley_to_ball(xi)) * cayley_weight(params, xi)


def apply_V_inverse(params: SpaceParams, F, z):
    """(V* F)(z) = F(omega(z)) / (h_alpha(omega z) q_m(omega z))."""
    xi = cayley_to_siegel(z)
    return F(xi) / cayley_weight(params, xi)


def V_operator(params: SpaceParams, f) -> FnHandle:
    return FnHandle(lambda xi: apply_V(params, f, xi), "siegel", "V f")


def _siegel_prefactor(params: SpaceParams, xi, eta):
    xi, eta = check_siegel(xi), check_siegel(eta)
    lam = siegel_lambda(xi, eta)
    lam_rev = siegel_lambda(eta, xi)
    _require_right_half_plane(lam_rev, "the Siegel kernel base")
    return lam ** (params.m - 1) / principal_pow(lam_rev, params.n + params.m + params.alpha)


def kernel_siegel(params: SpaceParams, xi, eta):
    """K~_xi(eta): the reproducing kernel of A_m^2(H_n, nu_alpha) at xi."""
    return _out(_siegel_prefactor(params, xi, eta) * _r(params)(_dist_arg(siegel_ratio_ext(xi, eta))))


def kernel_siegel_diag(params: SpaceParams, xi):
    xi = check_siegel(xi)
    return _norm_constant(params) * siegel_defect(xi) ** (-(params.n + params.alpha + 1))


def kernel_siegel_variants(params: SpaceParams, xi, eta) -> dict[str, np.ndarray]:
    xi, eta = check_siegel(xi), check_siegel(eta)
    pref = _siegel_prefactor(params, xi, eta)
    return _variants(params, pref, siegel_ratio_ext(xi, eta))


def kernel_halfplane(params: SpaceParams, xi, eta):
    """One-variable Siegel kernel written directly in xi, eta of the upper half-plane."""
    if params.n != 1:
        raise DomainError("the half-plane formula is one-dimensional")
    xi, eta = check_siegel(xi)[..., 0], check_siegel(eta)[..., 0]
    num = ((xi - np.conj(eta)) / 2j) ** (params.m - 1)
    den = principal_pow((eta - np.conj(xi)) / 2j, params.m + params.alpha + 1)
    xe, ee = to_ext(xi), to_ext(eta)
    t = np.abs(xe - ee) ** 2 / np.abs(np.conj(xe) - ee) ** 2
    return _out(num / den * r_poly(RPolyParams(params.m - 1, params.alpha, 0))(t))


def pushforward_kernel(K, psi_map, J_weight, u, v):
    """L_u(v) = conj(J(u)) J(v) K(psi(u), psi(v))."""
    return np.conj(J_weight(u)) * J_weight(v) * K(psi_map(u), psi_map(v))


def kernel_siegel_pushforward(params: SpaceParams, xi, eta):
    """The Siegel kernel obtained by transporting the ball kernel through V."""
    return _out(pushforward_kernel(lambda z, w: kernel_ball(params, z, w),
                                   lambda x: cayley_to_ball(to_ext(x)),
                                   lambda x: cayley_weight(params, x), xi, eta))


def kernel_ball_pushforward(params: SpaceParams, z, w):
    """K_z(w) rebuilt from K_0 through phi_z with the weight p_{m,z} g_{alpha,z}."""
    z = check_ball(z)
    return _out(pushforward_kernel(lambda u, v: kernel_ball(params, u, v),
                                   lambda x: mobius(to_ext(z), to_ext(x)),
                                   lambda x: shift_weight(params, z, x), z, w))


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """[K_{z_r}(z_s)]_{r,s} for a list of points."""
    P = np.asarray(points, dtype=complex)
    return spec.kernel(P[:, None, :], P[None, :, :])


def berezin_finite_rank(op: FiniteRankOp, spec: KernelSpec, z):
    """Ber(A)(z) = <A K_z, K_z> / K_z(z) for a finite-rank A.

    Uses <K_z, left> = conj(left(z)) and <right, K_z> = right(z).
    """
    z = np.asarray(z, dtype=complex)
    total = np.zeros(z.shape[:-1], dtype=complex)
    for c, left, right in op.terms:
        total = total + c * np.conj(left(z)) * right(z)
    return total / spec.diag(z)


def nonzero_berezin_null_operator(n: int) -> FiniteRankOp:
    """S h = <h, z_1> z_1 - <h, zbar_1> zbar_1, nonzero on A_m^2 for m >= 2 but Ber(S) = 0."""
    f, g = MixedPoly.z(n, 0), MixedPoly.zbar(n, 0)
    return FiniteRankOp([(1.0, f, f), (-1.0, g, g)])
