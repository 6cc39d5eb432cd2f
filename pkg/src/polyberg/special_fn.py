"""Gamma/Beta helpers, Jacobi polynomials by explicit sums, and the
reproducing polynomials R_m^{(alpha, beta)} of the weighted interval.

R_m^{(alpha, beta)} is the degree-m polynomial satisfying

    1/B(alpha+1, beta+1) * int_0^1 h(t) R(t) (1-t)^alpha t^beta dt = h(0)

for every polynomial h with deg h <= m.  Two explicit coefficient formulas
are provided (``r_poly`` and ``r_poly_alt``) together with the two Jacobi
representations (``r_poly_via_jacobi``); they are meant to be checked
against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

# documented practical limit on the degree of R polynomials
R_POLY_MAX_DEGREE = 30


def log_gamma(x: float) -> float:
    """Natural logarithm of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta function requires positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta_fn(a: float, b: float) -> float:
    """B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b), evaluated through log_gamma."""
    return math.exp(log_beta(a, b))


def binom_real(a: float, k: int, dtype=float):
    """Generalized binomial coefficient binom(a, k) for real a and integer k >= 0."""
    if k < 0:
        return dtype(0.0)
    out = dtype(1.0)
    a = dtype(a)
    for i in range(1, k + 1):
        out *= (a - i + 1) / i
    return out


def rising(x: float, k: int, dtype=float):
    """Pochhammer symbol (x)_k = Gamma(x+k)/Gamma(x) as a finite product."""
    out = dtype(1.0)
    x = dtype(x)
    for i in range(k):
        out *= x + i
    return out


@dataclass(frozen=True)
class JacobiParams:
    xi: float
    eta: float
    m: int

    def __post_init__(self):
        if not (self.xi > -1 and self.eta > -1):
            raise DomainError(f"Jacobi parameters must exceed -1, got ({self.xi}, {self.eta})")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError(f"Jacobi degree must be a non-negative integer, got {self.m}")


@dataclass(frozen=True)
class RPolyParams:
    m: int
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(f"alpha and beta must exceed -1, got ({self.alpha}, {self.beta})")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError(f"degree m must be a non-negative integer, got {self.m}")
        if self.m > R_POLY_MAX_DEGREE:
            raise DomainError(f"degree m > {R_POLY_MAX_DEGREE} is not supported")


class UniPoly:
    """Dense univariate polynomial, coefficients in ascending order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs))
        if c.size == 0:
            c = np.zeros(1, dtype=c.dtype if c.dtype.kind in "fc" else float)
        c = np.trim_zeros(c, "b")
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        t = np.asarray(t)
        dtype = np.result_type(t, self.coeffs, float)
        acc = np.zeros_like(t, dtype=dtype)
        for c in self.coeffs[::-1]:
            acc = acc * t + c
        # extended-precision coefficients only sharpen the accumulation
        if dtype == np.longdouble:
            acc = acc.astype(float)
        elif dtype == np.clongdouble:
            acc = acc.astype(complex)
        return acc if acc.ndim else acc[()]

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            return UniPoly(np.convolve(self.coeffs, other.coeffs))
        return UniPoly(self.coeffs * other)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        dtype = np.result_type(self.coeffs, other.coeffs)
        out = np.zeros(n, dtype=dtype)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return UniPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self + UniPoly(-other.coeffs)

    def __eq__(self, other):
        return isinstance(other, UniPoly) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"UniPoly({self.coeffs.tolist()!r})"


def _real_arg(x):
    """Real array argument; long double input keeps its precision for the whole sum."""
    x = np.asarray(x)
    dt = np.longdouble if x.dtype == np.longdouble else float
    return x.astype(dt), dt


def jacobi_eval(p: JacobiParams, x, form: int = 1):
    """P_m^{(xi, eta)}(x) by an explicit sum.

    ``form=1`` expands in powers of (x-1)/2, ``form=2`` in powers of
    (x+1)/2.  Both are exact identities, so they serve as mutual oracles.
    The second sum carries an overall (-1)^m: it is the first sum applied
    to P_m^{(eta, xi)}(-x).
    """
    x, dt = _real_arg(x)
    # parameter sums in the working precision too: near x = -1 the sum is
    # sensitive to a one-ulp change in xi + eta
    xi, eta, m = dt(p.xi), dt(p.eta), p.m
    if form == 1:
        u = (x - 1) / 2
        coeffs = [binom_real(xi + eta + m + s, s, dt) * binom_real(xi + m, m - s, dt) for s in range(m + 1)]
    elif form == 2:
        u = (x + 1) / 2
        coeffs = [(-1) ** (m + s) * binom_real(xi + eta + m + s, s, dt) * binom_real(eta + m, m - s, dt)
                  for s in range(m + 1)]
    else:
        raise ValueError(f"unknown explicit-sum form {form!r}")
    return UniPoly(np.array(coeffs, dtype=dt))(u)


@lru_cache(maxsize=256)
def _r_poly_cached(m: int, alpha: float, beta: float) -> UniPoly:
    a, b = alpha, beta
    # Gamma ratios with integer-shifted arguments are finite products; extended
    # precision keeps the coefficients accurate enough to evaluate near roots.
    ld = np.longdouble
    a, b = ld(a), ld(b)
    base = rising(a + 1, m, ld)
    with np.errstate(over="ignore", invalid="ignore"):
        coeffs = np.array([(-1) ** s * rising(a + b + 2, m + s, ld) * rising(b + s + 2, m - s, ld)
                           / (base * ld(math.factorial(s)) * ld(math.factorial(m - s)))
                           for s in range(m + 1)], dtype=ld)
    if np.all(np.isfinite(coeffs)) and np.all(np.abs(coeffs) < np.finfo(float).max):
        return UniPoly(coeffs)
    a, b = float(a), float(b)
    coeffs = np.empty(m + 1)
    # overflow fallback: the same coefficients in log space with sign tracking
    log_pref = (math.lgamma(a + 1) + math.lgamma(b + m + 2)
                - math.lgamma(a + b + 2) - math.lgamma(a + m + 1))
    for s in range(m + 1):
        log_c = (log_pref + math.lgamma(a + b + m + s + 2)
                 - math.lgamma(s + 1) - math.lgamma(m - s + 1) - math.lgamma(b + s + 2))
        coeffs[s] = (-1) ** s * math.exp(log_c)
    return UniPoly(coeffs)


def r_poly(p: RPolyParams) -> UniPoly:
    """Coefficients of R_m^{(alpha, beta)} from the Gamma-ratio formula.

    The ratios are evaluated as rising factorials, with a log-space
    fallback if a product overflows.
    """
    return _r_poly_cached(int(p.m), float(p.alpha), float(p.beta))


def r_poly_alt(p: RPolyParams) -> UniPoly:
    """Coefficients of R_m^{(alpha, beta)} from the binomial/Beta formula."""
    m, a, b = int(p.m), float(p.alpha), float(p.beta)
    if m == 0:
        return UniPoly([1.0])
    log_pref = (math.lgamma(a + 1) + math.lgamma(b + m + 2) - math.lgamma(a + b + 2)
                - math.log(a + m) - math.lgamma(m + 1))
    coeffs = np.empty(m + 1)
    for s in range(m + 1):
        coeffs[s] = (-1) ** s * math.comb(m, s) * math.exp(log_pref - log_beta(a + m, b + s + 2))
    return UniPoly(coeffs)


def r_poly_via_jacobi(p: RPolyParams, t, reflected: bool = False, form: int = 1):
    """Evaluate R_m^{(alpha, beta)}(t) through a shifted Jacobi polynomial.

    The default uses P_m^{(alpha, beta+1)}(2t-1); ``reflected`` uses the
    symmetric representation P_m^{(beta+1, alpha)}(1-2t).
    """
    m, a, b = int(p.m), float(p.alpha), float(p.beta)
    ratio = math.exp(log_beta(a + 1, b + 1) - log_beta(a + m + 1, b + 1))
    t, _ = _real_arg(t)
    if reflected:
        return ratio * jacobi_eval(JacobiParams(b + 1, a, m), 1 - 2 * t, form=form)
    return (-1) ** m * ratio * jacobi_eval(JacobiParams(a, b + 1, m), 2 * t - 1, form=form)
