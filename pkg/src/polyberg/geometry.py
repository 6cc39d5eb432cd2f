"""Geometry of the unit ball B_n and the Siegel domain H_n.

Points are complex arrays whose last axis holds the n coordinates; every
function broadcasts over the leading axes.  The Hermitian product is
<z, w> = sum_s z_s conj(w_s).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# points closer than this to the boundary are rejected
DOMAIN_MARGIN = 1e-9

# extended complex type (80-bit long double on x86); inputs of this type are preserved
EXT = np.clongdouble


def _complex_dtype(arr: np.ndarray):
    return EXT if arr.dtype in (np.dtype(np.clongdouble), np.dtype(np.longdouble)) else complex


def to_ext(z) -> np.ndarray:
    """Upcast points to extended precision."""
    return np.asarray(z).astype(EXT)


def inner(z, w):
    """Hermitian product <z, w> over the last axis."""
    return np.sum(np.asarray(z) * np.conj(w), axis=-1)


def norm_sq(z):
    z = np.asarray(z)
    return np.sum(z.real ** 2 + z.imag ** 2, axis=-1)


def as_points(z, n: int | None = None) -> np.ndarray:
    Z = np.asarray(z)
    Z = Z.astype(_complex_dtype(Z), copy=False)
    if Z.ndim == 0:
        Z = Z.reshape(1)
    if n is not None and Z.shape[-1] != n:
        raise DomainError(f"expected points with {n} coordinates, got shape {Z.shape}")
    return Z


def check_ball(z, margin: float = DOMAIN_MARGIN) -> np.ndarray:
    Z = as_points(z)
    r = np.sqrt(norm_sq(Z))
    if not np.all(np.isfinite(r)) or np.any(r > 1 - margin):
        raise DomainError(f"point outside the unit ball margin (max |z| = {np.max(r):.17g})")
    return Z


def siegel_defect(xi):
    """Im(xi_n) - |xi'|^2, positive exactly on the Siegel domain."""
    X = np.asarray(xi)
    return X[..., -1].imag - norm_sq(X[..., :-1])


def check_siegel(xi, margin: float = DOMAIN_MARGIN) -> np.ndarray:
    X = as_points(xi)
    d = siegel_defect(X)
    if not np.all(np.isfinite(d)) or np.any(d < margin):
        raise DomainError(f"point outside the Siegel domain margin (min defect = {np.min(d):.17g})")
    return X


@dataclass(frozen=True)
class CPoint:
    """A point of C^n with an optional domain tag, validated on creation."""

    coords: np.ndarray = field(compare=False)
    domain: str = "none"

    def __post_init__(self):
        c = as_points(self.coords)
        if c.ndim != 1:
            raise DomainError("a CPoint holds a single point")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if self.domain == "ball":
            check_ball(c)
        elif self.domain == "siegel":
            check_siegel(c)
        elif self.domain != "none":
            raise ValueError(f"unknown domain tag {self.domain!r}")

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def principal_arg(t):
    """Argument in (-pi, pi]; a negative real with signed-zero imaginary part maps to pi."""
    arg = np.angle(t)
    return np.where(arg == -np.pi, np.pi, arg)


def principal_pow(t, beta: float):
    """t**beta on the principal branch: exp(beta (ln|t| + i arg t))."""
    t = np.asarray(t)
    t = t.astype(_complex_dtype(t), copy=False)
    zero = t == 0
    if np.any(zero):
        if beta <= 0:
            raise DomainError(f"0**{beta} is undefined")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(beta * (np.log(np.abs(t)) + 1j * principal_arg(t)))
    out = np.where(zero, 0.0, out)
    return out if out.ndim else out[()]


# Moebius automorphisms of the ball

def mobius(a, z):
    """phi_a(z): the involutive automorphism of B_n exchanging a and 0."""
    a = check_ball(a)
    z = check_ball(z)
    aa = norm_sq(a)[..., None]
    za = inner(z, a)[..., None]
    is_zero = aa == 0
    safe = np.where(is_zero, 1.0, aa)
    proj = za / safe * a
    num = a - proj - np.sqrt(1 - aa) * (z - proj)
    out = num / (1 - za)
    return np.where(is_zero, z, out)


def mobius_jacobian(a, z) -> np.ndarray:
    """Complex Jacobian matrix d phi_a / dz, shape (..., n, n)."""
    a = check_ball(a)
    z = check_ball(z)
    n = z.shape[-1]
    a, z = np.broadcast_arrays(a, z)
    aa = norm_sq(a)[..., None, None]
    is_zero = aa == 0
    safe = np.where(is_zero, 1.0, aa)
    eye = np.eye(n)
    P = a[..., :, None] * np.conj(a)[..., None, :] / safe
    A = P + np.sqrt(1 - aa) * (eye - P)
    d = (1 - inner(z, a))[..., None, None]
    phi = mobius(a, z)
    J = (phi[..., :, None] * np.conj(a)[..., None, :] - A) / d
    return np.where(is_zero, eye, J)


def mobius_real_jacobian(a, z):
    """Closed form ((1 - |a|^2) / |1 - <z, a>|^2)^(n+1)."""
    a = check_ball(a)
    z = check_ball(z)
    n = z.shape[-1]
    return ((1 - norm_sq(a)) / np.abs(1 - inner(z, a)) ** 2) ** (n + 1)


def mobius_identities(a, z, w) -> dict[str, np.ndarray]:
    """Absolute residuals of the standard identities satisfied by phi_a.

    Keys: ``phi_zw`` (1 - <phi z, phi w> against its factored form),
    ``phi_zz`` (w = z case), ``phi_z0`` (w = a case) and ``jacobian``
    (|det d phi_a|^2 against the closed-form real Jacobian).
    """
    a, z, w = check_ball(a), check_ball(z), check_ball(w)
    pz, pw = mobius(a, z), mobius(a, w)
    one_aa = 1 - inner(a, a)
    zw = np.abs((1 - inner(pz, pw))
                - one_aa * (1 - inner(z, w)) / ((1 - inner(z, a)) * (1 - inner(a, w))))
    zz = np.abs((1 - norm_sq(pz)) - (1 - norm_sq(a)) * (1 - norm_sq(z)) / np.abs(1 - inner(z, a)) ** 2)
    z0 = np.abs((1 - inner(pz, a)) - one_aa / (1 - inner(z, a)))
    det = np.linalg.det(mobius_jacobian(a, z))
    jac = np.abs(np.abs(det) ** 2 - mobius_real_jacobian(a, z))
    return {"phi_zw": zw, "phi_zz": zz, "phi_z0": z0, "jacobian": jac}


def ball_ratio_ext(z, w):
    """(1-|z|^2)(1-|w|^2)/|1-<z,w>|^2 = 1 - rho^2, accumulated in extended precision."""
    z, w = to_ext(check_ball(z)), to_ext(check_ball(w))
    return (1 - norm_sq(z)) * (1 - norm_sq(w)) / np.abs(1 - inner(z, w)) ** 2


def rho_ball_sq(z, w):
    """Squared pseudohyperbolic distance 1 - (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2."""
    return np.clip(1 - ball_ratio_ext(z, w), 0.0, 1.0).astype(float)


def rho_ball(z, w):
    """Pseudohyperbolic distance |phi_z(w)| on the ball."""
    return np.sqrt(rho_ball_sq(z, w))


# Cayley transform between B_n and H_n

def cayley_to_siegel(z):
    """omega: B_n -> H_n."""
    z = check_ball(z)
    zn = z[..., -1:]
    return np.concatenate([1j * z[..., :-1] / (1 + zn), 1j * (1 - zn) / (1 + zn)], axis=-1)


def cayley_to_ball(xi):
    """psi: H_n -> B_n, the inverse of omega."""
    xi = check_siegel(xi)
    d = 1 - 1j * xi[..., -1:]
    return np.concatenate([-2j * xi[..., :-1] / d, (1 + 1j * xi[..., -1:]) / d], axis=-1)


def omega_jacobian_matrix(z) -> np.ndarray:
    z = check_ball(z)
    n = z.shape[-1]
    zn = z[..., -1]
    J = np.zeros(z.shape[:-1] + (n, n), dtype=complex)
    for s in range(n - 1):
        J[..., s, s] = 1j / (1 + zn)
        J[..., s, n - 1] = -1j * z[..., s] / (1 + zn) ** 2
    J[..., n - 1, n - 1] = -2j / (1 + zn) ** 2
    return J


def psi_jacobian_matrix(xi) -> np.ndarray:
    xi = check_siegel(xi)
    n = xi.shape[-1]
    d = 1 - 1j * xi[..., -1]
    J = np.zeros(xi.shape[:-1] + (n, n), dtype=complex)
    for s in range(n - 1):
        J[..., s, s] = -2j / d
        J[..., s, n - 1] = 2 * xi[..., s] / d ** 2
    J[..., n - 1, n - 1] = 2j / d ** 2
    return J


def omega_complex_det(z):
    z = check_ball(z)
    n = z.shape[-1]
    return -2 * 1j ** n / (1 + z[..., -1]) ** (n + 1)


def psi_complex_det(xi):
    xi = check_siegel(xi)
    n = xi.shape[-1]
    return -((-2j) ** n) / (1 - 1j * xi[..., -1]) ** (n + 1)


def omega_real_jacobian(z):
    z = check_ball(z)
    n = z.shape[-1]
    return 4 / np.abs(1 + z[..., -1]) ** (2 * (n + 1))


def psi_real_jacobian(xi):
    xi = check_siegel(xi)
    n = xi.shape[-1]
    return 4.0 ** n / np.abs(1 - 1j * xi[..., -1]) ** (2 * (n + 1))


@dataclass
class CayleyJacobians:
    complex_det: np.ndarray
    real: np.ndarray
    matrix: np.ndarray
    det_residual: np.ndarray    # |det(matrix) - complex_det|
    real_residual: np.ndarray   # ||complex_det|^2 - real|


def cayley_jacobians(point, domain: str) -> CayleyJacobians:
    """Jacobians of omega at a ball point or of psi at a Siegel point."""
    if domain == "ball":
        det, real, mat = omega_complex_det(point), omega_real_jacobian(point), omega_jacobian_matrix(point)
    elif domain == "siegel":
        det, real, mat = psi_complex_det(point), psi_real_jacobian(point), psi_jacobian_matrix(point)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    return CayleyJacobians(det, real, mat,
                           np.abs(np.linalg.det(mat) - det),
                           np.abs(np.abs(det) ** 2 - real))


def siegel_lambda(xi, eta):
    """(xi_n - conj(eta_n)) / 2i - <xi', eta'>; has positive real part on H_n."""
    xi, eta = np.asarray(xi), np.asarray(eta)
    return (xi[..., -1] - np.conj(eta[..., -1])) / 2j - inner(xi[..., :-1], eta[..., :-1])


def siegel_ratio_ext(xi, eta):
    """defect(xi) defect(eta) / |Lambda(xi, eta)|^2 = 1 - rho^2, in extended precision."""
    xi, eta = to_ext(check_siegel(xi)), to_ext(check_siegel(eta))
    return siegel_defect(xi) * siegel_defect(eta) / np.abs(siegel_lambda(xi, eta)) ** 2


def rho_siegel_sq(xi, eta):
    return np.clip(1 - siegel_ratio_ext(xi, eta), 0.0, 1.0).astype(float)


def rho_siegel(xi, eta):
    """Pseudohyperbolic distance on H_n, by the direct formula (no Cayley map)."""
    return np.sqrt(rho_siegel_sq(xi, eta))


# random points for tests and verification suites

def random_ball_points(rng: np.random.Generator, n: int, size: int, rmax: float = 0.95) -> np.ndarray:
    """Gaussian directions with radii distributed as uniform points of rmax * B_n."""
    g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    g /= np.sqrt(norm_sq(g))[:, None]
    r = rmax * rng.random(size) ** (1 / (2 * n))
    return g * r[:, None]


def random_siegel_points(rng: np.random.Generator, n: int, size: int,
                         floor: float = 1e-3) -> np.ndarray:
    """xi' Gaussian, xi_n = x + i(|xi'|^2 + s) with s exponential (plus a floor)."""
    head = (rng.standard_normal((size, n - 1)) + 1j * rng.standard_normal((size, n - 1))) / np.sqrt(2)
    x = rng.standard_normal(size)
    s = rng.exponential(1.0, size) + floor
    last = x + 1j * (norm_sq(head) + s)
    return np.concatenate([head, last[:, None]], axis=-1)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))
