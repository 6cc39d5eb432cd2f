"""Mixed polynomials sum c_{j,k} z^j zbar^k in several complex variables.

A polynomial is m-analytic (homogeneously polyanalytic of total order m)
exactly when every stored term has |k| < m.  This module provides exact
coefficient arithmetic, symbolic Wirtinger derivatives, the analytic part
``compute_g`` from the structure theorem, recentering and linear changes of
variables, and exact monomial moments over the unit ball with the weight
c_alpha (1 - |z|^2)^alpha.
"""
from __future__ import annotations

import itertools
import json
import math
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .params import SpaceParams
from .special_fn import UniPoly, log_beta

Key = tuple[tuple[int, ...], tuple[int, ...]]


class MultiIndex(tuple):
    """Tuple of non-negative integers with |k| and k! attached."""

    def __new__(cls, components: Iterable[int]):
        comps = tuple(int(c) for c in components)
        if any(c < 0 for c in comps):
            raise ValueError(f"multi-index components must be non-negative: {comps}")
        return super().__new__(cls, comps)

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(c) for c in self)

    @classmethod
    def unit(cls, dim: int, p: int) -> "MultiIndex":
        return cls(1 if s == p else 0 for s in range(dim))


def multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of length ``dim`` with |k| == order, graded-lex order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(dim), order):
        k = [0] * dim
        for s in combo:
            k[s] += 1
        out.append(tuple(k))
    return sorted(out, reverse=True)


def multi_indices_below(dim: int, bound: int) -> list[tuple[int, ...]]:
    """All multi-indices with |k| < bound."""
    return [k for d in range(bound) for k in multi_indices(dim, d)]


def _add(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class MixedPoly:
    """Finite map (j, k) -> complex coefficient of z^j zbar^k.

    Exact zero coefficients are never stored.  Instances are treated as
    immutable; every operation returns a new polynomial.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Key, complex] | None = None):
        self.dim = int(dim)
        clean: dict[Key, complex] = {}
        for (j, k), c in (terms or {}).items():
            j, k = tuple(int(x) for x in j), tuple(int(x) for x in k)
            if len(j) != self.dim or len(k) != self.dim:
                raise DomainError(f"multi-index length mismatch for dim {self.dim}: {(j, k)}")
            c = complex(c)
            if c != 0:
                clean[(j, k)] = clean.get((j, k), 0) + c
        self.terms = {key: c for key, c in clean.items() if c != 0}

    @classmethod
    def _raw(cls, dim: int, terms: dict[Key, complex]) -> "MixedPoly":
        # trusted keys from internal arithmetic; only zeros are dropped
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = {key: c for key, c in terms.items() if c != 0}
        return obj

    # construction
    @classmethod
    def constant(cls, dim: int, c: complex = 1.0) -> "MixedPoly":
        zero = (0,) * dim
        return cls(dim, {(zero, zero): c})

    @classmethod
    def z(cls, dim: int, s: int) -> "MixedPoly":
        return cls(dim, {(MultiIndex.unit(dim, s), (0,) * dim): 1.0})

    @classmethod
    def zbar(cls, dim: int, s: int) -> "MixedPoly":
        return cls(dim, {((0,) * dim, MultiIndex.unit(dim, s)): 1.0})

    @classmethod
    def monomial(cls, j: Sequence[int], k: Sequence[int], c: complex = 1.0) -> "MixedPoly":
        return cls(len(j), {(tuple(j), tuple(k)): c})

    @classmethod
    def abs_sq(cls, dim: int) -> "MixedPoly":
        """The polynomial |z|^2 = sum_s z_s zbar_s."""
        terms = {}
        for s in range(dim):
            e = MultiIndex.unit(dim, s)
            terms[(e, e)] = 1.0
        return cls(dim, terms)

    @classmethod
    def radial(cls, h: UniPoly, dim: int) -> "MixedPoly":
        """h(|z|^2) expanded as a mixed polynomial."""
        r2 = cls.abs_sq(dim)
        out = cls(dim)
        power = cls.constant(dim)
        for c in h.coeffs:
            out = out + power * complex(c)
            power = power * r2
        return out

    # inspection
    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def zbar_degree(self) -> int:
        return max((sum(k) for _, k in self.terms), default=0)

    def degree(self) -> int:
        return max((sum(j) + sum(k) for j, k in self.terms), default=0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], tuple[int, ...], complex]]:
        """Terms in canonical graded-lex order on (|j|+|k|, j, k)."""
        keys = sorted(self.terms, key=lambda jk: (sum(jk[0]) + sum(jk[1]), jk[0], jk[1]))
        return [(j, k, self.terms[(j, k)]) for j, k in keys]

    # arithmetic
    def _check(self, other: "MixedPoly"):
        if other.dim != self.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, MixedPoly):
            other = MixedPoly.constant(self.dim, other)
        self._check(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return MixedPoly._raw(self.dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return MixedPoly._raw(self.dim, {key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MixedPoly):
            c = complex(other)
            return MixedPoly._raw(self.dim, {key: v * c for key, v in self.terms.items()})
        self._check(other)
        terms: dict[Key, complex] = {}
        for (j1, k1), c1 in self.terms.items():
            for (j2, k2), c2 in other.terms.items():
                key = (_add(j1, j2), _add(k1, k2))
                terms[key] = terms.get(key, 0) + c1 * c2
        return MixedPoly._raw(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if int(e) != e or e < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = MixedPoly.constant(self.dim)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conj(self) -> "MixedPoly":
        """The polynomial whose values are the complex conjugates of self's."""
        return MixedPoly(self.dim, {(k, j): c.conjugate() for (j, k), c in self.terms.items()})

    def scaled(self, r: float) -> "MixedPoly":
        """z -> p(r z) for real r."""
        return MixedPoly(self.dim, {(j, k): c * r ** (sum(j) + sum(k))
                                    for (j, k), c in self.terms.items()})

    def allclose(self, other: "MixedPoly", tol: float = 1e-12) -> bool:
        """Coefficientwise comparison, tolerance relative to the largest coefficient."""
        diff = self - other
        scale = max(1.0, self.max_abs_coeff(), other.max_abs_coeff())
        return diff.max_abs_coeff() <= tol * scale

    def __eq__(self, other):
        return isinstance(other, MixedPoly) and self.dim == other.dim and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return f"MixedPoly(dim={self.dim}, 0)"
        parts = []
        for j, k, c in self.sorted_terms():
            mono = "".join(f"z{s + 1}^{e}" for s, e in enumerate(j) if e)
            mono += "".join(f"zb{s + 1}^{e}" for s, e in enumerate(k) if e)
            parts.append(f"({c:.6g}){'*' + mono if mono else ''}")
        return f"MixedPoly(dim={self.dim}, {' + '.join(parts)})"

    # evaluation
    def __call__(self, z):
        """Evaluate at points of shape (..., dim)."""
        Z = np.asarray(z, dtype=complex)
        if Z.shape[-1] != self.dim:
            raise DomainError(f"points have {Z.shape[-1]} coordinates, polynomial has dim {self.dim}")
        out = np.zeros(Z.shape[:-1], dtype=complex)
        if not self.terms:
            return out if out.ndim else out[()]
        top = max(max(max(j), max(k)) for j, k in self.terms)
        Zb = np.conj(Z)
        zp = [[np.ones(Z.shape[:-1], dtype=complex)] for _ in range(self.dim)]
        zbp = [[np.ones(Z.shape[:-1], dtype=complex)] for _ in range(self.dim)]
        for s in range(self.dim):
            for _ in range(top):
                zp[s].append(zp[s][-1] * Z[..., s])
                zbp[s].append(zbp[s][-1] * Zb[..., s])
        for (j, k), c in self.terms.items():
            term = np.full(Z.shape[:-1], c, dtype=complex)
            for s in range(self.dim):
                if j[s]:
                    term = term * zp[s][j[s]]
                if k[s]:
                    term = term * zbp[s][k[s]]
            out = out + term
        return out if out.ndim else out[()]

    # serialization
    def to_dict(self) -> dict:
        return {"dim": self.dim,
                "terms": [{"j": list(j), "k": list(k), "re": c.real, "im": c.imag}
                          for j, k, c in self.sorted_terms()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "MixedPoly":
        dim = int(data["dim"])
        terms: dict[Key, complex] = {}
        for t in data["terms"]:
            key = (tuple(t["j"]), tuple(t["k"]))
            terms[key] = terms.get(key, 0) + complex(t["re"], t["im"])
        return cls(dim, terms)

    @classmethod
    def from_json(cls, text: str) -> "MixedPoly":
        return cls.from_dict(json.loads(text))


# symbolic operations

def wirtinger_deriv(p: MixedPoly, k: Sequence[int]) -> MixedPoly:
    """d^{|k|} / dzbar^k applied termwise by the power rule."""
    k = tuple(int(x) for x in k)
    if len(k) != p.dim:
        raise DomainError(f"multi-index {k} does not match dimension {p.dim}")
    terms = {}
    for (j, kk), c in p.terms.items():
        if any(e < d for e, d in zip(kk, k)):
            continue
        factor = math.prod(math.perm(e, d) for e, d in zip(kk, k))
        terms[(j, tuple(e - d for e, d in zip(kk, k)))] = c * factor
    return MixedPoly(p.dim, terms)


def is_m_analytic(p: MixedPoly, m: int, route: str = "degree") -> bool:
    """True iff every Wirtinger derivative of total order m vanishes.

    ``route="degree"`` inspects the zbar-degree of the stored terms;
    ``route="derivative"`` applies D^k for every |k| = m symbolically.
    """
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    if route == "degree":
        return all(sum(k) < m for _, k in p.terms)
    if route == "derivative":
        return all(wirtinger_deriv(p, k).is_zero() for k in multi_indices(p.dim, m))
    raise ValueError(f"unknown route {route!r}")


def compute_g(p: MixedPoly, m: int) -> MixedPoly:
    """sum_{|k|<m} (-1)^{|k|}/k! (D^k p) zbar^k, an analytic polynomial."""
    if not is_m_analytic(p, m):
        raise DomainError(f"polynomial has zbar-degree {p.zbar_degree()} >= m = {m}")
    out = MixedPoly(p.dim)
    zero = (0,) * p.dim
    for k in multi_indices_below(p.dim, m):
        coef = (-1) ** sum(k) / MultiIndex(k).factorial
        out = out + wirtinger_deriv(p, k) * MixedPoly(p.dim, {(zero, k): coef})
    return out


def substitute(p: MixedPoly, z_images: Sequence[MixedPoly],
               zbar_images: Sequence[MixedPoly]) -> MixedPoly:
    """Replace z_s by z_images[s] and zbar_s by zbar_images[s]."""
    dim = z_images[0].dim
    cache: dict[tuple[str, int, int], MixedPoly] = {}

    def power(kind, s, e):
        key = (kind, s, e)
        if key not in cache:
            base = z_images[s] if kind == "z" else zbar_images[s]
            cache[key] = base ** e
        return cache[key]

    out = MixedPoly(dim)
    for (j, k), c in p.terms.items():
        term = MixedPoly.constant(dim, c)
        for s in range(p.dim):
            if j[s]:
                term = term * power("z", s, j[s])
            if k[s]:
                term = term * power("zb", s, k[s])
        out = out + term
    return out


def recenter(p: MixedPoly, a) -> MixedPoly:
    """Re-expand p in powers of (z - a) and (zbar - abar).

    The result q satisfies q(z - a) == p(z); ``recenter(q, -a)`` returns p.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    if a.size != p.dim:
        raise DomainError(f"center has {a.size} coordinates, polynomial has dim {p.dim}")
    zs = [MixedPoly.z(p.dim, s) + complex(a[s]) for s in range(p.dim)]
    zbs = [MixedPoly.zbar(p.dim, s) + complex(a[s]).conjugate() for s in range(p.dim)]
    return substitute(p, zs, zbs)


def linear_change(p: MixedPoly, Minv) -> MixedPoly:
    """The polynomial z -> p(Minv z)."""
    C = np.asarray(Minv, dtype=complex)
    if C.shape != (p.dim, p.dim):
        raise DomainError(f"matrix of shape {C.shape} does not act on dimension {p.dim}")
    zs, zbs = [], []
    for r in range(p.dim):
        zs.append(MixedPoly(p.dim, {(MultiIndex.unit(p.dim, s), (0,) * p.dim): C[r, s]
                                    for s in range(p.dim)}))
        zbs.append(MixedPoly(p.dim, {((0,) * p.dim, MultiIndex.unit(p.dim, s)): C[r, s].conjugate()
                                     for s in range(p.dim)}))
    return substitute(p, zs, zbs)


# exact integration over (B_n, mu_alpha)

@lru_cache(maxsize=4096)
def _diag_moment(k: tuple[int, ...], n: int, alpha: float) -> float:
    order = sum(k)
    log_kfact = sum(math.lgamma(e + 1) for e in k)
    log_val = (math.lgamma(n + alpha + 1) - math.lgamma(alpha + 1) + log_kfact
               + log_beta(alpha + 1, n + order) - math.lgamma(n + order))
    return math.exp(log_val)


def ball_moment(j: Sequence[int], k: Sequence[int], n: int, alpha: float) -> float:
    """int_{B_n} z^j zbar^k dmu_alpha, with mu_alpha normalized to total mass 1.

    Equals delta_{j,k} Gamma(n+alpha+1) k! B(alpha+1, n+|k|) / (Gamma(alpha+1) (n-1+|k|)!).
    """
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    j, k = tuple(int(x) for x in j), tuple(int(x) for x in k)
    if len(j) != n or len(k) != n:
        raise DomainError(f"multi-indices {j}, {k} do not have length {n}")
    if j != k:
        return 0.0
    return _diag_moment(k, int(n), float(alpha))


def integrate_ball(p: MixedPoly, alpha: float) -> complex:
    """Exact int_{B_n} p dmu_alpha."""
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    total = 0j
    for (j, k), c in p.terms.items():
        if j == k:
            total += c * _diag_moment(k, p.dim, float(alpha))
    return total


def inner_product(p: MixedPoly, q: MixedPoly, params: SpaceParams) -> complex:
    """<p, q> = int p conj(q) dmu_alpha, evaluated exactly."""
    if p.dim != q.dim or p.dim != params.n:
        raise DomainError(f"dimension mismatch: {p.dim}, {q.dim}, n={params.n}")
    alpha = float(params.alpha)
    total = 0j
    for (j1, k1), c1 in p.terms.items():
        for (j2, k2), c2 in q.terms.items():
            # p-term times conj(q-term) is z^{j1+k2} zbar^{k1+j2}
            jj, kk = _add(j1, k2), _add(k1, j2)
            if jj == kk:
                total += c1 * c2.conjugate() * _diag_moment(kk, p.dim, alpha)
    return total


def random_mixed_poly(rng: np.random.Generator, dim: int, m: int | None = None,
                      max_degree: int = 6, max_terms: int = 40) -> MixedPoly:
    """Random polynomial for tests; m-analytic when ``m`` is given.

    Coefficients are uniform in the complex unit square [0,1) + i[0,1).
    """
    n_terms = int(rng.integers(1, max_terms + 1))
    terms: dict[Key, complex] = {}
    for _ in range(n_terms):
        kmax = max_degree if m is None else min(m - 1, max_degree)
        kd = int(rng.integers(0, kmax + 1))
        jd = int(rng.integers(0, max_degree - kd + 1))
        k = tuple(int(x) for x in rng.multinomial(kd, [1 / dim] * dim))
        j = tuple(int(x) for x in rng.multinomial(jd, [1 / dim] * dim))
        terms[(j, k)] = complex(rng.random(), rng.random())
    return MixedPoly(dim, terms)
