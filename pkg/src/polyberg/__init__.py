"""Reproducing kernels of homogeneously polyanalytic Bergman spaces.

Modules: ``special_fn`` (Gamma/Beta, Jacobi sums, R polynomials),
``multipoly`` (mixed polynomials and exact ball moments), ``geometry``
(Moebius and Cayley maps), ``kernels`` (kernels, weighted shifts,
Berezin transforms), ``verify`` (exact and Monte Carlo suites) and ``cli``.
"""
from .errors import DomainError
from .geometry import CPoint, cayley_to_ball, cayley_to_siegel, mobius, principal_pow, rho_ball, rho_siegel
from .kernels import (FiniteRankOp, FnHandle, KernelSpec, berezin_finite_rank, kernel_ball,
                      kernel_ball_diag, kernel_siegel, kernel_siegel_diag)
from .multipoly import MixedPoly, MultiIndex, ball_moment, inner_product, wirtinger_deriv
from .params import SpaceParams
from .special_fn import JacobiParams, RPolyParams, UniPoly, beta_fn, jacobi_eval, log_gamma, r_poly
from .verify import MCConfig, VerifyReport, mc_integrate, run_suite

__version__ = "0.1.0"
