"""Stationary Gaussian law of the linearized stochastic ring.

The drift matrix ``A`` has a single zero eigenvalue (uniform translation of
all vehicles). Its left null vector ``w`` satisfies ``w^T Lambda Lambda^T w
= N sigma**2 > 0``, so the raw process diffuses along the zero mode and has
no stationary covariance there. Everything below works with the projected
system

    A1 = (I - P) A (I - P),      Lambda~ = (I - P) Lambda,

where ``P`` is the spectral projector onto the zero mode. Spacings and
speed deviations do not see the zero mode, so their law is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import expm, null_space

from .dynamics import drift_matrix, noise_matrix
from .errors import ConditioningError, DegenerateKernelError, InfeasibleError
from .model import PerturbationState
from .spectral import spectrum

KERNEL_TOL = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class StationaryCovariance:
    sigma_inf: np.ndarray
    projector: np.ndarray
    abar: float
    condition_number: float


def zero_mode_projector(A, tol=KERNEL_TOL):
    """Oblique projector ``v w^T / (w^T v)`` onto the kernel of ``A``.

    ``v`` and ``w`` are the right and left null vectors. More than one
    eigenvalue within ``tol`` of zero raises :class:`DegenerateKernelError`.
    """
    A = np.asarray(A, dtype=float)
    n_zero = int(np.sum(np.abs(np.linalg.eigvals(A)) <= tol))
    if n_zero != 1:
        raise DegenerateKernelError(f"expected one zero eigenvalue, found {n_zero}")
    v = null_space(A)
    w = null_space(A.T)
    if v.shape[1] != 1 or w.shape[1] != 1:
        raise DegenerateKernelError("kernel of A is not one-dimensional")
    v, w = v[:, 0], w[:, 0]
    return np.outer(v, w) / (w @ v)


def projected_system(params):
    """``(A1, Lambda~ Lambda~^T, P)`` for the affine model."""
    A = drift_matrix(params)
    P = zero_mode_projector(A)
    I_P = np.eye(A.shape[0]) - P
    A1 = I_P @ A @ I_P
    Lt = I_P @ noise_matrix(params.n_vehicles, params.sigma)
    return A1, Lt @ Lt.T, P


def _require_stable(params):
    params.require_affine("the stationary covariance")
    rep = spectrum(params)
    if not rep.spectral_bound > 0 or rep.marginal:
        raise InfeasibleError(
            f"no stationary law: largest nonzero real part is {rep.max_nonzero_real_part:.3g}")
    return rep


def stationary_covariance(params):
    """Stationary covariance of the projected linear system.

    Solved in the eigenbasis of ``A1``: with ``A1 = V D V^{-1}`` and
    ``Q~ = V^{-1} Q V^{-H}``, the entries are
    ``Q~_ij / (-lambda_i - conj(lambda_j))``; the zero-mode row and column
    vanish because the projected noise has no component along it.
    """
    rep = _require_stable(params)
    A1, Q, P = projected_system(params)
    lam, V = np.linalg.eig(A1)
    cond = np.linalg.cond(V)
    if not cond <= MAX_CONDITION:
        raise ConditioningError(f"eigenbasis condition number {cond:.3g} exceeds {MAX_CONDITION:g}",
                                condition_number=cond)
    Vinv = np.linalg.inv(V)
    Qt = Vinv @ Q @ Vinv.conj().T
    denom = -lam[:, None] - lam.conj()[None, :]
    zero = np.abs(lam) <= KERNEL_TOL
    denom[zero, :] = 1.0
    denom[:, zero] = 1.0
    St = Qt / denom
    St[zero, :] = 0.0
    St[:, zero] = 0.0
    S = (V @ St @ V.conj().T).real
    S = 0.5 * (S + S.T)
    return StationaryCovariance(S, P, rep.spectral_bound, float(cond))


def covariance_at(params, t, epsrel=1e-10):
    """Finite-time covariance ``int_0^t exp(s A1) Q exp(s A1^T) ds`` by quadrature."""
    if t < 0:
        raise ValueError("t must be >= 0")
    _require_stable(params)
    A1, Q, _ = projected_system(params)
    if t == 0:
        return np.zeros_like(A1)
    scale = max(float(np.abs(Q).max()), 1e-300)

    def integrand(s):
        E = expm(s * A1)
        return E @ Q @ E.T

    S, _ = quad_vec(integrand, 0.0, float(t), epsabs=1e-13 * scale, epsrel=epsrel,
                    norm="max", limit=20_000)
    return 0.5 * (S + S.T)


def lyapunov_residual(params, S):
    """``A1 S + S A1^T + Q`` for a candidate stationary covariance ``S``."""
    A1, Q, _ = projected_system(params)
    return A1 @ S + S @ A1.T + Q


def convergence_bound(params, x0, t, abar=None, sigma_squared=False):
    """Exponential bound ``(|x0|**2 + N sigma / abar) exp(-2 abar t)``.

    ``sigma_squared=True`` uses ``N sigma**2 / abar`` instead, the
    dimensionally consistent variant.
    """
    if abar is None:
        abar = _require_stable(params).spectral_bound
    if isinstance(x0, PerturbationState):
        x0 = x0.to_vector()
    x0 = np.asarray(x0, dtype=float)
    s = params.sigma ** 2 if sigma_squared else params.sigma
    return (float(x0 @ x0) + params.n_vehicles * s / abar) * math.exp(-2.0 * abar * t)
