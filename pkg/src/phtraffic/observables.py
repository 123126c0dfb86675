"""Energy, autocorrelation and covariance observables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError, UndefinedACFError
from .model import ring_spacings


@dataclass(frozen=True)
class EnergyRecord:
    time: float
    hamiltonian: float
    perturbed_hamiltonian: float
    balance_drift: float


@dataclass(frozen=True)
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray

    def first_local_minimum(self):
        """``(lag, value)`` of the first interior local minimum, or ``None``."""
        v = self.values
        for k in range(1, v.size - 1):
            if v[k] < v[k - 1] and v[k] <= v[k + 1]:
                return float(self.lags[k]), float(v[k])
        return None


def hamiltonian(state, potential, ring_length):
    """Total energy ``sum V(Q_n) + sum p_n**2 / 2``."""
    Q = ring_spacings(state.positions, ring_length)
    p = state.momenta
    return float(np.sum(potential.value(Q)) + 0.5 * np.dot(p, p))


def perturbed_hamiltonian_batch(x, y, alpha):
    """Energy of perturbations along the last axis; ring-closed differences."""
    dx = np.roll(x, -1, axis=-1) - x
    return 0.5 * np.sum(y * y, axis=-1) + 0.5 * alpha * np.sum(dx * dx, axis=-1)


def perturbed_hamiltonian(pert, alpha):
    """Energy of a perturbation: ``sum y_n**2 / 2 + sum V(x_{n+1} - x_n)``."""
    return float(perturbed_hamiltonian_batch(pert.x, pert.y, alpha))


def energy_balance_drift(params, state):
    """Expected rate of change of the total energy ``H`` at ``state``."""
    Q = ring_spacings(state.positions, params.ring_length)
    p = state.momenta
    F = params.ovf(Q)
    return float(params.gamma * np.dot(p, F - p)
                 + params.beta * np.dot(p, np.roll(p, -1) - p)
                 + 0.5 * params.n_vehicles * params.sigma ** 2)


def autocovariance(series, max_lag):
    """Biased autocovariance of each column of ``series`` (time on axis -2).

    Returns an array of shape ``(..., max_lag + 1, N)`` where the sum over
    overlapping products is divided by the full series length.
    """
    x = np.asarray(series, dtype=float)
    n = x.shape[-2]
    x = x - x.mean(axis=-2, keepdims=True)
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=nfft, axis=-2)
    acov = np.fft.irfft(f * f.conj(), n=nfft, axis=-2)[..., : max_lag + 1, :]
    return acov / n


def speed_acf(trajectory, max_lag_steps, sample_dt=None):
    """Speed autocorrelation averaged over vehicles (and replications).

    Parameters
    ----------
    trajectory : Trajectory or array_like
        A :class:`~phtraffic.integrator.Trajectory` (burn-in already removed)
        or a speed array of shape ``(..., samples, N)``; leading axes are
        replications and are averaged.
    max_lag_steps : int
        Largest lag, in recorded samples.
    sample_dt : float, optional
        Time between samples, for arrays. Taken from the trajectory otherwise.

    The per-vehicle autocovariance uses the biased (divide-by-length)
    estimator, is averaged over vehicles, and is normalized by its lag-0
    value.
    """
    if hasattr(trajectory, "momenta"):
        speeds = trajectory.momenta
        if sample_dt is None:
            sample_dt = float(trajectory.times[1] - trajectory.times[0]) if len(trajectory) > 1 else 1.0
    else:
        speeds = np.asarray(trajectory, dtype=float)
    if sample_dt is None:
        sample_dt = 1.0
    n_samples = speeds.shape[-2]
    if n_samples < 10 * max_lag_steps:
        raise ValueError(f"need at least {10 * max_lag_steps} samples for max lag "
                         f"{max_lag_steps}, got {n_samples}")
    acov = autocovariance(speeds, max_lag_steps)
    c = acov.reshape(-1, max_lag_steps + 1, acov.shape[-1]).mean(axis=(0, 2))
    scale = np.abs(speeds).max() if speeds.size else 0.0
    if not c[0] > 1e-24 * max(scale * scale, 1e-300):
        raise UndefinedACFError("speed series has zero variance")
    lags = np.arange(max_lag_steps + 1) * sample_dt
    return AcfCurve(lags, c / c[0])


class CovarianceAccumulator:
    """Streaming, mean-removed covariance of (optionally projected) samples."""

    def __init__(self, dim, projector=None):
        self.dim = dim
        self._proj = None if projector is None else np.eye(dim) - np.asarray(projector)
        self.count = 0
        self._sum = np.zeros(dim)
        self._outer = np.zeros((dim, dim))

    def update(self, samples):
        z = np.atleast_2d(np.asarray(samples, dtype=float))
        if self._proj is not None:
            z = z @ self._proj.T
        self.count += z.shape[0]
        self._sum += z.sum(axis=0)
        self._outer += z.T @ z

    def covariance(self):
        if self.count < 2:
            raise ValueError("need at least 2 samples")
        mean = self._sum / self.count
        C = (self._outer - self.count * np.outer(mean, mean)) / (self.count - 1)
        return 0.5 * (C + C.T)


def empirical_covariance(pert_samples, projector=None):
    """Sample covariance of ``(I - P) z`` over rows ``z`` of ``pert_samples``."""
    z = np.atleast_2d(np.asarray(pert_samples, dtype=float))
    if z.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if projector is not None:
        z = z @ (np.eye(z.shape[1]) - projector).T
    z = z - z.mean(axis=0)
    C = z.T @ z / (z.shape[0] - 1)
    return 0.5 * (C + C.T)


def _psd_sqrt(S, name):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or not np.allclose(S, S.T, rtol=0,
                                                                    atol=1e-10 * max(1.0, np.abs(S).max())):
        raise DomainError(f"{name} must be a symmetric matrix")
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    if w.min(initial=0.0) < -1e-10 * max(1.0, np.abs(w).max(initial=0.0)):
        raise DomainError(f"{name} is not positive semi-definite")
    return (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T


def gaussian_w2(sigma_a, sigma_b):
    """2-Wasserstein distance between ``N(0, sigma_a)`` and ``N(0, sigma_b)``."""
    ra = _psd_sqrt(sigma_a, "sigma_a")
    rb = _psd_sqrt(sigma_b, "sigma_b")
    m = ra @ np.asarray(sigma_b, dtype=float) @ ra
    cross = _psd_sqrt(0.5 * (m + m.T), "cross term")
    d2 = np.trace(ra @ ra) + np.trace(rb @ rb) - 2.0 * np.trace(cross)
    return math.sqrt(max(d2, 0.0))


def relative_frobenius(a, b):
    """``|a - b|_F / |b|_F``."""
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def mean_confidence_interval(values, level=0.95):
    """Sample mean and half-width of the normal confidence interval."""
    v = np.asarray(values, dtype=float)
    z = stats.norm.ppf(0.5 + level / 2)
    half = z * v.std(ddof=1) / math.sqrt(v.size) if v.size > 1 else math.inf
    return float(v.mean()), float(half)
