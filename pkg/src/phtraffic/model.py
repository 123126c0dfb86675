"""
Ring-road car-following model: parameters, states and coordinates
=================================================================

``N`` vehicles of unit mass drive on a closed loop of length ``L``.
Vehicle ``n`` follows vehicle ``n + 1`` and vehicle ``N`` follows vehicle 1.
Positions are stored *unwrapped*: they keep growing with time and are never
reduced modulo ``L``. Spacings are

    Q_n = q_{n+1} - q_n          (n < N)
    Q_N = L + q_1 - q_N

so ``sum(Q) == L`` for every configuration.

The uniform configuration has equal spacings ``L/N`` and common speed
``v_H = F(L/N)``. Perturbation coordinates measure deviations from it,

    x_n = q_n - ((n - 1) L / N + v_H t),    y_n = p_n - v_H.

Vehicle indices are 0-based in code (``n = 0 .. N-1``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError


class OVFKind(str, enum.Enum):
    AFFINE = "affine"
    PIECEWISE_LINEAR = "piecewise_linear"


@dataclass(frozen=True)
class OptimalVelocityFn:
    """Optimal velocity function ``F`` mapping spacing [m] to speed [m/s].

    ``AFFINE``: ``F(s) = (s - l) / T``, negative below the vehicle length.
    ``PIECEWISE_LINEAR``: ``F(s) = min(v0, max(0, (s - l) / T))``.
    """

    kind: OVFKind = OVFKind.AFFINE
    vehicle_length: float = 5.0
    time_gap: float = 1.0
    desired_speed: float = 30.0

    def __call__(self, spacing):
        s = np.asarray(spacing, dtype=float)
        v = (s - self.vehicle_length) / self.time_gap
        if self.kind is OVFKind.PIECEWISE_LINEAR:
            v = np.minimum(self.desired_speed, np.maximum(0.0, v))
        return v

    @property
    def slope(self):
        """Derivative of the affine branch, ``1/T``."""
        return 1.0 / self.time_gap


@dataclass(frozen=True)
class QuadraticPotential:
    """Interaction potential ``V(x) = alpha x**2 / 2``."""

    alpha: float = 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.alpha * x * x

    def derivative(self, x):
        return self.alpha * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the stochastic car-following model.

    Defaults reproduce the desk-scale experiment: 50 vehicles on 1 km,
    ``l = 5 m``, ``T = 1 s``, ``gamma = 1/s``, ``beta = 0.5/s``,
    ``sigma = 5 m s^-3/2``.

    Parameters
    ----------
    n_vehicles : int
        Number of vehicles, ``N > 2``.
    ring_length : float
        Ring length ``L`` [m].
    gamma : float
        Relaxation rate towards the optimal velocity [1/s].
    beta : float
        Relaxation rate of the speed difference to the predecessor [1/s].
    alpha : float
        Stiffness of the quadratic interaction potential [1/s^2].
    sigma : float
        Noise amplitude [m s^-3/2].
    vehicle_length, time_gap, desired_speed : float
        Parameters ``l`` [m], ``T`` [s] and ``v0`` [m/s] of the optimal
        velocity function. ``v0`` is only read by the piecewise-linear kind.
    ovf_kind : OVFKind
    analysis_only : bool
        Relaxes ``gamma > 0`` to ``gamma >= 0``. Used to study the purely
        Hamiltonian limit ``beta = gamma = sigma = 0``; never set by the
        scenario configuration parser.
    """

    n_vehicles: int = 50
    ring_length: float = 1000.0
    gamma: float = 1.0
    beta: float = 0.5
    alpha: float = 0.0
    sigma: float = 5.0
    vehicle_length: float = 5.0
    time_gap: float = 1.0
    desired_speed: float = 30.0
    ovf_kind: OVFKind = OVFKind.AFFINE
    analysis_only: bool = field(default=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ovf_kind", OVFKind(self.ovf_kind))
        n = self.n_vehicles
        if isinstance(n, bool) or int(n) != n or n <= 2:
            raise ValueError(f"n_vehicles must be an integer > 2, got {n!r}")
        object.__setattr__(self, "n_vehicles", int(n))
        for name in ("ring_length", "gamma", "beta", "alpha", "sigma",
                     "vehicle_length", "time_gap"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.ring_length <= 0:
            raise ValueError("ring_length must be > 0")
        if self.analysis_only:
            if self.gamma < 0:
                raise ValueError("gamma must be >= 0")
        elif self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        for name in ("beta", "alpha", "sigma", "vehicle_length"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.time_gap <= 0:
            raise ValueError("time_gap must be > 0")
        if self.ovf_kind is OVFKind.PIECEWISE_LINEAR:
            if not math.isfinite(self.desired_speed):
                raise ValueError("desired_speed must be finite for the piecewise-linear OVF")
        if self.desired_speed < 0:
            raise ValueError("desired_speed must be >= 0")

    @property
    def ovf(self):
        return OptimalVelocityFn(self.ovf_kind, self.vehicle_length,
                                 self.time_gap, self.desired_speed)

    @property
    def potential(self):
        return QuadraticPotential(self.alpha)

    @property
    def equilibrium_spacing(self):
        return self.ring_length / self.n_vehicles

    @property
    def equilibrium_speed(self):
        """``v_H = F(L/N)``."""
        return float(self.ovf(self.equilibrium_spacing))

    def require_affine(self, what="this analysis"):
        if self.ovf_kind is not OVFKind.AFFINE:
            raise UnsupportedConfigurationError(
                f"{what} requires the affine optimal velocity function")


def model_diagnostics(params):
    """Flags about the equilibrium that the linear analysis does not reject.

    A uniform spacing shorter than the vehicle length gives a negative
    equilibrium speed with the affine OVF; it is allowed but reported here.
    """
    v = params.equilibrium_speed
    return {
        "equilibrium_spacing_m": params.equilibrium_spacing,
        "equilibrium_speed_mps": v,
        "negative_equilibrium_speed": v < 0,
    }


@dataclass(frozen=True)
class RingState:
    """Unwrapped positions ``q`` [m] and momenta ``p`` [m/s] of all vehicles."""

    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        q = np.array(self.positions, dtype=float)
        p = np.array(self.momenta, dtype=float)
        if q.ndim != 1 or q.shape != p.shape:
            raise ValueError("positions and momenta must be 1-d arrays of equal length")
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "positions", q)
        object.__setattr__(self, "momenta", p)

    @property
    def n_vehicles(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class PerturbationState:
    """Deviations ``x`` [m] and ``y`` [m/s] from the uniform configuration."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def to_vector(self):
        """Interleaved vector ``(x_1, y_1, ..., x_N, y_N)``."""
        z = np.empty(2 * self.x.size)
        z[0::2] = self.x
        z[1::2] = self.y
        return z

    @classmethod
    def from_vector(cls, z):
        z = np.asarray(z, dtype=float)
        return cls(z[0::2], z[1::2])


def optimal_velocity(f, spacing):
    """Evaluate the optimal velocity function, rejecting non-finite spacings."""
    s = np.asarray(spacing, dtype=float)
    if not np.all(np.isfinite(s)):
        raise DomainError("spacing must be finite")
    v = f(s)
    return float(v) if v.ndim == 0 else v


def ring_spacings(positions, ring_length):
    """Spacings for positions stacked along the last axis.

    Works on ``(N,)`` arrays as well as ``(R, N)`` batches.
    """
    q = np.asarray(positions, dtype=float)
    Q = np.empty_like(q)
    Q[..., :-1] = q[..., 1:] - q[..., :-1]
    Q[..., -1] = ring_length + q[..., 0] - q[..., -1]
    return Q


def spacings(state, ring_length):
    """Spacings ``Q_n`` of a ring state; they always sum to ``ring_length``."""
    return ring_spacings(state.positions, ring_length)


def reference_positions(params, t=0.0):
    """Positions of the uniform configuration at time ``t``.

    The reference is pinned so that vehicle ``n`` starts at ``n L / N``.
    """
    n = np.arange(params.n_vehicles)
    return n * params.equilibrium_spacing + params.equilibrium_speed * t


def equilibrium_state(params):
    """Uniform configuration at ``t = 0``: equal spacings and speeds ``F(L/N)``."""
    q = reference_positions(params, 0.0)
    p = np.full(params.n_vehicles, params.equilibrium_speed)
    return RingState(q, p)


def to_perturbation(state, params, t=0.0):
    if t < 0:
        raise ValueError("t must be >= 0")
    x = state.positions - reference_positions(params, t)
    y = state.momenta - params.equilibrium_speed
    return PerturbationState(x, y)


def from_perturbation(pert, params, t=0.0):
    if t < 0:
        raise ValueError("t must be >= 0")
    q = pert.x + reference_positions(params, t)
    p = pert.y + params.equilibrium_speed
    return RingState(q, p)
