"""Deterministic drift and the port-Hamiltonian structure matrices.

Two orderings are used:

* ``J`` and ``R`` act on the block vector ``z = (Q_1..Q_N, p_1..p_N)``,
  the spacing/momentum coordinates of the port-Hamiltonian form.
* ``A`` and ``Lambda`` act on the interleaved perturbation vector
  ``(x_1, y_1, ..., x_N, y_N)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ring_spacings


@dataclass(frozen=True)
class SystemMatrices:
    M: np.ndarray
    J: np.ndarray
    R: np.ndarray
    Lambda: np.ndarray
    A: np.ndarray | None

    @property
    def n_vehicles(self):
        return self.M.shape[0]


def difference_matrix(n):
    """Circulant forward difference: ``(M p)_k = p_{k+1} - p_k``."""
    M = -np.eye(n)
    M[np.arange(n), (np.arange(n) + 1) % n] = 1.0
    return M


def structure_matrix(M):
    n = M.shape[0]
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = M
    J[n:, :n] = -M.T
    return J


def dissipation_matrix(M, gamma, beta):
    n = M.shape[0]
    R = np.zeros((2 * n, 2 * n))
    R[n:, n:] = gamma * np.eye(n) - beta * M
    return R


def noise_matrix(n, sigma):
    """``diag(0, sigma, 0, sigma, ...)`` in interleaved order."""
    d = np.zeros(2 * n)
    d[1::2] = sigma
    return np.diag(d)


def drift_matrix(params):
    """Linearized drift ``A`` around the uniform configuration.

    Row ``x_k`` has a single 1 in column ``y_k``. Row ``y_k`` couples to
    ``x_{k-1}, x_k, x_{k+1}, y_k, y_{k+1}`` with cyclic wraparound.
    """
    params.require_affine("the linearized drift matrix")
    n = params.n_vehicles
    g, b, a, T = params.gamma, params.beta, params.alpha, params.time_gap
    A = np.zeros((2 * n, 2 * n))
    k = np.arange(n)
    prev, nxt = (k - 1) % n, (k + 1) % n
    A[2 * k, 2 * k + 1] = 1.0
    A[2 * k + 1, 2 * k] += -2.0 * a - g / T
    A[2 * k + 1, 2 * prev] += a
    A[2 * k + 1, 2 * nxt] += a + g / T
    A[2 * k + 1, 2 * k + 1] += -(b + g)
    A[2 * k + 1, 2 * nxt + 1] += b
    return A


def build_matrices(params, *, with_drift=True):
    """All structure matrices for ``params``.

    ``A`` needs the affine OVF; pass ``with_drift=False`` to build the
    remaining matrices for a piecewise-linear model (``A`` is then ``None``).
    """
    n = params.n_vehicles
    M = difference_matrix(n)
    A = drift_matrix(params) if with_drift else None
    return SystemMatrices(
        M=M,
        J=structure_matrix(M),
        R=dissipation_matrix(M, params.gamma, params.beta),
        Lambda=noise_matrix(n, params.sigma),
        A=A,
    )


def momentum_drift(params, Q, p):
    """Deterministic acceleration of every vehicle, batched over leading axes."""
    F = params.ovf(Q)
    dV = params.alpha * Q
    p_next = np.roll(p, -1, axis=-1)
    return (params.gamma * (F - p) + params.beta * (p_next - p)
            + (dV - np.roll(dV, 1, axis=-1)))


def drift_carfollowing(params, state):
    """Componentwise drift ``(dQ/dt, dp/dt)`` of the car-following equations."""
    Q = ring_spacings(state.positions, params.ring_length)
    p = state.momenta
    dQ = np.roll(p, -1) - p
    return dQ, momentum_drift(params, Q, p)


def hamiltonian_gradient(state, potential, ring_length):
    """``(dH/dQ, dH/dp) = (V'(Q), p)``."""
    Q = ring_spacings(state.positions, ring_length)
    return potential.derivative(Q), np.array(state.momenta)


def drift_phs(params, state, matrices=None):
    """Drift of ``z = (Q, p)`` assembled as ``(J - R) grad H + gamma g(z)``."""
    mats = matrices if matrices is not None else build_matrices(params, with_drift=False)
    dV, p = hamiltonian_gradient(state, params.potential, params.ring_length)
    Q = ring_spacings(state.positions, params.ring_length)
    n = params.n_vehicles
    grad = np.concatenate([dV, p])
    g = np.concatenate([np.zeros(n), params.ovf(Q)])
    return (mats.J - mats.R) @ grad + params.gamma * g


def output_port(params, state):
    """Output ``h = g^T grad H = sum_n F(Q_n) p_n``."""
    Q = ring_spacings(state.positions, params.ring_length)
    return float(np.dot(params.ovf(Q), state.momenta))


def perturbation_drift(params, z):
    """Drift of the interleaved perturbation vector, via the nonlinear model.

    Evaluated at ``t = 0``; the uniform reference moves at ``v_H`` so
    ``dx/dt = p - v_H``.
    """
    z = np.asarray(z, dtype=float)
    x, y = z[0::2], z[1::2]
    n = params.n_vehicles
    q = x + np.arange(n) * params.equilibrium_spacing
    p = y + params.equilibrium_speed
    Q = ring_spacings(q, params.ring_length)
    out = np.empty_like(z)
    out[0::2] = p - params.equilibrium_speed
    out[1::2] = momentum_drift(params, Q, p)
    return out
