"""Mode-by-mode spectrum of the linearized ring dynamics.

The drift matrix is block-circulant, so a Fourier mode ``exp(i n theta_k)``
with ``theta_k = 2 pi k / N`` reduces it to the quadratic

    lambda**2 + (mu + i sig) lambda + (nu + i rho) = 0

    mu  = beta (1 - cos theta) + gamma        sig = -beta sin theta
    nu  = (1 - cos theta)(gamma / T + 2 alpha) rho = -sin theta gamma / T

Each mode contributes two of the ``2N`` eigenvalues of ``A``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ModeRoots:
    k: int
    theta: float
    mu: float
    sig: float
    nu: float
    rho: float
    roots: tuple


@dataclass(frozen=True)
class SpectrumReport:
    """Roots of every mode and the stability predicates derived from them.

    ``spectral_bound`` is ``min(-Re lambda)`` over the nonzero roots and
    ``max_nonzero_real_part`` its negation. ``status`` is one of
    ``"stable"`` (sufficient condition holds), ``"conditionally stable"``
    (all modes Hurwitz although the sufficient condition fails),
    ``"marginal"`` or ``"unstable"``.
    """

    modes: tuple
    spectral_bound: float
    max_nonzero_real_part: float
    long_wave_stable: bool
    all_modes_hurwitz: bool
    zero_root_count: int
    marginal: bool
    degenerate_pairs: tuple = field(default=())

    @property
    def roots(self):
        return np.array([r for m in self.modes for r in m.roots], dtype=complex)

    @property
    def status(self):
        if self.marginal:
            return "marginal"
        if self.spectral_bound > 0 and self.long_wave_stable:
            return "stable"
        if self.spectral_bound > 0:
            return "conditionally stable"
        return "unstable"


def zero_tolerance(params):
    return 1e-10 * max(1.0, abs(params.gamma))


def mode_coefficients(params, theta):
    """``(mu, sig, nu, rho)`` for angle ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    g, b, a, T = params.gamma, params.beta, params.alpha, params.time_gap
    mu = b * (1.0 - c) + g
    sig = -b * s
    nu = (1.0 - c) * (g / T + 2.0 * a)
    rho = -s * g / T
    return mu, sig, nu, rho


def solve_monic_quadratic(b, c):
    """Roots of ``z**2 + b z + c`` for complex ``b, c`` without cancellation.

    The square-root branch is picked so that ``b`` and ``d`` do not cancel in
    ``b + d``; the second root then follows from Vieta (``c / q``).
    """
    b, c = complex(b), complex(c)
    d = cmath.sqrt(b * b - 4.0 * c)
    if (b.conjugate() * d).real < 0:
        d = -d
    q = -0.5 * (b + d)
    if q == 0:
        return 0j, 0j
    return q, c / q


def characteristic_roots(params, theta):
    params.require_affine("the characteristic equation")
    mu, sig, nu, rho = mode_coefficients(params, theta)
    return solve_monic_quadratic(complex(mu, sig), complex(nu, rho))


def _canonical_theta(theta):
    t = math.fmod(theta, 2.0 * math.pi)
    return t + 2.0 * math.pi if t < 0 else t


def hurwitz_mode(params, theta):
    """Exact test that both roots of mode ``theta`` have negative real part.

    ``theta = 0`` is rejected: it always carries the neutral root 0.
    """
    params.require_affine("the Hurwitz mode test")
    if _canonical_theta(theta) == 0.0:
        raise ValueError("theta = 0 carries the neutral zero root; use spectrum()")
    mu, sig, nu, rho = mode_coefficients(params, theta)
    return bool(mu > 0 and mu * (nu * mu + rho * sig) - rho * rho > 0)


def stability_margin(params):
    """``gamma/2 + beta + T alpha - 1/T``; positive on the stable side."""
    params.require_affine("the stability margin")
    return params.gamma / 2 + params.beta + params.time_gap * params.alpha - 1 / params.time_gap


def long_wave_stable(params):
    """Sufficient stability condition ``gamma > 0`` and a positive margin."""
    return bool(params.gamma > 0 and stability_margin(params) > 0)


def determinant_polynomial_h(params, x):
    """The factor ``h`` in ``f(x) = (1 - x) h(x)``, with ``x = cos theta``.

    ``f`` is the Hurwitz determinant of a mode; ``h(1)`` has the sign of
    the stability margin whenever ``gamma > 0``.
    """
    g, b, a, T = params.gamma, params.beta, params.alpha, params.time_gap
    x = np.asarray(x, dtype=float)
    m = b * (1.0 - x) + g
    return m * (m * (g / T + 2.0 * a) + b * g / T * (1.0 + x)) - (g / T) ** 2 * (1.0 + x)


def constant_input_stable(params):
    """Stability with a constant optimal velocity: ``alpha (beta + gamma) > 0``."""
    return bool(params.alpha * (params.beta + params.gamma) > 0)


def spectrum(params, degeneracy_tol=1e-9):
    """Collect the ``2N`` roots over all modes and derive the predicates."""
    params.require_affine("the spectrum")
    n = params.n_vehicles
    tol = zero_tolerance(params)
    modes = []
    for k in range(n):
        theta = 2.0 * math.pi * k / n
        coeffs = mode_coefficients(params, theta)
        modes.append(ModeRoots(k, theta, *coeffs, roots=characteristic_roots(params, theta)))

    roots = np.array([r for m in modes for r in m.roots], dtype=complex)
    is_zero = np.abs(roots) <= tol
    nonzero = roots[~is_zero]
    if nonzero.size:
        max_re = float(np.max(nonzero.real))
    else:
        max_re = -math.inf
    # the rightmost nonzero root decides; an axis root next to a growing mode is unstable
    marginal = bool(nonzero.size and abs(max_re) <= tol)

    hurwitz = all(hurwitz_mode(params, m.theta) for m in modes[1:])

    degenerate = []
    for i in range(roots.size):
        close = np.nonzero(np.abs(roots[i + 1:] - roots[i]) <= degeneracy_tol)[0]
        degenerate.extend((i, i + 1 + j) for j in close)

    return SpectrumReport(
        modes=tuple(modes),
        spectral_bound=-max_re,
        max_nonzero_real_part=max_re,
        long_wave_stable=long_wave_stable(params),
        all_modes_hurwitz=hurwitz,
        zero_root_count=int(is_zero.sum()),
        marginal=marginal,
        degenerate_pairs=tuple(degenerate),
    )
