"""
Euler-Maruyama time stepping with a reproducible noise layout
=============================================================

One step of size ``dt`` reads, for every vehicle ``n``,

    q_n <- q_n + dt p_n
    p_n <- p_n + dt [gamma (F(Q_n) - p_n) + beta (p_{n+1} - p_n)
                     + alpha (Q_n - Q_{n-1})] + sigma sqrt(dt) xi_n

with positions advanced using the momenta from *before* the step.

Noise contract
--------------
Replication ``r`` of a run with master seed ``s`` uses seed ``s + r``.
From that seed, ``numpy.random.SeedSequence(seed).spawn(N)`` gives one
child per vehicle; vehicle ``n`` owns a ``PCG64`` generator built from child
``n`` and its ``k``-th step consumes the ``k``-th value of
``Generator.standard_normal`` (ziggurat). Values are drawn in fixed chunks,
which does not change the sequence. Recording stride and observers never
touch the generators, so they cannot alter the noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import drift_matrix, momentum_drift
from .errors import NumericalBlowupError
from .model import PerturbationState, RingState, ring_spacings

NOISE_CHUNK = 1024


@dataclass(frozen=True)
class SimulationConfig:
    """Time step [s], step count, burn-in, seed and recording stride.

    ``burn_in_steps=None`` means the first 40% of the steps.
    """

    dt: float = 0.01
    n_steps: int = 50_000
    burn_in_steps: int | None = None
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.burn_in_steps is not None and not 0 <= self.burn_in_steps < self.n_steps:
            raise ValueError("burn_in_steps must satisfy 0 <= burn_in_steps < n_steps")

    @property
    def burn_in(self):
        if self.burn_in_steps is None:
            return int(0.4 * self.n_steps)
        return self.burn_in_steps

    @property
    def recorded_steps(self):
        return np.arange(0, self.n_steps + 1, self.record_every)


@dataclass(frozen=True)
class Trajectory:
    """Recorded snapshots of one run.

    ``positions`` and ``momenta`` have shape ``(samples, N)``.
    """

    steps: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    ring_length: float

    def __len__(self):
        return self.steps.size

    def state(self, i):
        return RingState(self.positions[i], self.momenta[i])

    def spacings(self):
        return ring_spacings(self.positions, self.ring_length)

    def after(self, step):
        """Samples with ``steps >= step`` (e.g. discarding a burn-in)."""
        keep = self.steps >= step
        return Trajectory(self.steps[keep], self.times[keep], self.positions[keep],
                          self.momenta[keep], self.ring_length)


@dataclass(frozen=True)
class EnsembleResult:
    """Recorded snapshots of several replications.

    ``positions``/``momenta`` have shape ``(R, samples, N)`` (or are ``None``
    when storage was disabled). ``failed_step[r]`` is the step at which
    replication ``r`` blew up, or -1. Failed replications hold NaN from the
    first recording after the failure.
    """

    seeds: tuple
    steps: np.ndarray
    times: np.ndarray
    positions: np.ndarray | None
    momenta: np.ndarray | None
    failed_step: np.ndarray
    ring_length: float

    def trajectory(self, r):
        return Trajectory(self.steps, self.times, self.positions[r], self.momenta[r],
                          self.ring_length)


def replication_seeds(master_seed, n_replications):
    return tuple(int(master_seed) + r for r in range(n_replications))


class VehicleNoise:
    """Standard normal draws laid out as described in the module docstring."""

    def __init__(self, seeds, n_vehicles, chunk=NOISE_CHUNK):
        self.chunk = chunk
        self._gens = [
            [np.random.Generator(np.random.PCG64(child))
             for child in np.random.SeedSequence(int(seed)).spawn(n_vehicles)]
            for seed in seeds
        ]
        self._buf = np.empty((chunk, len(seeds), n_vehicles))
        self._pos = chunk

    def _refill(self):
        for r, gens in enumerate(self._gens):
            for n, g in enumerate(gens):
                self._buf[:, r, n] = g.standard_normal(self.chunk)
        self._pos = 0

    def draw(self):
        """Next ``(R, N)`` block of normals."""
        if self._pos == self.chunk:
            self._refill()
        out = self._buf[self._pos]
        self._pos += 1
        return out


def em_update(params, q, p, dt, noise):
    """One step on raw ``(..., N)`` arrays of positions, momenta and normals."""
    Q = ring_spacings(q, params.ring_length)
    q_new = q + dt * p
    p_new = p + dt * momentum_drift(params, Q, p) + (params.sigma * math.sqrt(dt)) * noise
    return q_new, p_new


def em_step(params, state, dt, noise):
    """Advance one ring state by a single Euler-Maruyama step.

    ``noise`` holds ``N`` standard normal draws. Raises
    :class:`NumericalBlowupError` (``step=1``) on a non-finite result.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.shape != state.momenta.shape:
        raise ValueError("noise must have one draw per vehicle")
    if dt < 0:
        raise ValueError("dt must be >= 0")
    with np.errstate(all="ignore"):
        q, p = em_update(params, state.positions, state.momenta, dt, noise)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise NumericalBlowupError(1)
    return RingState(q, p)


def _stack_initial(init, n_rep):
    if isinstance(init, RingState):
        q = np.tile(init.positions, (n_rep, 1))
        p = np.tile(init.momenta, (n_rep, 1))
    else:
        init = list(init)
        if len(init) != n_rep:
            raise ValueError("need one initial state per replication")
        q = np.stack([s.positions for s in init])
        p = np.stack([s.momenta for s in init])
    return q, p


def simulate_ensemble(params, init, config, seeds=None, observer=None, store=True):
    """Run independent replications side by side.

    Each replication evolves exactly as :func:`simulate` would evolve it
    alone with the same seed: all arithmetic is elementwise across the
    replication axis.

    Parameters
    ----------
    params : ModelParams
    init : RingState or sequence of RingState
        Shared initial state, or one per replication.
    config : SimulationConfig
    seeds : sequence of int, optional
        Per-replication seeds. Defaults to ``(config.seed,)``.
    observer : callable, optional
        Called as ``observer(step, time, q, p, alive)`` at every recorded
        step, with ``(R, N)`` arrays. Rows with ``alive == False`` are
        meaningless.
    store : bool
        Keep recorded snapshots in memory.
    """
    seeds = tuple(seeds) if seeds is not None else (config.seed,)
    n_rep, n = len(seeds), params.n_vehicles
    q, p = _stack_initial(init, n_rep)
    if q.shape[1] != n:
        raise ValueError("initial state has the wrong number of vehicles")

    rec_steps = config.recorded_steps
    times = rec_steps * config.dt
    pos = mom = None
    if store:
        pos = np.empty((n_rep, rec_steps.size, n))
        mom = np.empty_like(pos)
    failed = np.full(n_rep, -1)
    alive = np.ones(n_rep, dtype=bool)
    noise = VehicleNoise(seeds, n)
    dt, stride = config.dt, config.record_every

    def record(i, step):
        if store:
            pos[:, i] = q
            mom[:, i] = p
            pos[~alive, i] = np.nan
            mom[~alive, i] = np.nan
        if observer is not None:
            observer(step, step * dt, q, p, alive)

    record(0, 0)
    i_rec = 1
    with np.errstate(all="ignore"):
        for step in range(1, config.n_steps + 1):
            q, p = em_update(params, q, p, dt, noise.draw())
            if not math.isfinite(q.sum() + p.sum()):
                bad = ~(np.isfinite(q).all(axis=1) & np.isfinite(p).all(axis=1))
                new = bad & alive
                failed[new] = step
                alive &= ~bad
                q[bad] = 0.0
                p[bad] = 0.0
            if step % stride == 0:
                record(i_rec, step)
                i_rec += 1

    return EnsembleResult(seeds, rec_steps, times, pos, mom, failed, params.ring_length)


def simulate(params, init, config):
    """Single seeded run; a pure function of ``(params, init, config)``."""
    res = simulate_ensemble(params, init, config)
    if res.failed_step[0] >= 0:
        raise NumericalBlowupError(int(res.failed_step[0]))
    return res.trajectory(0)


def mean_at(params, pert0, t):
    """Deterministic part ``exp(t A) z0`` of the linearized solution."""
    if t < 0:
        raise ValueError("t must be >= 0")
    A = drift_matrix(params)
    z = expm(t * A) @ pert0.to_vector()
    return PerturbationState.from_vector(z)
