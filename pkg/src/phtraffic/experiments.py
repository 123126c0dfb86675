"""
Monte Carlo experiments and their on-disk outputs
=================================================

Every run starts from the uniform configuration. Replication ``r`` uses
seed ``master_seed + r``; the same seeds are reused for every ``alpha`` of
a sweep. Replications are split into contiguous groups handed to a process
pool; all statistics are computed per replication and combined in
replication-index order, so outputs do not depend on ``jobs``.

Output files
------------
``summary.ndjson``
    One JSON object per (alpha, replication).
``energy_by_alpha.csv``
    Mean post-burn-in perturbed energy per alpha with its 95% normal
    half-width.
``trajectory_alpha<a>_rep<r>.csv``
    Optional, header ``step,time_s,vehicle,position_m,speed_mps,spacing_m``
    (vehicles numbered from 1).
``stability.csv``, ``acf.csv``, ``acf_minima.csv``, ``sigma_inf.csv``,
``empirical_covariance.csv``, ``invariant_report.json``
    See the corresponding ``run_*`` function.

Floats in CSV files use 17 significant digits.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedACFError
from .integrator import replication_seeds, simulate_ensemble
from .invariant import convergence_bound, stationary_covariance
from .model import equilibrium_state, model_diagnostics, reference_positions, ring_spacings
from .observables import (
    AcfCurve,
    autocovariance,
    gaussian_w2,
    mean_confidence_interval,
    perturbed_hamiltonian_batch,
    relative_frobenius,
)
from .spectral import spectrum, stability_margin

TRAJECTORY_HEADER = "step,time_s,vehicle,position_m,speed_mps,spacing_m"


def fmt(x):
    return format(float(x), ".17g")


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _groups(seeds, jobs):
    jobs = max(1, min(jobs, len(seeds)))
    size = -(-len(seeds) // jobs)
    return [seeds[i:i + size] for i in range(0, len(seeds), size)]


def _map_groups(fn, args_list, jobs):
    if jobs <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args_list)))


def default_jobs():
    return os.cpu_count() or 1


def trajectory_filename(alpha, replication):
    return f"trajectory_alpha{fmt(alpha)}_rep{replication:04d}.csv"


@dataclass(frozen=True)
class AlphaRun:
    """Per-alpha outcome of a sweep: summary records and the mean speed ACF."""

    alpha: float
    records: list
    acf: AcfCurve | None


def _replicate(scenario, alpha, seeds, first_index, want_acf, trajectory_dir):
    """Run one contiguous group of replications for a single alpha."""
    params = scenario.model_params(alpha=alpha)
    cfg = scenario.simulation_config()
    burn_in = cfg.burn_in
    n_rep, n = len(seeds), params.n_vehicles
    v_h = params.equilibrium_speed
    L = params.ring_length

    h_sum = np.zeros(n_rep)
    p_sum = np.zeros(n_rep)
    p_sq = np.zeros(n_rep)
    q_sum = np.zeros(n_rep)
    q_sq = np.zeros(n_rep)
    count = np.zeros(n_rep, dtype=np.int64)
    negative = np.zeros(n_rep, dtype=np.int64)
    post_steps = cfg.recorded_steps[cfg.recorded_steps >= burn_in]
    speeds = np.empty((n_rep, post_steps.size, n)) if want_acf else None
    post_index = [0]

    handles = []
    window_start = -math.inf
    if trajectory_dir is not None:
        t_end = cfg.n_steps * cfg.dt
        if scenario.window_s is not None:
            window_start = t_end - scenario.window_s
        for r in range(n_rep):
            fh = open(os.path.join(trajectory_dir, trajectory_filename(alpha, first_index + r)),
                      "w", encoding="utf-8", newline="\n")
            fh.write(TRAJECTORY_HEADER + "\n")
            handles.append(fh)

    def observe(step, t, q, p, alive):
        Q = ring_spacings(q, L)
        negative[alive] += np.count_nonzero(Q[alive] < 0, axis=1)
        if handles and t >= window_start - 1e-9 * cfg.dt:
            for r in np.nonzero(alive)[0]:
                handles[r].write("".join(
                    f"{step},{fmt(t)},{k + 1},{fmt(q[r, k])},{fmt(p[r, k])},{fmt(Q[r, k])}\n"
                    for k in range(n)))
        if step < burn_in:
            return
        x = q - reference_positions(params, t)
        y = p - v_h
        h_sum[alive] += perturbed_hamiltonian_batch(x, y, params.alpha)[alive]
        p_sum[alive] += p.sum(axis=1)[alive]
        p_sq[alive] += (p * p).sum(axis=1)[alive]
        q_sum[alive] += Q.sum(axis=1)[alive]
        q_sq[alive] += (Q * Q).sum(axis=1)[alive]
        count[alive] += 1
        if speeds is not None:
            speeds[:, post_index[0]] = p
        post_index[0] += 1

    try:
        res = simulate_ensemble(params, equilibrium_state(params), cfg, seeds=seeds,
                                observer=observe, store=False)
    finally:
        for fh in handles:
            fh.close()

    records = []
    for r in range(n_rep):
        ok = res.failed_step[r] < 0
        m = count[r] * n
        rec = {
            "alpha": float(alpha),
            "replication": first_index + r,
            "seed": int(seeds[r]),
            "status": "ok" if ok else "failed",
            "failed_step": None if ok else int(res.failed_step[r]),
            "mean_perturbed_hamiltonian": _json_float(h_sum[r] / count[r]) if ok else None,
            "speed_variance": _json_float(p_sq[r] / m - (p_sum[r] / m) ** 2) if ok else None,
            "spacing_variance": _json_float(q_sq[r] / m - (q_sum[r] / m) ** 2) if ok else None,
            "negative_spacing_count": int(negative[r]),
        }
        records.append(rec)

    acov = None
    if want_acf:
        lag = scenario.max_lag_samples
        acov = np.full((n_rep, lag + 1), np.nan)
        for r in range(n_rep):
            if res.failed_step[r] < 0:
                acov[r] = autocovariance(speeds[r], lag).mean(axis=-1)
    return records, acov


def sweep_alpha(scenario, jobs=1, want_acf=True, trajectory_dir=None):
    """Run ``n_replications`` seeded replications for every alpha of the sweep."""
    seeds = replication_seeds(scenario.seed, scenario.n_replications)
    if want_acf:
        lag = scenario.max_lag_samples
        cfg = scenario.simulation_config()
        n_post = int(np.count_nonzero(cfg.recorded_steps >= cfg.burn_in))
        if lag < 1:
            raise ValueError("max_lag_s is shorter than one recorded sample")
        if n_post < 10 * lag:
            raise ValueError(f"ACF needs {10 * lag} post-burn-in samples, run has {n_post}")
    out = []
    groups = _groups(list(seeds), jobs)
    starts = list(itertools.accumulate([0] + [len(g) for g in groups[:-1]]))
    for alpha in scenario.alpha_sweep:
        args = [(scenario, alpha, g, s, want_acf, trajectory_dir) for g, s in zip(groups, starts)]
        parts = _map_groups(_replicate, args, jobs)
        records = [rec for recs, _ in parts for rec in recs]
        acf = None
        if want_acf:
            acov = np.concatenate([a for _, a in parts])
            good = acov[~np.isnan(acov).any(axis=1)]
            if good.shape[0]:
                c = good.mean(axis=0)
                if not c[0] > 0:
                    raise UndefinedACFError(f"speed series has zero variance at alpha={alpha}")
                dt_sample = scenario.dt_s * scenario.record_every
                acf = AcfCurve(np.arange(c.size) * dt_sample, c / c[0])
        out.append(AlphaRun(float(alpha), records, acf))
    return out


def energy_table(runs):
    """``(alpha, mean, half_width, n_ok)`` of the post-burn-in perturbed energy."""
    rows = []
    for run in runs:
        vals = [r["mean_perturbed_hamiltonian"] for r in run.records if r["status"] == "ok"]
        mean, half = mean_confidence_interval(vals) if vals else (math.nan, math.nan)
        rows.append((run.alpha, mean, half, len(vals)))
    return rows


def run_simulate(scenario, jobs=1):
    """Write ``summary.ndjson`` and ``energy_by_alpha.csv`` (plus trajectories).

    Returns the list of :class:`AlphaRun`. Blown-up replications are marked
    ``"failed"`` in the summary; the sweep continues.
    """
    out = scenario.output_dir
    os.makedirs(out, exist_ok=True)
    traj_dir = out if scenario.emit_trajectory else None
    runs = sweep_alpha(scenario, jobs, want_acf=False, trajectory_dir=traj_dir)
    with open(os.path.join(out, "summary.ndjson"), "w", encoding="utf-8", newline="\n") as fh:
        for run in runs:
            for rec in run.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(os.path.join(out, "energy_by_alpha.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alpha,mean_perturbed_hamiltonian,ci95_half_width,n_ok\n")
        for alpha, mean, half, n_ok in energy_table(runs):
            fh.write(f"{fmt(alpha)},{fmt(mean)},{fmt(half)},{n_ok}\n")
    return runs


def any_failed(runs):
    return any(r["status"] != "ok" for run in runs for r in run.records)


STABILITY_COLUMNS = ("n_vehicles", "gamma", "beta", "alpha", "time_gap", "margin", "abar",
                     "long_wave_stable", "all_modes_hurwitz", "max_nonzero_real_part", "status")


def stability_grid(scenario):
    gammas = scenario.gamma_sweep or (scenario.gamma_per_s,)
    betas = scenario.beta_sweep or (scenario.beta_per_s,)
    gaps = scenario.time_gap_sweep or (scenario.time_gap_s,)
    rows = []
    for g, b, a, T in itertools.product(gammas, betas, scenario.alpha_sweep, gaps):
        p = scenario.model_params(alpha=a, gamma=g, beta=b, time_gap=T)
        rep = spectrum(p)
        rows.append({
            "n_vehicles": p.n_vehicles, "gamma": g, "beta": b, "alpha": a, "time_gap": T,
            "margin": stability_margin(p), "abar": rep.spectral_bound,
            "long_wave_stable": rep.long_wave_stable, "all_modes_hurwitz": rep.all_modes_hurwitz,
            "max_nonzero_real_part": rep.max_nonzero_real_part, "status": rep.status,
        })
    return rows


def run_stability(scenario):
    """Write ``stability.csv``: one row per point of the gamma x beta x alpha x T grid."""
    os.makedirs(scenario.output_dir, exist_ok=True)
    rows = stability_grid(scenario)
    with open(os.path.join(scenario.output_dir, "stability.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(",".join(STABILITY_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in STABILITY_COLUMNS:
                v = row[col]
                if isinstance(v, bool):
                    cells.append("true" if v else "false")
                elif isinstance(v, str) or isinstance(v, int):
                    cells.append(str(v))
                else:
                    cells.append(fmt(v))
            fh.write(",".join(cells) + "\n")
    return rows


def run_acf(scenario, jobs=1):
    """Write ``acf.csv`` (lag column plus one column per alpha) and ``acf_minima.csv``."""
    os.makedirs(scenario.output_dir, exist_ok=True)
    runs = sweep_alpha(scenario, jobs, want_acf=True)
    curves = [r.acf for r in runs]
    if any(c is None for c in curves):
        raise RuntimeError("every replication failed for at least one alpha")
    with open(os.path.join(scenario.output_dir, "acf.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("lag_s," + ",".join(f"alpha={fmt(r.alpha)}" for r in runs) + "\n")
        for k in range(curves[0].lags.size):
            fh.write(",".join([fmt(curves[0].lags[k])] + [fmt(c.values[k]) for c in curves]) + "\n")
    with open(os.path.join(scenario.output_dir, "acf_minima.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("alpha,first_min_lag_s,first_min_value\n")
        for r in runs:
            m = r.acf.first_local_minimum()
            lag, val = m if m is not None else (math.nan, math.nan)
            fh.write(f"{fmt(r.alpha)},{fmt(lag)},{fmt(val)}\n")
    return runs


def _invariant_group(scenario, seeds, projector):
    params = scenario.model_params()
    cfg = scenario.simulation_config()
    n_rep, dim = len(seeds), 2 * params.n_vehicles
    I_P = np.eye(dim) - projector
    sums = np.zeros((n_rep, dim))
    outer = np.zeros((n_rep, dim, dim))
    count = np.zeros(n_rep, dtype=np.int64)
    z = np.empty((n_rep, dim))

    def observe(step, t, q, p, alive):
        if step < cfg.burn_in:
            return
        z[:, 0::2] = q - reference_positions(params, t)
        z[:, 1::2] = p - params.equilibrium_speed
        zp = z @ I_P.T
        sums[alive] += zp[alive]
        outer[alive] += np.einsum("ri,rj->rij", zp, zp)[alive]
        count[alive] += 1

    res = simulate_ensemble(params, equilibrium_state(params), cfg, seeds=seeds,
                            observer=observe, store=False)
    return sums, outer, count, res.failed_step


def ensemble_covariance(scenario, projector, jobs=1):
    """Projected covariance pooled over replications and post-burn-in samples.

    Returns ``(covariance, n_samples, failed_steps)``.
    """
    seeds = replication_seeds(scenario.seed, scenario.n_replications)
    groups = _groups(list(seeds), jobs)
    parts = _map_groups(_invariant_group, [(scenario, g, projector) for g in groups], jobs)
    sums = np.concatenate([p[0] for p in parts])
    outer = np.concatenate([p[1] for p in parts])
    count = np.concatenate([p[2] for p in parts])
    failed = np.concatenate([p[3] for p in parts])
    ok = failed < 0
    n = int(count[ok].sum())
    if n < 2:
        raise RuntimeError("not enough samples for an empirical covariance")
    mean = sums[ok].sum(axis=0) / n
    C = (outer[ok].sum(axis=0) - n * np.outer(mean, mean)) / (n - 1)
    return 0.5 * (C + C.T), n, failed


def _write_matrix(path, S):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in S:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def run_invariant(scenario, jobs=1):
    """Compare the theoretical stationary covariance with a fresh ensemble.

    Writes ``sigma_inf.csv``, ``empirical_covariance.csv`` (interleaved
    ``x_1, y_1, ...`` ordering, no header) and ``invariant_report.json``.
    """
    params = scenario.model_params()
    sc = stationary_covariance(params)
    os.makedirs(scenario.output_dir, exist_ok=True)
    emp, n_samples, failed = ensemble_covariance(scenario, sc.projector, jobs)
    t_end = scenario.n_steps * scenario.dt_s
    x0 = np.zeros(2 * params.n_vehicles)
    if np.any(sc.sigma_inf):
        gap = relative_frobenius(emp, sc.sigma_inf)
    else:
        gap = float(np.linalg.norm(emp))
    report = {
        "alpha": params.alpha,
        "abar": sc.abar,
        "margin": stability_margin(params),
        "eigenbasis_condition_number": sc.condition_number,
        "relative_frobenius_gap": gap,
        "gaussian_w2": gaussian_w2(emp, sc.sigma_inf),
        "convergence_bound_t_end": convergence_bound(params, x0, t_end, abar=sc.abar),
        "convergence_bound_t_end_sigma_squared": convergence_bound(
            params, x0, t_end, abar=sc.abar, sigma_squared=True),
        "t_end_s": t_end,
        "n_samples": n_samples,
        "failed_replications": [int(i) for i in np.nonzero(failed >= 0)[0]],
        **model_diagnostics(params),
    }
    _write_matrix(os.path.join(scenario.output_dir, "sigma_inf.csv"), sc.sigma_inf)
    _write_matrix(os.path.join(scenario.output_dir, "empirical_covariance.csv"), emp)
    with open(os.path.join(scenario.output_dir, "invariant_report.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report, sc, emp
