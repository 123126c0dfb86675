"""Acceptance criteria, each at its stated tolerance.

Every test reports one PASS/FAIL line (shown in the terminal summary) and
then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from phtraffic.cli import main
from phtraffic.config import ScenarioConfig
from phtraffic.dynamics import drift_carfollowing, drift_matrix, drift_phs, perturbation_drift
from phtraffic.experiments import default_jobs, energy_table, ensemble_covariance, sweep_alpha
from phtraffic.integrator import SimulationConfig, em_update, simulate
from phtraffic.invariant import covariance_at, stationary_covariance
from phtraffic.model import ModelParams, PerturbationState, RingState, equilibrium_state, from_perturbation
from phtraffic.observables import energy_balance_drift, hamiltonian, relative_frobenius
from phtraffic.spectral import spectrum, stability_margin

from conftest import multiset_distance, random_params, record_criterion

INVARIANT_CASE = dict(n_vehicles=6, ring_length=120.0, gamma=1.0, beta=0.5, time_gap=1.0, alpha=0.2,
                      sigma=1.0)


def _check(number, name, passed, detail, started, budget_s):
    elapsed = time.perf_counter() - started
    ok = passed and elapsed < budget_s
    record_criterion(number, name, ok, f"{detail}; {elapsed:.1f}s of {budget_s:g}s")
    assert passed, detail
    assert elapsed < budget_s, f"took {elapsed:.1f}s"


def test_01_formulation_equivalence():
    t0 = time.perf_counter()
    # road-scale draws: 10-60 m mean spacing, speeds 0-40 m/s
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 65))
        p = random_params(rng, n=n, ring_length=n * float(rng.uniform(10, 60)),
                          time_gap=float(rng.uniform(0.3, 3)))
        q = np.arange(n) * p.equilibrium_spacing + rng.normal(0, 0.2 * p.equilibrium_spacing, n)
        s = RingState(q, rng.uniform(0, 40, n))
        dQ, dp = drift_carfollowing(p, s)
        worst = max(worst, float(np.max(np.abs(drift_phs(p, s) - np.concatenate([dQ, dp])))))
    _check(1, "formulation equivalence", worst <= 1e-12, f"max abs diff {worst:.2e}", t0, 10)


def test_02_linearization_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    h, worst = 1e-6, 0.0
    for n in range(3, 9):
        for _ in range(5):
            p = random_params(rng, n=n)
            z0 = np.zeros(2 * n)
            J = np.empty((2 * n, 2 * n))
            for j in range(2 * n):
                e = np.zeros(2 * n)
                e[j] = h
                J[:, j] = (perturbation_drift(p, z0 + e) - perturbation_drift(p, z0 - e)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(J - drift_matrix(p)))))
    _check(2, "linearization fidelity", worst <= 1e-6, f"max abs diff {worst:.2e}", t0, 5)


def test_03_spectrum_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        p = random_params(rng, n=int(rng.integers(3, 17)))
        worst = max(worst, multiset_distance(spectrum(p).roots, np.linalg.eigvals(drift_matrix(p))))
    _check(3, "spectrum oracle", worst <= 1e-8, f"max matched distance {worst:.2e}", t0, 30)


def test_04_stability_condition_soundness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    tested = counterexamples = 0
    while tested < 1000:
        p = ModelParams(n_vehicles=int(rng.integers(4, 33)), ring_length=1000.0,
                        gamma=float(5.0 - rng.uniform(0, 5)), beta=float(rng.uniform(0, 3)),
                        alpha=float(rng.uniform(0, 2)), time_gap=float(rng.uniform(0.3, 3)))
        if not stability_margin(p) > 0:
            continue
        tested += 1
        eig = np.linalg.eigvals(drift_matrix(p))
        nonzero = np.delete(eig, np.argmin(np.abs(eig)))
        counterexamples += int(np.any(nonzero.real >= 0))
    _check(4, "stability-condition soundness", counterexamples == 0,
           f"{counterexamples} counterexamples in {tested} draws", t0, 60)


def test_05_critical_case():
    t0 = time.perf_counter()
    base = dict(gamma=1.0, beta=0.5, time_gap=1.0)
    margin0 = stability_margin(ModelParams(alpha=0.0, **base))
    abar = spectrum(ModelParams(alpha=0.05, **base)).spectral_bound
    _check(5, "critical case", margin0 == 0.0 and abar > 0,
           f"margin(alpha=0)={margin0!r}, abar(alpha=0.05)={abar:.3g}", t0, 1)


def test_06_energy_conservation():
    t0 = time.perf_counter()
    p = ModelParams(n_vehicles=8, ring_length=160.0, gamma=0.0, beta=0.0, alpha=1.0, sigma=0.0,
                    analysis_only=True)
    rng = np.random.default_rng(6)
    init = from_perturbation(PerturbationState(rng.normal(0, 0.5, 8), rng.normal(0, 0.5, 8)), p)
    horizon = 10.0

    def drift(dt):
        n = int(round(horizon / dt))
        tr = simulate(p, init, SimulationConfig(dt=dt, n_steps=n, record_every=1))
        H = [hamiltonian(tr.state(i), p.potential, p.ring_length) for i in range(len(tr))]
        return float(np.max(np.abs(np.array(H) - H[0])))

    d1, d2 = drift(0.01), drift(0.005)
    ratio = d1 / d2
    _check(6, "energy conservation", 1.7 <= ratio <= 2.3,
           f"drift {d1:.3e} -> {d2:.3e}, ratio {ratio:.3f}", t0, 10)


def test_07_energy_balance():
    t0 = time.perf_counter()
    p = ModelParams(n_vehicles=5, ring_length=100.0, alpha=0.3, sigma=1.5)
    rng = np.random.default_rng(7)
    eq = equilibrium_state(p)
    dt, n_rep = 1e-4, 10_000
    results = []
    for shift in (0.0, 2.0, -3.0):
        s = RingState(eq.positions + rng.normal(0, 2, 5), eq.momenta + shift + rng.normal(0, 1, 5))
        q, pm = em_update(p, np.tile(s.positions, (n_rep, 1)), np.tile(s.momenta, (n_rep, 1)), dt,
                          rng.standard_normal((n_rep, 5)))
        H0 = hamiltonian(s, p.potential, p.ring_length)
        H1 = np.array([hamiltonian(RingState(q[r], pm[r]), p.potential, p.ring_length)
                       for r in range(n_rep)])
        rate = (H1 - H0) / dt
        se = rate.std(ddof=1) / math.sqrt(n_rep)
        results.append(abs(rate.mean() - energy_balance_drift(p, s)) / se)
    _check(7, "energy balance", max(results) <= 3.0,
           "|mean - drift| / SE = " + ", ".join(f"{z:.2f}" for z in results), t0, 10)


def test_08_invariant_law():
    t0 = time.perf_counter()
    scenario = ScenarioConfig(n_vehicles=6, ring_length_m=120.0, gamma_per_s=1.0, beta_per_s=0.5,
                              time_gap_s=1.0, alpha_per_s2=0.2, sigma=1.0, dt_s=0.01,
                              n_steps=100_000, burn_in_steps=50_000, record_every=5,
                              n_replications=200, seed=0)
    sc = stationary_covariance(scenario.model_params())
    emp, n_samples, failed = ensemble_covariance(scenario, sc.projector, jobs=default_jobs())
    gap = relative_frobenius(emp, sc.sigma_inf)
    _check(8, "invariant law", gap <= 0.05 and not np.any(failed >= 0),
           f"relative Frobenius gap {gap:.4f} over {n_samples} samples", t0, 300)


def test_09_convergence_rate():
    t0 = time.perf_counter()
    p = ModelParams(**INVARIANT_CASE)
    sc = stationary_covariance(p)
    ts = np.linspace(0.0, 5.0 / sc.abar, 41)
    err = np.array([np.linalg.norm(covariance_at(p, t) - sc.sigma_inf) for t in ts])
    slope = float(np.polyfit(ts, np.log(err), 1)[0])
    _check(9, "convergence rate", slope <= -1.8 * sc.abar,
           f"slope {slope:.4f} vs -1.8*abar = {-1.8 * sc.abar:.4f}", t0, 30)


@pytest.fixture(scope="module")
def alpha_sweep_runs():
    t0 = time.perf_counter()
    scenario = ScenarioConfig(n_replications=20, seed=0)
    runs = sweep_alpha(scenario, jobs=default_jobs(), want_acf=True)
    return runs, time.perf_counter() - t0


def test_10_energy_decreases_with_alpha(alpha_sweep_runs):
    runs, elapsed = alpha_sweep_runs
    t0 = time.perf_counter() - elapsed
    rows = energy_table(runs)
    means = [m for _, m, _, _ in rows]
    halves = [h for _, _, h, _ in rows]
    ends = means[0] - means[-1] > halves[0] + halves[-1]
    monotone = all(means[i + 1] <= means[i] + halves[i] + halves[i + 1] for i in range(len(rows) - 1))
    complete = all(n == 20 for *_, n in rows)
    detail = "; ".join(f"alpha={a:g}: {m:.1f}+-{h:.1f}" for a, m, h, _ in rows)
    _check(10, "energy trend over alpha", ends and monotone and complete, detail, t0, 900)


def test_11_acf_smoothing(alpha_sweep_runs):
    t0 = time.perf_counter()
    runs, _ = alpha_sweep_runs
    by_alpha = {r.alpha: r.acf.first_local_minimum() for r in runs}
    lo, hi = by_alpha[0.0], by_alpha[1.0]
    passed = lo is not None and (hi is None or abs(hi[1]) < abs(lo[1]))
    fmt = lambda m: "none" if m is None else f"{m[1]:.4f} at {m[0]:.1f}s"
    _check(11, "speed ACF smoothing", passed,
           f"first minimum alpha=0: {fmt(lo)}, alpha=1: {fmt(hi)}", t0, 60)


def test_12_reproducibility(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_steps = 5000\nn_replications = 2\nalpha_sweep = 0, 1\n"
                   "emit_trajectory = true\nwindow_s = 10\n")
    for name in ("first", "second"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name), "--seed", "7",
                     "--jobs", "1"]) == 0
    a = {f.name: f.read_bytes() for f in (tmp_path / "first").iterdir()}
    b = {f.name: f.read_bytes() for f in (tmp_path / "second").iterdir()}
    traj = [k for k in a if k.startswith("trajectory_")]
    _check(12, "reproducibility", a == b and len(traj) == 4 and "summary.ndjson" in a,
           f"{len(a)} files compared byte for byte", t0, 60)
