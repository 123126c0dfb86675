"""Scenario configuration: a flat ``key = value`` text format.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Lists are comma separated (surrounding brackets optional). Every key has a
default matching the desk-scale experiment, so an empty file is valid.
Unknown keys, duplicate keys, empty values, type mismatches and constraint
violations are errors naming the key and line(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .integrator import SimulationConfig
from .model import ModelParams, OVFKind

DEFAULT_ALPHA_SWEEP = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0)


@dataclass(frozen=True)
class ScenarioConfig:
    # model
    n_vehicles: int = 50
    ring_length_m: float = 1000.0
    gamma_per_s: float = 1.0
    beta_per_s: float = 0.5
    alpha_per_s2: float = 0.2
    sigma: float = 5.0
    vehicle_length_m: float = 5.0
    time_gap_s: float = 1.0
    desired_speed_mps: float = 30.0
    ovf_kind: str = "affine"
    # integration
    dt_s: float = 0.01
    n_steps: int = 50_000
    burn_in_steps: int | None = None
    seed: int = 0
    record_every: int = 10
    # experiments
    n_replications: int = 100
    alpha_sweep: tuple = DEFAULT_ALPHA_SWEEP
    gamma_sweep: tuple | None = None
    beta_sweep: tuple | None = None
    time_gap_sweep: tuple | None = None
    output_dir: str = "out"
    emit_trajectory: bool = False
    window_s: float | None = None
    max_lag_s: float = 30.0

    def model_params(self, alpha=None, **overrides):
        kw = dict(
            n_vehicles=self.n_vehicles, ring_length=self.ring_length_m,
            gamma=self.gamma_per_s, beta=self.beta_per_s,
            alpha=self.alpha_per_s2 if alpha is None else alpha,
            sigma=self.sigma, vehicle_length=self.vehicle_length_m,
            time_gap=self.time_gap_s, desired_speed=self.desired_speed_mps,
            ovf_kind=OVFKind(self.ovf_kind),
        )
        kw.update(overrides)
        return ModelParams(**kw)

    def simulation_config(self):
        return SimulationConfig(dt=self.dt_s, n_steps=self.n_steps,
                                burn_in_steps=self.burn_in_steps, seed=self.seed,
                                record_every=self.record_every)

    @property
    def burn_in(self):
        return self.simulation_config().burn_in

    @property
    def max_lag_samples(self):
        return int(round(self.max_lag_s / (self.dt_s * self.record_every)))

    def with_overrides(self, **kw):
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        validate(cfg)
        return cfg


def _kind(f):
    t = f.type
    if "tuple" in t:
        return "list"
    for name in ("bool", "int", "float", "str"):
        if t.startswith(name):
            return name
    raise TypeError(t)


def _parse_scalar(kind, raw, key, line):
    try:
        if kind == "int":
            if raw.lower().startswith(("0x", "-0x")):
                raise ValueError
            return int(raw)
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind}", key, (line,)) from None


def _parse_value(f, raw, line):
    kind = _kind(f)
    if kind != "list":
        return _parse_scalar(kind, raw, f.name, line)
    body = raw.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    items = [s.strip() for s in body.split(",")]
    if not items or any(s == "" for s in items):
        raise ConfigError(f"{f.name}: malformed list {raw!r}", f.name, (line,))
    return tuple(_parse_scalar("float", s, f.name, line) for s in items)


def _constraint(ok, key, msg, lines):
    if not ok:
        raise ConfigError(f"{key}: {msg}", key, lines.get(key, ()))


def validate(cfg, lines=None):
    """Check every constraint on a scenario; raises :class:`ConfigError`."""
    lines = lines or {}
    c = cfg
    _constraint(c.n_vehicles > 2, "n_vehicles", "must be > 2", lines)
    _constraint(c.ring_length_m > 0, "ring_length_m", "must be > 0", lines)
    _constraint(c.gamma_per_s > 0, "gamma_per_s", "must be > 0", lines)
    for key in ("beta_per_s", "alpha_per_s2", "sigma", "vehicle_length_m", "desired_speed_mps"):
        _constraint(getattr(c, key) >= 0, key, "must be >= 0", lines)
    _constraint(c.time_gap_s > 0, "time_gap_s", "must be > 0", lines)
    _constraint(c.ovf_kind in {k.value for k in OVFKind}, "ovf_kind",
                "must be one of " + ", ".join(k.value for k in OVFKind), lines)
    _constraint(c.dt_s > 0, "dt_s", "must be > 0", lines)
    _constraint(c.n_steps >= 1, "n_steps", "must be >= 1", lines)
    _constraint(c.burn_in_steps is None or 0 <= c.burn_in_steps < c.n_steps, "burn_in_steps",
                "must satisfy 0 <= burn_in_steps < n_steps", lines)
    _constraint(c.seed >= 0, "seed", "must be >= 0", lines)
    _constraint(c.record_every >= 1, "record_every", "must be >= 1", lines)
    _constraint(c.n_replications >= 1, "n_replications", "must be >= 1", lines)
    _constraint(all(a >= 0 for a in c.alpha_sweep), "alpha_sweep", "values must be >= 0", lines)
    for key, pred, msg in (("gamma_sweep", lambda v: v > 0, "values must be > 0"),
                           ("beta_sweep", lambda v: v >= 0, "values must be >= 0"),
                           ("time_gap_sweep", lambda v: v > 0, "values must be > 0")):
        vals = getattr(c, key)
        _constraint(vals is None or all(pred(v) for v in vals), key, msg, lines)
    _constraint(c.window_s is None or c.window_s > 0, "window_s", "must be > 0", lines)
    _constraint(c.max_lag_s > 0, "max_lag_s", "must be > 0", lines)
    _constraint(c.output_dir != "", "output_dir", "must not be empty", lines)
    return cfg


def parse_config(text):
    """Parse scenario text into a validated :class:`ScenarioConfig`."""
    known = {f.name: f for f in fields(ScenarioConfig)}
    seen = {}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", None, (lineno,))
        key, raw = (s.strip() for s in content.split("=", 1))
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", key, (lineno,))
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", key, (seen[key], lineno))
        seen[key] = lineno
        if raw == "":
            raise ConfigError(f"{key}: missing value", key, (lineno,))
        values[key] = _parse_value(known[key], raw, lineno)
    cfg = ScenarioConfig(**values)
    lines = {k: (n,) for k, n in seen.items()}
    return validate(cfg, lines)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
