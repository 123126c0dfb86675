import numpy as np
import pytest

from phtraffic.model import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, n=None, **overrides):
    kw = dict(
        n_vehicles=int(rng.integers(3, 65)) if n is None else n,
        ring_length=float(rng.uniform(50, 2000)),
        gamma=float(rng.uniform(0.05, 5)),
        beta=float(rng.uniform(0, 3)),
        alpha=float(rng.uniform(0, 2)),
        sigma=float(rng.uniform(0, 5)),
        vehicle_length=float(rng.uniform(0, 8)),
        time_gap=float(rng.uniform(0.3, 3)),
    )
    kw.update(overrides)
    return ModelParams(**kw)


def multiset_distance(a, b):
    """Largest pairing distance under the optimal one-to-one matching."""
    from scipy.optimize import linear_sum_assignment

    C = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


ACCEPTANCE_RESULTS = []


def record_criterion(number, name, passed, detail):
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {name} ({detail})"
    ACCEPTANCE_RESULTS.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)
