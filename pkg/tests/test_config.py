import pytest

from phtraffic.config import ScenarioConfig, load_config, parse_config
from phtraffic.errors import ConfigError


def test_empty_file_gives_defaults():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert cfg.n_vehicles == 50 and cfg.ring_length_m == 1000.0
    assert cfg.alpha_sweep == (0.0, 0.05, 0.1, 0.2, 0.5, 1.0)


def test_values_and_comments():
    cfg = parse_config("""
        # scenario
        n_vehicles = 8   # small ring
        sigma = 0.5
        alpha_sweep = [0, 0.5, 1]
        emit_trajectory = true
        ovf_kind = piecewise_linear
        burn_in_steps = 10
    """)
    assert cfg.n_vehicles == 8 and cfg.sigma == 0.5
    assert cfg.alpha_sweep == (0.0, 0.5, 1.0)
    assert cfg.emit_trajectory is True
    assert cfg.model_params().ovf_kind.value == "piecewise_linear"
    assert cfg.simulation_config().burn_in == 10


def test_negative_gamma_names_key():
    with pytest.raises(ConfigError) as err:
        parse_config("n_steps = 10\ngamma_per_s = -1\n")
    assert err.value.key == "gamma_per_s"
    assert "gamma_per_s" in str(err.value)
    assert err.value.lines == (2,)


def test_duplicate_key_names_both_lines():
    with pytest.raises(ConfigError) as err:
        parse_config("sigma = 1\n\nsigma = 2\n")
    assert err.value.key == "sigma"
    assert err.value.lines == (1, 3)
    assert "1" in str(err.value) and "3" in str(err.value)


@pytest.mark.parametrize("text, key", [
    ("speed_limit = 3", "speed_limit"),
    ("n_vehicles = 4.5", "n_vehicles"),
    ("sigma = abc", "sigma"),
    ("emit_trajectory = maybe", "emit_trajectory"),
    ("alpha_sweep = 1,,2", "alpha_sweep"),
    ("dt_s =", "dt_s"),
    ("n_vehicles = 2", "n_vehicles"),
    ("ovf_kind = cubic", "ovf_kind"),
    ("burn_in_steps = 100\nn_steps = 100", "burn_in_steps"),
    ("alpha_sweep = 0, -1", "alpha_sweep"),
])
def test_errors_name_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key


def test_malformed_line():
    with pytest.raises(ConfigError):
        parse_config("just words")


def test_load_and_override(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("seed = 3\n")
    cfg = load_config(path)
    assert cfg.seed == 3
    assert cfg.with_overrides(seed=9, output_dir=None).seed == 9
    with pytest.raises(ConfigError):
        cfg.with_overrides(sigma=-1.0)


def test_max_lag_samples():
    cfg = parse_config("dt_s = 0.01\nrecord_every = 10\nmax_lag_s = 30")
    assert cfg.max_lag_samples == 300
