from pathlib import Path

import pytest

from core.config import (
    DEFAULT_ALPHAS,
    DEFAULT_STRATEGIES,
    ENV_OUTPUT_DIR,
    ENV_WORKERS,
    ScenarioConfig,
    config_from_dict,
    parse_config,
    with_overrides,
)
from core.errors import ConfigError
from core.malaria import default_initial_state, default_params


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
    monkeypatch.delenv(ENV_WORKERS, raising=False)


def write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_empty_file_gives_defaults(tmp_path):
    config = parse_config(write(tmp_path, ""))
    assert config.params == default_params()
    assert config.initial_state == default_initial_state()
    assert config.horizon == 100.0
    assert config.n_steps == 1000
    assert config.alphas == DEFAULT_ALPHAS == (1.0, 0.99, 0.95, 0.90)
    assert config.strategies == DEFAULT_STRATEGIES
    assert len(config.strategies) == 7
    assert config.sweep.tolerance == 1e-3
    assert config.sweep.max_iterations == 500
    assert config.sweep.relaxation == 0.5
    assert config.costate_variant == "paper_eq17"
    assert config.scheme == "fractional"
    assert config.workers == 1
    assert config.output_dir == Path("outputs")


def test_parameter_override_keeps_the_rest(tmp_path):
    config = parse_config(write(tmp_path, "[params]\neta = 0.3\n"))
    assert config.params.eta == 0.3
    assert config.params.mu_v == default_params().mu_v


def test_alpha_out_of_range_names_the_key(tmp_path):
    with pytest.raises(ConfigError, match=r"\[matrix\]\.alphas\[0\].*0 < alpha <= 1"):
        parse_config(write(tmp_path, "[matrix]\nalphas = [1.5]\n"))


def test_alpha_under_params_points_to_the_matrix(tmp_path):
    with pytest.raises(ConfigError, match=r"\[params\]\.alpha.*\[matrix\]\.alphas.*0 < alpha <= 1") as info:
        parse_config(write(tmp_path, "[params]\nalpha = 1.5\n"))
    assert "unknown key" not in str(info.value)


def test_damping_settings(tmp_path):
    config = parse_config(write(tmp_path, "[sweep]\nstall_window = 4\nmin_relaxation = 0.05\n"))
    assert config.sweep.stall_window == 4
    assert config.sweep.min_relaxation == 0.05
    assert ScenarioConfig().sweep.stall_window == 10


@pytest.mark.parametrize("text,match", [
    ("[params]\nbeta = 1.0\n", "unknown key"),
    ("[plots]\nwidth = 3\n", "unknown section"),
    ("[matrix]\nstrategies = [\"nets\"]\n", "strategies"),
    ("[matrix]\nstrategies = [\"spray\", \"spray\"]\n", "duplicates"),
    ("[grid]\nn_steps = 0\n", "n_steps"),
    ("[grid]\nscheme = \"implicit\"\n", "scheme"),
    ("[sweep]\nrelaxation = 0.0\n", "relaxation"),
    ("[sweep]\nstall_window = 0\n", "stall_window"),
    ("[sweep]\nmin_relaxation = 2.0\n", "min_relaxation"),
    ("[sweep]\ncostate_variant = \"exact\"\n", "costate_variant"),
    ("[params]\nd2 = 0.0\n", "d2"),
    ("[initial_state]\nI_H = -4\n", "I_H"),
    ("[output]\nplots = \"yes\"\n", "plots"),
])
def test_invalid_values_are_rejected(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(write(tmp_path, text))


def test_parse_error_reports_the_line(tmp_path):
    with pytest.raises(ConfigError, match="line 2"):
        parse_config(write(tmp_path, "[grid]\nhorizon = = 3\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "absent.toml")


def test_environment_fills_in_missing_keys(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "from_env"))
    monkeypatch.setenv(ENV_WORKERS, "3")
    config = parse_config(write(tmp_path, ""))
    assert config.output_dir == tmp_path / "from_env"
    assert config.workers == 3


def test_file_wins_over_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_WORKERS, "3")
    config = parse_config(write(tmp_path, "[matrix]\nworkers = 2\n"))
    assert config.workers == 2


def test_bad_worker_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_WORKERS, "many")
    with pytest.raises(ConfigError, match=ENV_WORKERS):
        parse_config(write(tmp_path, ""))


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    with pytest.raises(ConfigError, match="not writable"):
        config_from_dict({"output": {"dir": str(blocker / "sub")}})


def test_overrides_and_round_trip(tmp_path):
    config = config_from_dict({"matrix": {"alphas": [0.9], "strategies": ["spray"]}})
    changed = with_overrides(config, output_dir=str(tmp_path), workers=4)
    assert changed.output_dir == tmp_path
    assert changed.workers == 4
    assert changed.alphas == (0.9,)

    rebuilt = config_from_dict(changed.to_dict())
    assert rebuilt == changed


def test_params_for_sets_only_the_order():
    config = ScenarioConfig()
    p = config.params_for(0.9)
    assert p.alpha == 0.9
    assert p.eta == config.params.eta
    assert config.grid.n_steps == 1000
    assert config.grid.tf == 100.0


def test_bundled_scenarios_parse():
    root = Path(__file__).resolve().parent.parent / "scenarios"
    assert parse_config(root / "default.toml") == ScenarioConfig()
    quick = parse_config(root / "quick.toml")
    assert quick.n_steps == 200
    assert quick.output_dir == Path("outputs/quick")
