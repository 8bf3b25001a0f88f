from __future__ import annotations

import pytest

from spslab.config import DEFAULT_LIMITS, Limits, load_config


def test_defaults_without_file(tmp_path):
    assert load_config(config_path=tmp_path / "missing.toml") == DEFAULT_LIMITS


def test_load_from_toml(tmp_path):
    cfg = tmp_path / "config.toml"
    cfg.write_text("[limits]\nmax_terms = 6\nmax_points = 1_000\n")

    result = load_config(config_path=cfg)

    assert result.max_terms == 6
    assert result.max_points == 1000
    assert result.max_paths == DEFAULT_LIMITS.max_paths


def test_string_values_accepted(tmp_path):
    cfg = tmp_path / "config.toml"
    cfg.write_text('[limits]\nmax_vars = "8"\n')

    assert load_config(config_path=cfg).max_vars == 8


def test_load_from_env(tmp_path, monkeypatch):
    """Falls back to env vars when the TOML file doesn't exist."""
    monkeypatch.setenv("SPSLAB_MAX_MONOMIALS", "5000")

    result = load_config(config_path=tmp_path / "missing.toml")

    assert result == Limits(max_monomials=5000)


def test_toml_wins_over_env(tmp_path, monkeypatch):
    cfg = tmp_path / "config.toml"
    cfg.write_text("[limits]\nmax_degree = 4\n")
    monkeypatch.setenv("SPSLAB_MAX_DEGREE", "9")
    monkeypatch.setenv("SPSLAB_MAX_TERMS", "7")

    result = load_config(config_path=cfg)

    assert result.max_degree == 4
    assert result.max_terms == 7


def test_default_path_under_home(tmp_path):
    """HOME points at tmp_path via the autouse fixture."""
    cfg = tmp_path / ".config" / "spslab" / "config.toml"
    cfg.parent.mkdir(parents=True)
    cfg.write_text("[limits]\nmax_subsets = 10\n")

    assert load_config().max_subsets == 10


def test_unknown_key(tmp_path):
    cfg = tmp_path / "config.toml"
    cfg.write_text("[limits]\nmax_widgets = 3\n")

    with pytest.raises(SystemExit, match="Unknown limit"):
        load_config(config_path=cfg)


@pytest.mark.parametrize("value", ["0", "-4", '"many"'])
def test_invalid_value(tmp_path, value):
    cfg = tmp_path / "config.toml"
    cfg.write_text(f"[limits]\nmax_paths = {value}\n")

    with pytest.raises(SystemExit, match="Invalid value"):
        load_config(config_path=cfg)


def test_invalid_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SPSLAB_MAX_PATHS", "lots")

    with pytest.raises(SystemExit, match="SPSLAB_MAX_PATHS"):
        load_config(config_path=tmp_path / "missing.toml")


def test_limits_not_a_table(tmp_path):
    cfg = tmp_path / "config.toml"
    cfg.write_text("limits = 3\n")

    with pytest.raises(SystemExit, match="must be a table"):
        load_config(config_path=cfg)


def test_unparseable(tmp_path):
    cfg = tmp_path / "config.toml"
    cfg.write_text("[limits\n")

    with pytest.raises(SystemExit, match="Could not parse"):
        load_config(config_path=cfg)
