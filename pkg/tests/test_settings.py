"""Test lab settings - YAML loading, validation errors and environment overrides."""
import logging

import pytest

from moebius_lab.core import settings as settings_module
from moebius_lab.core.errors import ConfigError
from moebius_lab.core.settings import CONFIG_ENV, DEFAULT_CONFIG, JOBS_ENV, LabSettings, load_settings


def test_bundled_defaults_match_model_defaults(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(JOBS_ENV, raising=False)
    assert load_settings() == LabSettings()


def test_partial_file(tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("numerics:\n  random_planes: 3\ntolerances:\n  kulkarni: 0.01\n")
    settings = load_settings(path)
    assert settings.numerics.random_planes == 3
    assert settings.numerics.fd_step == 1e-3
    assert settings.tolerances == {"kulkarni": 0.01}


def test_invalid_value_names_field(tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("grid:\n  margin: -1\n")
    with pytest.raises(ConfigError) as info:
        load_settings(path)
    assert info.value.field == "grid.margin"


def test_invalid_yaml_reports_line(tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("grid:\n  margin: [1\n")
    with pytest.raises(ConfigError) as info:
        load_settings(path)
    assert info.value.line is not None


def test_environment_overrides(tmp_path, monkeypatch):
    path = tmp_path / "lab.yaml"
    path.write_text("runner:\n  jobs: 1\n")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    monkeypatch.setenv(JOBS_ENV, "3")
    assert load_settings().runner.jobs == 3
    monkeypatch.setenv(JOBS_ENV, "many")
    with pytest.raises(ConfigError) as info:
        load_settings()
    assert info.value.field == JOBS_ENV


def test_defaults_ship_inside_the_package():
    assert DEFAULT_CONFIG.is_file()
    assert "moebius_lab" in str(DEFAULT_CONFIG)


def test_missing_bundled_defaults_are_logged(tmp_path, monkeypatch, caplog):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(JOBS_ENV, raising=False)
    monkeypatch.setattr(settings_module, "DEFAULT_CONFIG", tmp_path / "missing.yaml")
    with caplog.at_level(logging.WARNING, logger="moebius_lab.core.settings"):
        assert load_settings() == LabSettings()
    assert "built-in defaults" in caplog.text
