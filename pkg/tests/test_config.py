import json
from dataclasses import fields
from pathlib import Path

import pytest

from fusionlab.config_manager import (
    ConfigManager,
    LimitsConfig,
    PathConfig,
    get_config_manager,
    reset_config_manager,
)
from fusionlab.core.construct import ZooLimits
from fusionlab.core.errors import SpecError

DEFAULT_SETTINGS = Path(__file__).resolve().parent.parent / "config" / "default_settings.json"


def test_defaults(tmp_path):
    manager = ConfigManager(config_dir=str(tmp_path))
    assert manager.limits == LimitsConfig()
    assert manager.limits.lattice_rank == 64
    assert manager.zoo_dir == tmp_path / "zoo"
    assert manager.limits.zoo_limits() == ZooLimits()


def test_save_and_load(tmp_path):
    manager = ConfigManager(config_dir=str(tmp_path))
    assert not manager.load()
    manager.config.limits.max_rank = 100
    manager.config.logging.level = "DEBUG"
    manager.save()
    other = ConfigManager(config_dir=str(tmp_path))
    assert other.load()
    assert other.limits.max_rank == 100
    assert other.config.logging.level == "DEBUG"


def test_unknown_keys_are_ignored(tmp_path):
    (tmp_path / "config.json").write_text(json.dumps({"limits": {"seed": 3, "colour": "red"}}))
    manager = ConfigManager(config_dir=str(tmp_path))
    assert manager.load()
    assert manager.limits.seed == 3


def test_paths_hold_only_the_zoo_dir(tmp_path):
    (tmp_path / "config.json").write_text(json.dumps({"paths": {"reports_dir": "/tmp/old-reports"}}))
    manager = ConfigManager(config_dir=str(tmp_path))
    assert manager.load()
    assert [f.name for f in fields(PathConfig)] == ["zoo_dir"]
    assert manager.zoo_dir == tmp_path / "zoo"
    assert "reports_dir" not in json.loads(manager.save().read_text())["paths"]


def test_unreadable_file_keeps_defaults(tmp_path):
    (tmp_path / "config.json").write_text("{")
    manager = ConfigManager(config_dir=str(tmp_path))
    assert not manager.load()
    assert manager.limits == LimitsConfig()


def test_zoo_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv("FUSIONLAB_ZOO_DIR", str(tmp_path / "elsewhere"))
    assert ConfigManager(config_dir=str(tmp_path)).zoo_dir == tmp_path / "elsewhere"


def test_import_export(tmp_path):
    manager = ConfigManager(config_dir=str(tmp_path))
    manager.import_config(str(DEFAULT_SETTINGS))
    assert manager.limits == LimitsConfig()
    manager.config.limits.random_draws = 7
    exported = manager.export_config(str(tmp_path / "export.json"))
    manager.reset_to_defaults()
    assert manager.limits.random_draws == 500
    manager.import_config(str(exported))
    assert manager.limits.random_draws == 7


def test_import_rejects_other_files(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"api_key": "x"}))
    manager = ConfigManager(config_dir=str(tmp_path))
    with pytest.raises(SpecError):
        manager.import_config(str(path))
    with pytest.raises(SpecError):
        manager.import_config(str(tmp_path / "missing.json"))


def test_singleton_follows_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FUSIONLAB_HOME", str(tmp_path / "a"))
    reset_config_manager()
    first = get_config_manager()
    assert get_config_manager() is first
    assert first.config_dir == tmp_path / "a"
    monkeypatch.setenv("FUSIONLAB_HOME", str(tmp_path / "b"))
    reset_config_manager()
    assert get_config_manager().config_dir == tmp_path / "b"
