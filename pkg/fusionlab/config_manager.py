"""
Configuration manager for fusionlab.
Handles loading, saving and resetting of limits, paths and logging settings.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from .core.codec import atomic_write
from .core.construct import ZooLimits
from .core.errors import SpecError

logger = logging.getLogger(__name__)

HOME_ENV = "FUSIONLAB_HOME"
ZOO_DIR_ENV = "FUSIONLAB_ZOO_DIR"


@dataclass
class LimitsConfig:
    """Size limits; every CLI limit flag defaults to these."""
    max_group_order: int = 4096
    max_rank: int = 405
    lattice_rank: int = 64
    q5_samples: int = 10
    random_draws: int = 500
    seed: int = 0

    def zoo_limits(self) -> ZooLimits:
        return ZooLimits(
            max_rank=self.max_rank,
            max_group_order=self.max_group_order,
            q5_samples=self.q5_samples,
            seed=self.seed,
        )


@dataclass
class PathConfig:
    """Directory paths."""
    zoo_dir: str = ""


@dataclass
class LoggingConfig:
    level: str = "WARNING"


@dataclass
class FusionLabConfig:
    """Main configuration container."""
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    paths: PathConfig = field(default_factory=PathConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    version: str = "0.1.0"


def _section(cls, data: Optional[Dict[str, Any]]):
    """Build a config section, ignoring unknown keys."""
    known = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in (data or {}).items() if k in known})


def config_from_dict(data: Dict[str, Any]) -> FusionLabConfig:
    try:
        return FusionLabConfig(
            limits=_section(LimitsConfig, data.get("limits")),
            paths=_section(PathConfig, data.get("paths")),
            logging=_section(LoggingConfig, data.get("logging")),
            version=data.get("version", FusionLabConfig.version),
        )
    except (TypeError, AttributeError) as exc:
        raise SpecError(f"malformed configuration: {exc}") from exc


class ConfigManager:
    """
    Manages fusionlab configuration with persistent storage.

    The config directory is ~/.fusionlab unless FUSIONLAB_HOME is set; the
    zoo directory can be overridden with FUSIONLAB_ZOO_DIR.  Both are read
    after a .env file in the working directory, if any, has been loaded.
    """

    def __init__(self, config_dir: Optional[str] = None):
        load_dotenv()
        home = config_dir or os.environ.get(HOME_ENV)
        self.config_dir = Path(home).expanduser() if home else Path.home() / ".fusionlab"
        self.config_file = self.config_dir / "config.json"
        self.config = FusionLabConfig()
        self._init_default_paths()

    def _init_default_paths(self):
        """Fill unset paths with directories under the config directory."""
        paths = self.config.paths
        paths.zoo_dir = paths.zoo_dir or str(self.config_dir / "zoo")

    @property
    def zoo_dir(self) -> Path:
        override = os.environ.get(ZOO_DIR_ENV)
        return Path(override or self.config.paths.zoo_dir).expanduser()

    @property
    def limits(self) -> LimitsConfig:
        return self.config.limits

    def load(self) -> bool:
        """
        Load configuration from file.
        Returns True if successful, False if the file doesn't exist.
        """
        if not self.config_file.exists():
            return False
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            logger.warning("could not read %s: %s", self.config_file, exc)
            return False
        self.config = config_from_dict(data)
        self._init_default_paths()
        return True

    def save(self) -> Path:
        """Save configuration to file, creating the config directory on first use."""
        text = json.dumps(asdict(self.config), indent=2, sort_keys=True) + "\n"
        return atomic_write(self.config_file, text)

    def reset_to_defaults(self):
        self.config = FusionLabConfig()
        self._init_default_paths()

    def export_config(self, path: str) -> Path:
        return atomic_write(path, json.dumps(asdict(self.config), indent=2, sort_keys=True) + "\n")

    def import_config(self, path: str):
        """Replace the configuration with the one stored at path."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot import configuration from {path}: {exc}", path=str(path)) from exc
        if not isinstance(data, dict) or "limits" not in data:
            raise SpecError(f"{path} is not a fusionlab configuration", path=str(path))
        self.config = config_from_dict(data)
        self._init_default_paths()


# Singleton instance
_config_manager: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """Get or create the global config manager instance."""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
        _config_manager.load()
    return _config_manager


def reset_config_manager():
    """Drop the singleton so the next call re-reads the environment."""
    global _config_manager
    _config_manager = None
