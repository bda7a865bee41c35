"""
Runtime settings management
Priority: Environment Variables > YAML Config > built-in defaults
"""

import copy
import os
import yaml
from pathlib import Path
from typing import Any, Dict, Optional
import logging

from .constants import DENSE_LIMIT

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    'logging': {
        'level': 'INFO',
        'file': None,
        'console': True,
    },
    'runtime': {
        'workers': 1,
        'output_dir': 'results',
    },
    'solver': {
        'dense_limit': DENSE_LIMIT,
    },
}

# Dot path -> (environment variable, type)
ENV_MAPPING = {
    'logging.level': ('FLOQUET_LOG_LEVEL', str),
    'logging.file': ('FLOQUET_LOG_FILE', str),
    'runtime.workers': ('FLOQUET_WORKERS', int),
    'runtime.output_dir': ('FLOQUET_OUTPUT_DIR', str),
    'solver.dense_limit': ('FLOQUET_DENSE_LIMIT', int),
}

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Config:
    """
    Runtime settings for FloquetQS
    Loads config/config.yaml when present, otherwise runs on defaults
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration

        Args:
            config_path: Path to config file (default: config/config.yaml)
        """
        if config_path is None:
            project_root = Path(__file__).parent.parent.parent
            config_path = project_root / "config" / "config.yaml"

        self.config_path = Path(config_path)
        self._config: Dict[str, Any] = {}
        self.load()

    def load(self) -> None:
        """Load settings from the YAML file, falling back to defaults"""
        self._config = copy.deepcopy(DEFAULTS)
        if not self.config_path.exists():
            logger.debug(f"No runtime config at {self.config_path}, using defaults")
            return

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML config: {e}")
            raise

        if not isinstance(loaded, dict):
            raise ValueError(f"Runtime config must be a mapping: {self.config_path}")
        _merge(self._config, loaded)
        logger.info(f"Configuration loaded from {self.config_path}")
        self._validate()

    def _validate(self) -> None:
        """Validate runtime values"""
        level = str(self.get('logging.level')).upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"Invalid logging.level: {level}")

        workers = self.get('runtime.workers')
        if not isinstance(workers, int) or workers < 1:
            raise ValueError(f"runtime.workers must be a positive integer, got {workers!r}")

        dense_limit = self.get('solver.dense_limit')
        if not isinstance(dense_limit, int) or dense_limit < 1:
            raise ValueError(f"solver.dense_limit must be a positive integer, got {dense_limit!r}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a setting by dot-separated key path

        Environment variables listed in ENV_MAPPING take precedence.

        Args:
            key: Dot-separated key path (e.g., 'runtime.workers')
            default: Default value if key not found

        Returns:
            Setting value
        """
        mapping = ENV_MAPPING.get(key)
        if mapping:
            env_var, kind = mapping
            env_value = os.getenv(env_var)
            if env_value is not None and env_value != '':
                try:
                    return kind(env_value)
                except ValueError:
                    logger.warning(f"Invalid {env_var} value: {env_value}, using YAML config")

        value = self._config
        for k in key.split('.'):
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
            if value is None:
                return default
        return value

    @property
    def log_level(self) -> str:
        return str(self.get('logging.level', 'INFO')).upper()

    @property
    def log_file(self) -> Optional[str]:
        return self.get('logging.file')

    @property
    def workers(self) -> int:
        return int(self.get('runtime.workers', 1))

    @property
    def output_dir(self) -> str:
        return self.get('runtime.output_dir', 'results')

    @property
    def dense_limit(self) -> int:
        return int(self.get('solver.dense_limit', DENSE_LIMIT))


def _merge(target: Dict[str, Any], source: Dict[str, Any]) -> None:
    for key, value in source.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _merge(target[key], value)
        else:
            target[key] = value


# Global config instance
_config: Optional[Config] = None


def get_config(config_path: Optional[str] = None) -> Config:
    """
    Get global configuration instance

    Args:
        config_path: Path to config file (only used for first call)

    Returns:
        Config instance
    """
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def reload_config() -> Config:
    """Reload configuration from file"""
    global _config
    if _config is not None:
        _config.load()
    return get_config()
