"""
Configuration Manager for CMS-Wheat.
Loads JSON configuration files with ${ENV_VAR} substitution.
"""
import json
import logging
import os
import re
from typing import Any, Dict, Optional

import psutil

from core.base_module import BaseModule
from core.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "CMSW_CONFIG"
THREADS_ENV_VAR = "CMSW_THREADS"
DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "cms_wheat_config.json",
)

_ENV_PATTERN = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _substitute_env(value: Any) -> Any:
    """Replace ${VAR} placeholders in strings, recursively."""
    if isinstance(value, str):
        match = _ENV_PATTERN.fullmatch(value.strip())
        if match:
            return os.environ.get(match.group(1), "")
        return _ENV_PATTERN.sub(lambda m: os.environ.get(m.group(1), ""), value)
    if isinstance(value, dict):
        return {k: _substitute_env(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_substitute_env(v) for v in value]
    return value


def load_json_document(path: str) -> Dict[str, Any]:
    """
    Read a JSON document and resolve environment placeholders.

    Args:
        path: Path to the JSON file

    Returns:
        Dict with the parsed document

    Raises:
        ConfigError: If the file is missing, unreadable or not a JSON object
    """
    if not os.path.isfile(path):
        raise ConfigError("file not found", source=path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", source=path, line=e.lineno) from e
    if not isinstance(document, dict):
        raise ConfigError("top level must be a JSON object", source=path)
    return _substitute_env(document)


def resolve_thread_count(configured: Optional[int] = None) -> int:
    """
    Number of worker processes for parallel evaluations.

    ``CMSW_THREADS`` takes precedence over the configured value; the result
    is capped by the machine's logical CPU count and is at least 1.
    """
    requested = configured or 1
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value:
        try:
            requested = int(env_value)
        except ValueError:
            raise ConfigError(f"expected an integer, got {env_value!r}", field=THREADS_ENV_VAR)
    cpus = psutil.cpu_count(logical=True) or 1
    return max(1, min(requested, cpus))


class ConfigManager(BaseModule):
    """Holds the active configuration document."""

    def __init__(self):
        super().__init__("ConfigManager")
        self.config: Dict[str, Any] = {}
        self.config_path: Optional[str] = None

    def load(self, config_path: Optional[str] = None) -> bool:
        """
        Load configuration from a JSON file.

        Args:
            config_path: Path to the file; falls back to $CMSW_CONFIG and
                then to the bundled default

        Returns:
            bool: True if the configuration was loaded
        """
        path = config_path or os.environ.get(CONFIG_ENV_VAR) or DEFAULT_CONFIG_PATH
        try:
            self.config = load_json_document(path)
        except ConfigError as e:
            self.logger.error(f"Failed to load configuration: {str(e)}")
            return False
        self.config_path = path
        self.logger.info(f"Loaded configuration from {path}")
        return True

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a value by dotted key, e.g. ``"logging.level"``.
        """
        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def section(self, name: str) -> Dict[str, Any]:
        value = self.config.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError("section must be an object", source=self.config_path, field=name)
        return dict(value)

    def thread_count(self) -> int:
        return resolve_thread_count(self.get("runtime.threads"))


config_manager = ConfigManager()
