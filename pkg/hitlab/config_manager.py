import json
import os
import logging
from typing import Any, Dict, Optional

from .engine.clt_harness import ExperimentConfig
from .errors import ConfigError

CONFIG_FILE = os.path.join(os.path.expanduser("~"), ".hitlab_config.json")
CONFIG_ENV_VAR = "HITLAB_CONFIG"
logger = logging.getLogger(__name__)


def config_path() -> str:
    return os.environ.get(CONFIG_ENV_VAR) or CONFIG_FILE


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """User preferences as a dict; {} when the file is missing or unreadable."""
    path = path or config_path()
    if not os.path.exists(path):
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            cfg = json.load(f)
    except json.JSONDecodeError as e:
        logger.warning(f"Preferences file {path} is not valid JSON, using defaults: {e}")
        return {}
    except Exception as e:
        logger.error(f"Failed to read preferences from {path}: {e}")
        return {}
    if not isinstance(cfg, dict):
        logger.warning(f"Preferences file {path} is not a JSON object, using defaults")
        return {}
    return cfg


def save_config(cfg: Dict[str, Any], path: Optional[str] = None) -> None:
    """Write preferences; failures are logged, never raised."""
    path = path or config_path()
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(cfg, f, indent=2)
    except PermissionError as e:
        logger.error(f"Permission denied writing preferences to {path}: {e}")
    except Exception as e:
        logger.error(f"Failed to write preferences to {path}: {e}")


def load_experiment_config(path: str) -> ExperimentConfig:
    """Parse an experiment config file; unlike preferences, errors are raised."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    logger.debug(f"Loaded experiment config from {path}")
    return ExperimentConfig.from_dict(raw)
