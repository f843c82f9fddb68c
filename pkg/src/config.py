import logging
import os
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from src.models import Settings

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "NU_COLLAPSE_CONFIG"


def _read_yaml(path: Path) -> dict[str, Any]:
    with open(path) as f:
        cfg = yaml.safe_load(f)
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise ValueError(f"{path} must hold a flat key: value mapping")
    return cfg


def load_settings(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> Settings:
    """Compiled defaults, then the config file, then explicit overrides.

    The file comes from ``path`` or the NU_COLLAPSE_CONFIG environment
    variable (a .env file is honored). Overrides set to None are ignored.
    """
    load_dotenv()

    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    cfg: dict[str, Any] = {}
    if path:
        config_path = Path(path)
        if not config_path.is_file():
            raise ValueError(f"config file not found: {config_path}")
        cfg = _read_yaml(config_path)
        logger.debug(f"Loaded {len(cfg)} keys from {config_path}")

    cfg.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return Settings(**cfg)
