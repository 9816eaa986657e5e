"""Configuration management for the scheduler."""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from ..types.models import RunConfig, ServiceConfig
from .errors import InvalidParam, ParseError

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_CONFIG_PATH = DATA_DIR / "config.json"

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def get_config() -> ServiceConfig:
    """Get service configuration from environment variables."""
    return ServiceConfig(
        config_path=os.getenv("GEO_CARBON_CONFIG", str(DEFAULT_CONFIG_PATH)),
        out_dir=os.getenv("GEO_CARBON_OUT_DIR", "out"),
        log_level=os.getenv("GEO_CARBON_LOG_LEVEL", "INFO").upper(),
        port=int(os.getenv("PORT", "8000")),
    )


def validate_config(config: ServiceConfig) -> List[str]:
    """Validate service configuration and return list of errors."""
    errors: List[str] = []

    if not config.config_path:
        errors.append("Config path is required")
    elif not Path(config.config_path).is_file():
        errors.append(f"Config file not found: {config.config_path}")

    if not config.out_dir:
        errors.append("Output directory is required")

    if config.log_level not in _LOG_LEVELS:
        errors.append(f"Unknown log level: {config.log_level}")

    if not 0 < config.port < 65536:
        errors.append(f"Port out of range: {config.port}")

    return errors


def load_run_config(path: str) -> RunConfig:
    """Read a run configuration file; trace paths come back absolute."""
    config_file = Path(path)
    try:
        raw = json.loads(config_file.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidParam(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: expected a JSON object")

    base = config_file.resolve().parent
    for key in ("regions", "latency", "carbon", "workload"):
        if isinstance(raw.get(key), str):
            raw[key] = str((base / raw[key]).resolve())

    return _validated(raw, source=path)


def apply_overrides(config: RunConfig, overrides: Dict[str, Optional[Any]]) -> RunConfig:
    """Return a copy of ``config`` with non-None overrides applied and re-validated."""
    values = config.model_dump()
    values.update({key: value for key, value in overrides.items() if value is not None})
    return _validated(values, source="overrides")


def _validated(values: Dict[str, Any], source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(values)
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        )
        raise InvalidParam(f"{source}: {problems}") from None
