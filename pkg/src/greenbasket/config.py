"""Service configuration: flags, environment overrides, input paths.

Precedence (highest wins): environment variable, then command-line flag,
then the built-in default. Environment variables are GREENBASKET_PORT,
GREENBASKET_CATALOG, GREENBASKET_REFERENCES, GREENBASKET_GAMIFY_CONFIG and
GREENBASKET_DATA_DIR.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from greenbasket.errors import ConfigError

DEFAULT_PORT = 8765

ENV_PREFIX = "GREENBASKET_"
_ENV_KEYS = {
    "port": "PORT",
    "catalog_path": "CATALOG",
    "references_path": "REFERENCES",
    "gamify_config_path": "GAMIFY_CONFIG",
    "data_dir": "DATA_DIR",
}


@dataclass(frozen=True)
class ServiceConfig:
    catalog_path: Path
    references_path: Path
    gamify_config_path: Path
    data_dir: Path
    port: int = DEFAULT_PORT

    def __post_init__(self):
        for attr in ("catalog_path", "references_path", "gamify_config_path"):
            path = getattr(self, attr)
            if not Path(path).is_file():
                raise ConfigError(
                    f"{attr.replace('_', ' ')} does not exist: {path}", source=str(path)
                )
        if not 0 < self.port < 65536:
            raise ConfigError(f"port out of range: {self.port}")


def resolve_config(
    *,
    port: int | None = None,
    catalog: str | None = None,
    references: str | None = None,
    gamify_config: str | None = None,
    data_dir: str | None = None,
    environ: dict[str, str] | None = None,
) -> ServiceConfig:
    """Build a ServiceConfig from flags plus environment overrides."""
    env = os.environ if environ is None else environ

    def pick(name: str, flag, default=None):
        value = env.get(ENV_PREFIX + _ENV_KEYS[name])
        if value is not None:
            return value
        return flag if flag is not None else default

    raw_port = pick("port", port, DEFAULT_PORT)
    try:
        resolved_port = int(raw_port)
    except (TypeError, ValueError):
        raise ConfigError(f"port is not an integer: {raw_port!r}") from None

    missing = [
        flag for flag, value in (
            ("--catalog", pick("catalog_path", catalog)),
            ("--references", pick("references_path", references)),
            ("--gamify-config", pick("gamify_config_path", gamify_config)),
        ) if value is None
    ]
    if missing:
        raise ConfigError(f"missing required configuration: {', '.join(missing)}")

    resolved_data_dir = Path(pick("data_dir", data_dir, "."))
    resolved_data_dir.mkdir(parents=True, exist_ok=True)
    return ServiceConfig(
        catalog_path=Path(pick("catalog_path", catalog)),
        references_path=Path(pick("references_path", references)),
        gamify_config_path=Path(pick("gamify_config_path", gamify_config)),
        data_dir=resolved_data_dir,
        port=resolved_port,
    )
