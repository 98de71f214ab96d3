"""Service configuration: one JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

ENV_PREFIX = "WALLSPACE_"


@dataclass
class AppConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8700
    storage_root: str = "./wallspace-data"
    upload_limit_bytes: int = 200 * 1024 * 1024
    max_cursor_rate: float = 60.0
    heartbeat_interval: float = 5.0
    heartbeat_miss_limit: int = 3
    snapshot_every_events: int = 500
    snapshot_every_seconds: float = 60.0
    token_ttl_seconds: float = 12 * 3600.0
    default_grid_cols: int = 12
    default_grid_rows: int = 12
    # physical hints for wall-display clients (a 2x12 tile wall)
    wall_pixel_width: int = 12690
    wall_pixel_height: int = 3840
    ui_dir: str | None = None
    users: list[dict] = field(default_factory=lambda: [{"name": "demo", "secret": "demo"}])

    @classmethod
    def from_file(cls, path: str | Path | None) -> "AppConfig":
        config = cls()
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            for item in fields(cls):
                if item.name in data:
                    setattr(config, item.name, data[item.name])
        config.apply_env(os.environ)
        return config

    def apply_env(self, environ) -> None:
        """WALLSPACE_BIND_PORT=9000 style overrides; users are JSON-encoded."""
        for item in fields(self):
            key = ENV_PREFIX + item.name.upper()
            if key not in environ:
                continue
            raw = environ[key]
            if item.name == "users":
                self.users = json.loads(raw)
            elif item.type in ("int", int):
                setattr(self, item.name, int(raw))
            elif item.type in ("float", float):
                setattr(self, item.name, float(raw))
            else:
                setattr(self, item.name, raw)

    def user_secrets(self) -> dict[str, str]:
        return {entry["name"]: entry["secret"] for entry in self.users}
