"""Production entry point: ``wallspace-server --config config.json``."""

from __future__ import annotations

import argparse

import uvicorn

from .config import AppConfig
from .gateway import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wallspace-server",
        description="Collaborative wall workspace service",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--host", help="bind address override")
    parser.add_argument("--port", type=int, help="bind port override")
    args = parser.parse_args(argv)

    config = AppConfig.from_file(args.config)
    if args.host:
        config.bind_host = args.host
    if args.port:
        config.bind_port = args.port

    app = create_app(config)
    uvicorn.run(app, host=config.bind_host, port=config.bind_port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
