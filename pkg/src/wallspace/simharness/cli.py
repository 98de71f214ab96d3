"""Command line for the simulation harness.

    simharness run --scenario scenario.json [--server URL | --in-process]
    simharness fuzz --seed 1 --steps 10000 [--in-process] [--profile mixed]
    simharness export --session ID --server URL --user name:secret

Exit code 0 means every check passed.
"""

from __future__ import annotations

import argparse
import sys

from .runner import Scenario, fuzz, run_scenario
from .runtime import RemoteServer


def _parse_credentials(raw: str | None) -> list[tuple[str, str]] | None:
    if not raw:
        return None
    pairs = []
    for chunk in raw.split(","):
        name, _, secret = chunk.partition(":")
        pairs.append((name, secret))
    return pairs


def _make_server(args) -> RemoteServer | None:
    if getattr(args, "server", None):
        return RemoteServer(args.server, _parse_credentials(args.users))
    return None  # in-process


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="simharness")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument("--server", help="base URL of a live server")
    run_p.add_argument("--in-process", action="store_true",
                       help="embed the server (default when --server absent)")
    run_p.add_argument("--users", help="credentials a:pa,b:pb for remote mode")

    fuzz_p = sub.add_parser("fuzz", help="randomized run with invariant audits")
    fuzz_p.add_argument("--seed", type=int, required=True)
    fuzz_p.add_argument("--steps", type=int, required=True)
    fuzz_p.add_argument("--clients", type=int, default=2)
    fuzz_p.add_argument("--profile", choices=("mixed", "layout"), default="mixed")
    fuzz_p.add_argument("--server", help="base URL of a live server")
    fuzz_p.add_argument("--in-process", action="store_true")
    fuzz_p.add_argument("--users", help="credentials for remote mode")

    export_p = sub.add_parser("export", help="print a session's canonical document")
    export_p.add_argument("--session", required=True)
    export_p.add_argument("--server", required=True)
    export_p.add_argument("--user", required=True, help="name:secret")

    args = parser.parse_args(argv)

    if args.command == "run":
        report = run_scenario(Scenario.from_file(args.scenario), _make_server(args))
        print(report.to_text())
        return report.exit_code()

    if args.command == "fuzz":
        report = fuzz(
            seed=args.seed,
            steps=args.steps,
            clients=args.clients,
            profile=args.profile,
            server=_make_server(args),
        )
        print(report.to_text())
        return report.exit_code()

    if args.command == "export":
        name, _, secret = args.user.partition(":")
        server = RemoteServer(args.server)
        token = server.login(name, secret)
        print(server.export(args.session, token))
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
