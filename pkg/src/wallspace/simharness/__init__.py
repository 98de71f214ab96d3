"""Headless simulated clients for scripted and randomized protocol runs.

The harness speaks only the public surfaces: the HTTP API for login, session
management and export, and the sync protocol for everything live. In-process
mode embeds the real service (HTTP through an in-process ASGI client, sync
through loopback links into the same coordinators) with a stepping clock and
deterministic id allocation, which makes whole runs byte-reproducible.
"""

from .client import SimClient
from .runner import Report, Scenario, fuzz, run_scenario
from .runtime import InProcessServer, RemoteServer, SimClock

__all__ = [
    "SimClient",
    "Scenario",
    "Report",
    "run_scenario",
    "fuzz",
    "InProcessServer",
    "RemoteServer",
    "SimClock",
]
