"""wallspace: server-authoritative collaborative workspaces for wall displays.

Core layering, bottom up: ``layout`` (pure grid geometry), ``session`` (the
replicated aggregate and its deterministic reducer), ``persistence`` (journal,
snapshots, blobs), ``sync`` (per-session coordination and the wire protocol),
``gateway`` (HTTP/WebSocket edge), ``simharness`` (headless protocol clients
for scripted and randomized verification).
"""

__version__ = "0.1.0"
