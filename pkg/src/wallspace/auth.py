"""Token-stub authentication over a configured user list.

The identity provider is intentionally minimal: names and shared secrets from
the config file, bearer tokens with an expiry. Anything smarter (LDAP, SSO)
can replace this class as long as ``login`` and ``resolve`` keep their shape.
"""

from __future__ import annotations

import secrets
import time
from typing import Callable


class TokenAuthenticator:
    def __init__(
        self,
        users: dict[str, str],
        ttl_seconds: float = 12 * 3600.0,
        clock: Callable[[], float] | None = None,
        deterministic: bool = False,
    ):
        self.users = dict(users)
        self.ttl = ttl_seconds
        self.clock = clock or time.time
        self.deterministic = deterministic
        self._tokens: dict[str, tuple[str, float]] = {}  # token -> (name, expiry)
        self._counter = 0

    def login(self, name: str, secret: str) -> str | None:
        if self.users.get(name) != secret:
            return None
        self._counter += 1
        token = f"tok-{self._counter}" if self.deterministic else secrets.token_hex(16)
        self._tokens[token] = (name, self.clock() + self.ttl)
        return token

    def resolve(self, token: str) -> str | None:
        entry = self._tokens.get(token)
        if entry is None:
            return None
        name, expiry = entry
        if self.clock() >= expiry:
            self._tokens.pop(token, None)  # expired tokens are rejected everywhere
            return None
        return name
