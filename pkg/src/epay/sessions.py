"""Login sessions: server-issued salts, single-use submissions, expiry."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable

from . import vpass
from .limitpay import LimitPayService, NotFound
from .vpass import Digits

DEFAULT_TTL = 300.0  # seconds


class SessionClosed(Exception):
    """Submission against a session that already closed or expired."""


@dataclass
class LoginSession:
    id: str
    account_id: str
    salt: Digits
    issued_at: float
    state: str = "open"  # open | succeeded | failed | expired


class SessionStore:
    """Issues salts for an account service and judges one submission each."""

    def __init__(
        self,
        service: LimitPayService,
        rng: random.Random,
        clock: Callable[[], float] = time.time,
        ttl: float = DEFAULT_TTL,
    ):
        self.service = service
        self.rng = rng
        self.clock = clock
        self.ttl = ttl
        self.sessions: dict[str, LoginSession] = {}
        self._counter = 0

    def new_login_session(self, account_id: str) -> LoginSession:
        if account_id not in self.service.accounts:
            raise NotFound(f"no account {account_id!r}")
        account = self.service.accounts[account_id]
        self._counter += 1
        session = LoginSession(
            id=f"s{self._counter}",
            account_id=account_id,
            salt=vpass.random_digits(len(account.password), account.vfunc.z, self.rng),
            issued_at=self.clock(),
        )
        self.sessions[session.id] = session
        return session

    def _open_session(self, session_id: str) -> LoginSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFound(f"no session {session_id!r}")
        if session.state == "open" and self.clock() - session.issued_at > self.ttl:
            session.state = "expired"
        if session.state != "open":
            raise SessionClosed(f"session {session_id} is {session.state}")
        return session

    def submit_login(self, session_id: str, submitted: Digits) -> bool:
        """Judge one dynamic password; the session closes either way."""
        session = self._open_session(session_id)
        account = self.service.accounts[session.account_id]
        try:
            ok = vpass.verify(account.password, account.vfunc, session.salt, submitted)
        except ValueError:
            ok = False
        session.state = "succeeded" if ok else "failed"
        return ok

    def redeem(self, session_id: str, account_id: str, attempt):
        """Single-use challenge for an authenticated non-login operation.

        Runs ``attempt(salt)`` for an open session on the given account and
        closes the session either way: succeeded if the attempt returned,
        failed if it raised (e.g. AuthFailed from the account service).
        """
        session = self._open_session(session_id)
        if session.account_id != account_id:
            raise NotFound(f"session {session_id} is not for account {account_id!r}")
        try:
            result = attempt(session.salt)
        except Exception:
            session.state = "failed"
            raise
        session.state = "succeeded"
        return result
