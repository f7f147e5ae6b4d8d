"""Limit-bounded account service.

An account holds a real secret (fixed password + virtual function) that is
never presented to merchants.  The owner authenticates with it to set a
spending limit and to mint temporary credentials: (random number, temporary
password) pairs whose allowance snapshots the limit at issuance.  Payments
are authorized only against temporary credentials, so compromising one caps
the loss at the limit in force when it was issued.

Every mutation is journaled; replaying the journal reconstructs the exact
service state.  Journal files are JSON lines {seq, ts, kind, payload} with
strictly increasing seq starting at 1.  Snapshot exports start with the
format header line "LPAY1".
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import vpass
from .vpass import Digits, VirtualFunction

SNAPSHOT_HEADER = "LPAY1"

DECLINE_UNKNOWN = "UnknownCredential"
DECLINE_EXPIRED = "Expired"
DECLINE_REVOKED = "Revoked"
DECLINE_OVER_LIMIT = "OverLimit"
DECLINE_INSUFFICIENT = "InsufficientFunds"


class Conflict(Exception):
    """Account id already registered."""


class AuthFailed(Exception):
    """Real-credential verification failed (default deny, journaled)."""


class InsufficientFunds(Exception):
    """Requested limit exceeds the account balance."""


class NoLimitSet(Exception):
    """Credential issuance needs a positive limit."""


class AccountFrozen(Exception):
    """Issuance attempted on a frozen account."""


class NotFound(Exception):
    """Unknown account or credential id."""


class JournalCorrupt(Exception):
    """Sequence gap or non-monotone seq; carries the offending record index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"record {index}: {message}")
        self.index = index


@dataclass
class Account:
    id: str
    password: Digits
    vfunc: VirtualFunction
    balance: int
    limit: int = 0
    status: str = "active"
    credentials: dict[str, "TempCredential"] = field(default_factory=dict)


@dataclass
class TempCredential:
    """A throwaway payment credential; allowance fixed at issuance.

    ``state`` stores one-way transitions active -> exhausted | revoked.
    Expiry is judged against the clock at authorization time rather than
    stored as a transition, so ``effective_state`` reports "expired" once
    the deadline passes.
    """

    account_id: str
    random_number: Digits
    temp_password: Digits
    allowance: int
    remaining: int
    expires: float
    state: str = "active"

    @property
    def id(self) -> str:
        return vpass.render_digits(self.random_number, 16)

    def effective_state(self, now: float) -> str:
        if self.state == "active" and now > self.expires:
            return "expired"
        return self.state


@dataclass(frozen=True)
class PaymentRecord:
    credential_id: str
    merchant: str
    amount: int
    ts: float
    outcome: str
    reason: str | None = None


@dataclass(frozen=True)
class PaymentPresentation:
    """What a merchant forwards: no real secrets, only the temp credential."""

    account_id: str
    random_number: Digits
    temp_password: Digits


@dataclass(frozen=True)
class PaymentDecision:
    approved: bool
    reason: str | None = None
    remaining: int | None = None


@dataclass(frozen=True)
class SecretCode:
    """The registration secret handed to the user once."""

    password: Digits
    vfunc: VirtualFunction


class Journal:
    """Append-only event log, optionally mirrored to a JSON-lines file."""

    def __init__(self, path: str | None = None):
        self.records: list[dict] = []
        self.path = path
        self._next_seq = 1
        self._fh = open(path, "a", encoding="utf-8") if path else None

    def append(self, kind: str, payload: dict, ts: float) -> dict:
        record = {"seq": self._next_seq, "ts": ts, "kind": kind, "payload": payload}
        self._next_seq += 1
        self.records.append(record)
        if self._fh:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._fh.flush()
        return record

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None


class LimitPayService:
    """The bank-side account service; all mutations run under one lock."""

    def __init__(
        self,
        rng: random.Random,
        clock: Callable[[], float] = time.time,
        journal_path: str | None = None,
        z: int = 10,
        password_length: int = 6,
        credential_ttl: float = 24 * 3600.0,
    ):
        self.rng = rng
        self.clock = clock
        self.z = z
        self.password_length = password_length
        self.credential_ttl = credential_ttl
        self.accounts: dict[str, Account] = {}
        self.payments: list[PaymentRecord] = []
        self.journal = Journal(journal_path)
        self._lock = threading.RLock()

    # -- helpers -----------------------------------------------------------

    def _account(self, account_id: str) -> Account:
        try:
            return self.accounts[account_id]
        except KeyError:
            raise NotFound(f"no account {account_id!r}") from None

    def _require_auth(self, account: Account, salt: Digits, password: Digits, op: str) -> None:
        try:
            ok = vpass.verify(account.password, account.vfunc, salt, password)
        except ValueError:
            ok = False
        if not ok:
            self.journal.append(
                "auth-failure", {"account_id": account.id, "op": op}, self.clock()
            )
            raise AuthFailed(f"{op}: dynamic password rejected")

    # -- operations --------------------------------------------------------

    def register_account(self, account_id: str, initial_balance: int) -> tuple[Account, SecretCode]:
        """Create an account and mint its secret code (password + function).

        The limit starts at 0: nothing can be spent until the owner sets one.
        """
        if initial_balance < 0:
            raise ValueError("initial balance must be non-negative")
        with self._lock:
            if account_id in self.accounts:
                raise Conflict(f"account {account_id!r} exists")
            password = vpass.random_digits(self.password_length, self.z, self.rng)
            vfunc = VirtualFunction(a=vpass.random_unit(self.z, self.rng), z=self.z)
            account = Account(id=account_id, password=password, vfunc=vfunc, balance=initial_balance)
            self.accounts[account_id] = account
            self.journal.append(
                "register",
                {
                    "account_id": account_id,
                    "balance": initial_balance,
                    "password": vpass.render_digits(password, self.z),
                    "a": vfunc.a,
                    "z": vfunc.z,
                },
                self.clock(),
            )
            return account, SecretCode(password=password, vfunc=vfunc)

    def set_limit(self, account_id: str, auth_salt: Digits, auth_password: Digits, new_limit: int) -> Account:
        """Owner-authenticated limit change; capped by the current balance.

        Already-issued credentials keep the allowance they were minted with.
        """
        if new_limit < 0:
            raise ValueError("limit must be non-negative")
        with self._lock:
            account = self._account(account_id)
            self._require_auth(account, auth_salt, auth_password, "set-limit")
            if new_limit > account.balance:
                raise InsufficientFunds(f"limit {new_limit} exceeds balance {account.balance}")
            account.limit = new_limit
            self.journal.append(
                "limit-change", {"account_id": account_id, "new_limit": new_limit}, self.clock()
            )
            return account

    def issue_temp_credential(self, account_id: str, auth_salt: Digits, auth_password: Digits) -> TempCredential:
        """Mint a (random number, temp password) pair good for the current limit."""
        with self._lock:
            account = self._account(account_id)
            if account.status != "active":
                raise AccountFrozen(f"account {account_id!r} is frozen")
            self._require_auth(account, auth_salt, auth_password, "issue-credential")
            if account.limit <= 0:
                raise NoLimitSet("set a positive limit before issuing credentials")
            while True:
                salt = vpass.random_digits(self.password_length, self.z, self.rng)
                if vpass.render_digits(salt, self.z) not in account.credentials:
                    break
            c = self.rng.randrange(self.z)
            temp_password = vpass.derive_eq2(account.password, salt, account.vfunc, c)
            now = self.clock()
            credential = TempCredential(
                account_id=account_id,
                random_number=salt,
                temp_password=temp_password,
                allowance=account.limit,
                remaining=account.limit,
                expires=now + self.credential_ttl,
            )
            account.credentials[credential.id] = credential
            self.journal.append(
                "issue",
                {
                    "account_id": account_id,
                    "random_number": vpass.render_digits(salt, self.z),
                    "temp_password": vpass.render_digits(temp_password, self.z),
                    "allowance": credential.allowance,
                    "expires": credential.expires,
                },
                now,
            )
            return credential

    def authorize_payment(
        self, presentation: PaymentPresentation, merchant: str, amount: int
    ) -> PaymentDecision:
        """The hostile boundary: approve or decline a merchant charge.

        Approves iff the presented pair matches an active, unexpired
        credential, amount <= remaining, and amount <= balance; then
        decrements both atomically.  Every attempt is journaled.
        """
        if amount < 1:
            raise ValueError("amount must be at least 1 cent")
        # the secrets consulted here are fixed at registration/issuance, so
        # the pure password check runs outside the critical section
        account = self.accounts.get(presentation.account_id)
        credential = None
        if account is not None:
            try:
                key = vpass.render_digits(presentation.random_number, 16)
            except ValueError:
                key = ""
            credential = account.credentials.get(key)
        verified = False
        if account is not None and credential is not None:
            try:
                verified = vpass.verify(
                    account.password,
                    account.vfunc,
                    credential.random_number,
                    presentation.temp_password,
                )
            except ValueError:
                verified = False
        with self._lock:
            now = self.clock()
            reason = None
            if account is None or credential is None or not verified:
                reason = DECLINE_UNKNOWN
            elif credential.state == "revoked":
                reason = DECLINE_REVOKED
            elif credential.effective_state(now) == "expired":
                reason = DECLINE_EXPIRED
            elif amount > credential.remaining:
                reason = DECLINE_OVER_LIMIT
            elif amount > account.balance:
                reason = DECLINE_INSUFFICIENT

            if reason is None:
                credential.remaining -= amount
                account.balance -= amount
                if credential.remaining == 0:
                    credential.state = "exhausted"
                decision = PaymentDecision(True, remaining=credential.remaining)
                outcome = "approved"
            else:
                decision = PaymentDecision(False, reason=reason)
                outcome = "declined"

            credential_id = credential.id if credential else "?"
            self.payments.append(
                PaymentRecord(credential_id, merchant, amount, now, outcome, reason)
            )
            self.journal.append(
                "payment",
                {
                    "account_id": presentation.account_id,
                    "random_number": credential_id,
                    "merchant": merchant,
                    "amount": amount,
                    "outcome": outcome,
                    "reason": reason,
                },
                now,
            )
            return decision

    def revoke_credential(
        self, account_id: str, auth_salt: Digits, auth_password: Digits, credential_id: str
    ) -> TempCredential:
        """Owner-authenticated kill switch for one credential."""
        with self._lock:
            account = self._account(account_id)
            self._require_auth(account, auth_salt, auth_password, "revoke-credential")
            credential = account.credentials.get(credential_id)
            if credential is None:
                raise NotFound(f"no credential {credential_id!r} on {account_id!r}")
            if credential.state == "active":
                credential.state = "revoked"
            self.journal.append(
                "revoke", {"account_id": account_id, "random_number": credential_id}, self.clock()
            )
            return credential

    def set_account_status(self, account_id: str, status: str) -> Account:
        """Administrative freeze/unfreeze (bank side, no customer auth)."""
        if status not in ("active", "frozen"):
            raise ValueError(f"status must be active or frozen, got {status!r}")
        with self._lock:
            account = self._account(account_id)
            account.status = status
            self.journal.append(
                "status-change", {"account_id": account_id, "status": status}, self.clock()
            )
            return account

    # -- state export ------------------------------------------------------

    def state_snapshot(self) -> dict:
        """Structural dump of all durable state (used for replay equality)."""
        accounts = {}
        for account in self.accounts.values():
            accounts[account.id] = {
                "password": vpass.render_digits(account.password, self.z),
                "a": account.vfunc.a,
                "z": account.vfunc.z,
                "balance": account.balance,
                "limit": account.limit,
                "status": account.status,
                "credentials": {
                    cid: {
                        "temp_password": vpass.render_digits(cred.temp_password, self.z),
                        "allowance": cred.allowance,
                        "remaining": cred.remaining,
                        "expires": cred.expires,
                        "state": cred.state,
                    }
                    for cid, cred in sorted(account.credentials.items())
                },
            }
        return {
            "format": SNAPSHOT_HEADER,
            "z": self.z,
            "password_length": self.password_length,
            "accounts": accounts,
            "next_seq": self.journal._next_seq,
        }

    def save_snapshot(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(SNAPSHOT_HEADER + "\n")
            json.dump(self.state_snapshot(), fh, sort_keys=True)
            fh.write("\n")


def load_snapshot(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != SNAPSHOT_HEADER:
            raise ValueError(f"bad snapshot header {header!r}")
        return json.load(fh)


# ---------------------------------------------------------------------------
# journal replay
# ---------------------------------------------------------------------------

def _apply_record(service: LimitPayService, record: dict) -> None:
    kind = record["kind"]
    payload = record["payload"]
    z = service.z
    if kind == "register":
        password = vpass.parse_digits(payload["password"], z)
        account = Account(
            id=payload["account_id"],
            password=password,
            vfunc=VirtualFunction(a=payload["a"], z=payload["z"]),
            balance=payload["balance"],
        )
        service.accounts[account.id] = account
    elif kind == "limit-change":
        service.accounts[payload["account_id"]].limit = payload["new_limit"]
    elif kind == "issue":
        account = service.accounts[payload["account_id"]]
        salt = vpass.parse_digits(payload["random_number"], z)
        credential = TempCredential(
            account_id=account.id,
            random_number=salt,
            temp_password=vpass.parse_digits(payload["temp_password"], z),
            allowance=payload["allowance"],
            remaining=payload["allowance"],
            expires=payload["expires"],
        )
        account.credentials[credential.id] = credential
    elif kind == "payment":
        if payload["outcome"] == "approved":
            account = service.accounts[payload["account_id"]]
            credential = account.credentials[payload["random_number"]]
            credential.remaining -= payload["amount"]
            account.balance -= payload["amount"]
            if credential.remaining == 0:
                credential.state = "exhausted"
        service.payments.append(
            PaymentRecord(
                payload["random_number"],
                payload["merchant"],
                payload["amount"],
                record["ts"],
                payload["outcome"],
                payload["reason"],
            )
        )
    elif kind == "revoke":
        account = service.accounts[payload["account_id"]]
        credential = account.credentials[payload["random_number"]]
        if credential.state == "active":
            credential.state = "revoked"
    elif kind == "status-change":
        service.accounts[payload["account_id"]].status = payload["status"]
    elif kind == "auth-failure":
        pass
    else:
        raise ValueError(f"unknown journal record kind {kind!r}")


def journal_replay(
    source: str | Iterable[dict], z: int = 10, password_length: int = 6
) -> LimitPayService:
    """Rebuild a service from a journal file (or iterable of records).

    Sequence numbers must be exactly 1, 2, 3, ...; a gap or regression
    raises :class:`JournalCorrupt` with the offending record index.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    else:
        records = list(source)
    service = LimitPayService(rng=random.Random(), z=z, password_length=password_length)
    expected = 1
    for index, record in enumerate(records):
        if record["seq"] != expected:
            raise JournalCorrupt(index, f"expected seq {expected}, found {record['seq']}")
        expected += 1
        _apply_record(service, record)
        service.journal.records.append(record)
    service.journal._next_seq = expected
    return service


def open_service(
    journal_path: str, rng: random.Random, z: int = 10, password_length: int = 6
) -> LimitPayService:
    """Open a journal-backed service: replay the file if present, then keep
    appending to it."""
    if os.path.exists(journal_path):
        service = journal_replay(journal_path, z=z, password_length=password_length)
        service.rng = rng
        service.journal.path = journal_path
        service.journal._fh = open(journal_path, "a", encoding="utf-8")
        return service
    return LimitPayService(rng=rng, journal_path=journal_path, z=z, password_length=password_length)
