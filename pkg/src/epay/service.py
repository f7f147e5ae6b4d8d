"""HTTP face of the suite: accounts, login sessions, payments, and the
six-step e-cash withdrawal, all over JSON bodies (naturals in hex, amounts
in integer cents).

Authenticated account operations (limit changes, credential minting) ride
on single-use login sessions: the client opens a session, computes the
dynamic password for the session salt, and presents both.  The log stream
never contains fixed passwords, virtual-function parameters, or private
bank keys.

When a channel key is configured, every e-cash protocol message is also
appended to an encrypted transcript file (RC5-32 CBC wire records) in the
state directory, mirroring the bank-side store of exchanged values.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from datetime import date
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import ecash, limitpay, vpass, wire
from .ecash import BankKeys, SpentLedger
from .limitpay import LimitPayService, PaymentPresentation
from .sessions import SessionClosed, SessionStore

logger = logging.getLogger("epay.service")


class AppState:
    """Everything one server process owns."""

    def __init__(
        self,
        keys: BankKeys,
        rng: random.Random,
        clock: Callable[[], float] = time.time,
        state_dir: str | None = None,
        channel_key: bytes | None = None,
        z: int = 10,
        password_length: int = 6,
    ):
        journal_path = os.path.join(state_dir, "journal.jsonl") if state_dir else None
        self.keys = keys
        self.rng = rng
        self.clock = clock
        self.service = LimitPayService(
            rng=rng, clock=clock, journal_path=journal_path, z=z, password_length=password_length
        )
        self.sessions = SessionStore(self.service, rng, clock=clock)
        self.ledger = SpentLedger()
        self.withdrawals: dict[str, ecash.WithdrawalSession] = {}
        self.challenges: dict[str, int] = {}
        self.requests: dict[str, tuple[bytes, int]] = {}
        self.blinds: dict[str, int] = {}
        self.signatures: dict[str, tuple[int, int]] = {}
        self.lock = threading.RLock()
        self.channel_key = channel_key
        self.transcript_path = (
            os.path.join(state_dir, "transcript.vp1") if state_dir and channel_key else None
        )
        self._wire_counter = 0
        self._wid_counter = 0

    def next_wid(self) -> str:
        self._wid_counter += 1
        return f"w{self._wid_counter}"

    def record_wire(self, kind: str, payload: dict) -> None:
        if not self.transcript_path:
            return
        record = wire.wire_encode(kind, payload, self.channel_key, self._wire_counter)
        self._wire_counter += 1
        with open(self.transcript_path, "a", encoding="utf-8") as fh:
            fh.write(wire.dump_records([record]))


class RegisterBody(BaseModel):
    id: str
    balance_cents: int = Field(ge=0)


class SessionBody(BaseModel):
    account_id: str


class LoginBody(BaseModel):
    password: str


class LimitBody(BaseModel):
    session_id: str
    password: str
    new_limit_cents: int = Field(ge=0)


class CredentialBody(BaseModel):
    session_id: str
    password: str


class PaymentBody(BaseModel):
    account_id: str
    random_number: str
    password: str
    merchant: str
    amount_cents: int = Field(ge=1)


class WithdrawInitBody(BaseModel):
    value_cents: int = Field(ge=0)
    expiry: str


class WithdrawStepBody(BaseModel):
    wid: str


class DepositBody(BaseModel):
    coin: dict


_ERROR_STATUS = {
    limitpay.NotFound: 404,
    limitpay.Conflict: 409,
    limitpay.AuthFailed: 403,
    limitpay.InsufficientFunds: 409,
    limitpay.NoLimitSet: 409,
    limitpay.AccountFrozen: 409,
    SessionClosed: 410,
}


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="epay bank", docs_url=None, redoc_url=None)

    @app.exception_handler(Exception)
    async def _domain_errors(request: Request, exc: Exception):
        status = _ERROR_STATUS.get(type(exc))
        if status is None:
            if isinstance(exc, ValueError):
                status = 422
            else:
                raise exc
        return JSONResponse(status_code=status, content={"error": type(exc).__name__})

    def parse_digits_or_422(text: str, z: int) -> vpass.Digits:
        return vpass.parse_digits(text, z)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/accounts", status_code=201)
    def register(body: RegisterBody):
        with state.lock:
            account, secret = state.service.register_account(body.id, body.balance_cents)
        logger.info("registered account %s balance=%d", account.id, account.balance)
        return {
            "id": account.id,
            "balance_cents": account.balance,
            "limit_cents": account.limit,
            "secret": {
                "password": vpass.render_digits(secret.password, secret.vfunc.z),
                "a": secret.vfunc.a,
                "z": secret.vfunc.z,
                "variant": secret.vfunc.variant,
            },
        }

    @app.post("/sessions", status_code=201)
    def new_session(body: SessionBody):
        with state.lock:
            session = state.sessions.new_login_session(body.account_id)
        account = state.service.accounts[body.account_id]
        logger.info("session %s opened for account %s", session.id, body.account_id)
        return {
            "session_id": session.id,
            "salt": vpass.render_digits(session.salt, account.vfunc.z),
            "z": account.vfunc.z,
            "length": len(session.salt),
        }

    @app.post("/sessions/{session_id}/login")
    def login(session_id: str, body: LoginBody):
        with state.lock:
            session = state.sessions.sessions.get(session_id)
            if session is None:
                raise limitpay.NotFound(session_id)
            account = state.service.accounts[session.account_id]
            try:
                submitted = parse_digits_or_422(body.password, account.vfunc.z)
            except ValueError:
                submitted = ()
            ok = state.sessions.submit_login(session_id, submitted)
        logger.info("session %s login result=%s", session_id, "succeeded" if ok else "failed")
        return {"result": "succeeded" if ok else "failed"}

    @app.post("/accounts/{account_id}/limit")
    def set_limit(account_id: str, body: LimitBody):
        with state.lock:
            account = state.service._account(account_id)
            password = parse_digits_or_422(body.password, account.vfunc.z)
            updated = state.sessions.redeem(
                body.session_id,
                account_id,
                lambda salt: state.service.set_limit(
                    account_id, salt, password, body.new_limit_cents
                ),
            )
        logger.info("account %s limit set to %d", account_id, updated.limit)
        return {"id": account_id, "limit_cents": updated.limit}

    @app.post("/accounts/{account_id}/credentials", status_code=201)
    def issue_credential(account_id: str, body: CredentialBody):
        with state.lock:
            account = state.service._account(account_id)
            password = parse_digits_or_422(body.password, account.vfunc.z)
            credential = state.sessions.redeem(
                body.session_id,
                account_id,
                lambda salt: state.service.issue_temp_credential(account_id, salt, password),
            )
        logger.info("account %s issued credential %s", account_id, credential.id)
        return {
            "account_id": account_id,
            "random_number": vpass.render_digits(credential.random_number, account.vfunc.z),
            "temp_password": vpass.render_digits(credential.temp_password, account.vfunc.z),
            "allowance_cents": credential.allowance,
            "expires": credential.expires,
        }

    @app.post("/payments")
    def pay(body: PaymentBody):
        with state.lock:
            account = state.service.accounts.get(body.account_id)
            z = account.vfunc.z if account else 10
            try:
                random_number = parse_digits_or_422(body.random_number, z)
                password = parse_digits_or_422(body.password, z)
            except ValueError:
                random_number, password = (), ()
            presentation = PaymentPresentation(
                account_id=body.account_id,
                random_number=random_number,
                temp_password=password,
            )
            decision = state.service.authorize_payment(
                presentation, body.merchant, body.amount_cents
            )
        logger.info(
            "payment account=%s merchant=%s amount=%d outcome=%s",
            body.account_id,
            body.merchant,
            body.amount_cents,
            "approved" if decision.approved else f"declined:{decision.reason}",
        )
        if decision.approved:
            return {"outcome": "approved", "remaining_cents": decision.remaining}
        return {"outcome": "declined", "reason": decision.reason}

    # -- e-cash withdrawal (server hosts both roles for the demo) ----------

    @app.post("/ecash/withdraw/init", status_code=201)
    def withdraw_init(body: WithdrawInitBody):
        with state.lock:
            attrs = ecash.random_attributes(
                date.fromisoformat(body.expiry), body.value_cents, state.rng
            )
            session, (b_encoding, a_msg) = ecash.user_withdraw_init(
                state.keys.public, attrs, state.rng
            )
            wid = state.next_wid()
            state.withdrawals[wid] = session
            state.requests[wid] = (b_encoding, a_msg)
            payload = {
                "wid": wid,
                "b": b_encoding.decode(),
                "a_msg": ecash.nat_to_hex(a_msg),
            }
            state.record_wire("withdraw-init", payload)
        logger.info("withdrawal %s opened value=%d", wid, body.value_cents)
        return payload

    def _withdrawal(wid: str) -> ecash.WithdrawalSession:
        session = state.withdrawals.get(wid)
        if session is None:
            raise limitpay.NotFound(f"no withdrawal {wid!r}")
        return session

    @app.post("/ecash/withdraw/challenge")
    def withdraw_challenge(body: WithdrawStepBody):
        with state.lock:
            _withdrawal(body.wid)
            x1 = ecash.bank_challenge(state.keys, state.rng)
            state.challenges[body.wid] = x1
            payload = {"wid": body.wid, "x1": ecash.nat_to_hex(x1)}
            state.record_wire("withdraw-challenge", payload)
        return payload

    @app.post("/ecash/withdraw/blind")
    def withdraw_blind(body: WithdrawStepBody):
        with state.lock:
            session = _withdrawal(body.wid)
            if body.wid not in state.challenges:
                raise ValueError("challenge step not done")
            beta = ecash.user_blind(session, state.challenges[body.wid], state.rng)
            state.blinds[body.wid] = beta
            payload = {"wid": body.wid, "beta": ecash.nat_to_hex(beta)}
            state.record_wire("withdraw-blind", payload)
        return payload

    @app.post("/ecash/withdraw/sign")
    def withdraw_sign(body: WithdrawStepBody):
        with state.lock:
            _withdrawal(body.wid)
            b_encoding, a_msg = state.requests[body.wid]
            beta = state.blinds.get(body.wid)
            if beta is None:
                raise ValueError("blind step not done")
            beta_inv, t1 = ecash.bank_sign(
                state.keys, b_encoding, a_msg, beta, state.challenges[body.wid]
            )
            state.signatures[body.wid] = (beta_inv, t1)
            payload = {
                "wid": body.wid,
                "beta_inv": ecash.nat_to_hex(beta_inv),
                "t1": ecash.nat_to_hex(t1),
            }
            state.record_wire("withdraw-sign", payload)
        return payload

    @app.post("/ecash/withdraw/unblind")
    def withdraw_unblind(body: WithdrawStepBody):
        with state.lock:
            session = _withdrawal(body.wid)
            signature = state.signatures.get(body.wid)
            if signature is None:
                raise ValueError("sign step not done")
            coin = ecash.user_unblind(session, *signature)
            payload = {"wid": body.wid, "coin": ecash.coin_to_dict(coin)}
            state.record_wire("withdraw-unblind", payload)
        logger.info("withdrawal %s unblinded", body.wid)
        return payload

    @app.post("/ecash/deposit")
    def deposit(body: DepositBody):
        with state.lock:
            coin = ecash.coin_from_dict(body.coin)
            result = ecash.deposit_coin(
                state.ledger, state.keys.public, coin, date.fromtimestamp(state.clock())
            )
        logger.info(
            "deposit serial=%s accepted=%s reason=%s",
            coin.attributes.serial,
            result.accepted,
            result.reason,
        )
        return {"accepted": result.accepted, "reason": result.reason}

    return app


def serve(
    port: int,
    state_dir: str | None,
    channel_key: bytes | None,
    bits: int = 512,
    seed: int | None = None,
    static_dir: str | None = None,
) -> None:
    """Entry point for ``epay serve``: build state, mount the UI, run uvicorn."""
    import uvicorn
    from fastapi.staticfiles import StaticFiles

    rng = random.Random(seed)
    keys = _load_or_create_keys(state_dir, bits, rng)
    if state_dir:
        os.makedirs(state_dir, exist_ok=True)
    state = AppState(keys=keys, rng=rng, state_dir=state_dir, channel_key=channel_key)
    app = create_app(state)
    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


def _load_or_create_keys(state_dir: str | None, bits: int, rng: random.Random) -> BankKeys:
    import json

    if state_dir:
        os.makedirs(state_dir, exist_ok=True)
        path = os.path.join(state_dir, "bank.json")
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                return ecash.bank_keys_from_dict(json.load(fh))
        keys = ecash.bank_keygen(bits, rng)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(ecash.bank_keys_to_dict(keys), fh)
        return keys
    return ecash.bank_keygen(bits, rng)
