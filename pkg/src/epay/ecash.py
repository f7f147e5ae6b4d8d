"""Blind-signature e-cash: bank keygen, the six-step withdrawal exchange,
coin verification, and double-spend detection at deposit.

Protocol outline (all arithmetic mod the bank modulus n; the bank reduces
its own exponents mod theta = (p-1)(q-1) since it holds the factors):

  1. bank:  keys (p, q, n, theta, e, w) with e*w = 1 mod theta
  2. user:  picks units r, u and seed x0; sends b (coin attributes) and
            a_msg = r^e * h(x0) * (u^2 + 1) mod n
  3. bank:  sends a challenge x1 in [1, n)
  4. user:  picks unit r1; b2 = r*r1; sends beta = b2^e * (u - x1) mod n
  5. bank:  sends beta^{-1} and t1 = h(b)^w * (a_msg*(x1^2+1)*beta^{-2})^{2w} mod n
  6. user:  c1 = (u*x1 + 1)*beta^{-1}*b2^e mod n   (= (u*x1+1)*(u-x1)^{-1})
            s1 = t1 * r^2 * r1^4 mod n

The coin (b, h(x0), c1, s1) then satisfies

    s1^e = h(b) * (h(x0) * (c1^2 + 1))^2   (mod n)

because (u^2+1)*(x1^2+1) = (u*x1+1)^2 + (u-x1)^2 as exact integers, so the
bank's step-5 base collapses to r^{-e} * r1^{-2e} * h(x0) * (c1^2 + 1), and
the user's step-6 factors cancel the remaining blinding.  The deposit check
uses exactly this identity; the bank never sees c1 or s1 during withdrawal.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from datetime import date

from .numcrypt import (
    NotInvertible,
    gen_prime,
    hash_to_int,
    mod_exp,
    mod_inv,
    nat_from_hex,
    nat_to_hex,
    rand_unit,
)

SERIAL_HEX_LEN = 32


class DegenerateChallenge(Exception):
    """The challenge collided with the user's u; restart the protocol."""


class ModulusCompromised(Exception):
    """A nontrivial gcd with the bank modulus surfaced; the key is factored."""


class BankSignatureInvalid(Exception):
    """The freshly unblinded coin failed verification; protocol abort."""


class ProtocolStateError(Exception):
    """Withdrawal steps were called out of order."""


@dataclass(frozen=True)
class BankPublicKey:
    e: int
    n: int


@dataclass(frozen=True)
class BankKeys:
    """Bank signing material; (e, n) is public, the rest secret."""

    p: int
    q: int
    n: int
    theta: int
    e: int
    w: int

    @property
    def public(self) -> BankPublicKey:
        return BankPublicKey(self.e, self.n)


@dataclass(frozen=True)
class CoinAttributes:
    """Public coin attributes, canonically encoded for hashing.

    The encoding is the ASCII string "EC1|<iso expiry>|<value cents>|<serial>".
    """

    expiry: date
    value: int
    serial: str

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("coin value must be non-negative")
        if len(self.serial) != SERIAL_HEX_LEN or any(
            ch not in "0123456789abcdef" for ch in self.serial
        ):
            raise ValueError(f"serial must be {SERIAL_HEX_LEN} lowercase hex chars")

    def encode(self) -> bytes:
        return f"EC1|{self.expiry.isoformat()}|{self.value}|{self.serial}".encode()


def random_attributes(expiry: date, value: int, rng: random.Random) -> CoinAttributes:
    return CoinAttributes(expiry, value, rng.getrandbits(128).to_bytes(16, "big").hex())


@dataclass
class WithdrawalSession:
    """User-side state of one withdrawal, advancing init -> blinded -> done."""

    public: BankPublicKey
    attributes: CoinAttributes
    r: int
    u: int
    x0: bytes
    a_msg: int = 0
    r1: int = 0
    x1: int = 0
    b2: int = 0
    stage: str = field(default="new")


@dataclass(frozen=True)
class Coin:
    """An unblinded bank-signed token: attributes plus (h(x0), c1, s1)."""

    attributes: CoinAttributes
    h_x0: int
    c1: int
    s1: int


def coin_id(coin: Coin) -> str:
    """Ledger identifier: SHA-256 of the attribute encoding || hex(c1)."""
    return hashlib.sha256(coin.attributes.encode() + nat_to_hex(coin.c1).encode()).hexdigest()


class SpentLedger:
    """Append-only set of spent coin identifiers."""

    def __init__(self, entries: set[str] | None = None):
        self.entries: set[str] = set(entries or ())

    def __contains__(self, identifier: str) -> bool:
        return identifier in self.entries

    def add(self, identifier: str) -> None:
        self.entries.add(identifier)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DepositResult:
    accepted: bool
    reason: str | None = None


REJECT_INVALID_SIGNATURE = "InvalidSignature"
REJECT_EXPIRED = "Expired"
REJECT_DOUBLE_SPEND = "DoubleSpend"


# ---------------------------------------------------------------------------
# protocol steps
# ---------------------------------------------------------------------------

def bank_keys_from_primes(p: int, q: int) -> BankKeys:
    """Assemble keys from chosen primes (test hook; keygen samples its own)."""
    if p == q:
        raise ValueError("primes must differ")
    n = p * q
    theta = (p - 1) * (q - 1)
    e = 3
    while math.gcd(e, theta) != 1:
        e += 2
    w = mod_inv(e, theta)
    return BankKeys(p=p, q=q, n=n, theta=theta, e=e, w=w)


def bank_keygen(bits: int, rng: random.Random) -> BankKeys:
    """Generate bank keys from two distinct ``bits``-bit primes.

    The public exponent is the smallest odd e >= 3 coprime to theta.
    """
    if bits < 8:
        raise ValueError(f"need at least 8 bits per prime, got {bits}")
    p = gen_prime(bits, rng)
    q = gen_prime(bits, rng)
    while q == p:
        q = gen_prime(bits, rng)
    return bank_keys_from_primes(p, q)


def compute_blinded_request(session: WithdrawalSession) -> int:
    """Step 2 value a_msg = r^e * h(x0) * (u^2 + 1) mod n; stored on the session."""
    e, n = session.public.e, session.public.n
    a_msg = (
        mod_exp(session.r, e, n)
        * hash_to_int(session.x0, n)
        % n
        * (session.u * session.u + 1)
        % n
    )
    session.a_msg = a_msg
    session.stage = "initialized"
    return a_msg


def user_withdraw_init(
    public: BankPublicKey, attrs: CoinAttributes, rng: random.Random
) -> tuple[WithdrawalSession, tuple[bytes, int]]:
    """Step 2: open a withdrawal, returning (session, message to the bank)."""
    r = rand_unit(public.n, rng)
    u = rand_unit(public.n, rng)
    x0 = rng.getrandbits(256).to_bytes(32, "big")
    session = WithdrawalSession(public=public, attributes=attrs, r=r, u=u, x0=x0)
    a_msg = compute_blinded_request(session)
    return session, (attrs.encode(), a_msg)


def bank_challenge(keys: BankKeys, rng: random.Random) -> int:
    """Step 3: a uniform challenge x1 in [1, n)."""
    return rng.randrange(1, keys.n)


def user_blind(session: WithdrawalSession, x1: int, rng: random.Random) -> int:
    """Step 4: fold in the challenge and return beta = b2^e * (u - x1) mod n."""
    if session.stage != "initialized":
        raise ProtocolStateError(f"user_blind in stage {session.stage!r}")
    n, e = session.public.n, session.public.e
    diff = (session.u - x1) % n
    if diff == 0:
        raise DegenerateChallenge("challenge equals u; restart the withdrawal")
    g = math.gcd(diff, n)
    if g != 1:
        raise ModulusCompromised(f"gcd(u - x1, n) = {g}")
    session.r1 = rand_unit(n, rng)
    session.x1 = x1
    session.b2 = session.r * session.r1 % n
    session.stage = "blinded"
    return mod_exp(session.b2, e, n) * diff % n


def bank_sign(
    keys: BankKeys, b_encoding: bytes, a_msg: int, beta: int, x1: int
) -> tuple[int, int]:
    """Step 5: return (beta^{-1}, t1 = h(b)^w * (a_msg*(x1^2+1)*beta^{-2})^{2w}).

    The challenge x1 is the one the bank issued in step 3 for this
    withdrawal.  Exponents reduce mod theta on the bank side.
    """
    n, w, theta = keys.n, keys.w, keys.theta
    try:
        beta_inv = mod_inv(beta, n)
    except NotInvertible as exc:
        raise ModulusCompromised(f"gcd(beta, n) = {exc.gcd}") from exc
    h_b = hash_to_int(b_encoding, n)
    inner = a_msg % n * ((x1 * x1 + 1) % n) % n * beta_inv % n * beta_inv % n
    t1 = mod_exp(h_b, w, n) * mod_exp(inner, 2 * w % theta, n) % n
    return beta_inv, t1


def user_unblind(session: WithdrawalSession, beta_inv: int, t1: int) -> Coin:
    """Step 6: strip the blinding and assemble the coin.

    The coin is verified before being returned; a bad t1 raises
    :class:`BankSignatureInvalid`.
    """
    if session.stage != "blinded":
        raise ProtocolStateError(f"user_unblind in stage {session.stage!r}")
    n, e = session.public.n, session.public.e
    c1 = (session.u * session.x1 + 1) % n * beta_inv % n * mod_exp(session.b2, e, n) % n
    s1 = t1 * (session.r * session.r % n) % n * mod_exp(session.r1, 4, n) % n
    coin = Coin(
        attributes=session.attributes,
        h_x0=hash_to_int(session.x0, n),
        c1=c1,
        s1=s1,
    )
    if not verify_coin(session.public, coin):
        raise BankSignatureInvalid("unblinded coin failed verification")
    session.stage = "done"
    return coin


def verify_coin(public: BankPublicKey, coin: Coin) -> bool:
    """Check s1^e = h(b) * (h(x0) * (c1^2 + 1))^2 mod n."""
    n = public.n
    h_b = hash_to_int(coin.attributes.encode(), n)
    rhs = h_b * mod_exp(coin.h_x0 * (coin.c1 * coin.c1 % n + 1) % n, 2, n) % n
    return mod_exp(coin.s1, public.e, n) == rhs


def deposit_coin(
    ledger: SpentLedger, public: BankPublicKey, coin: Coin, today: date
) -> DepositResult:
    """Deposit at the bank: signature check, expiry check, double-spend check.

    On acceptance the coin identifier is appended to the spent ledger.
    """
    if not verify_coin(public, coin):
        return DepositResult(False, REJECT_INVALID_SIGNATURE)
    if coin.attributes.expiry < today:
        return DepositResult(False, REJECT_EXPIRED)
    identifier = coin_id(coin)
    if identifier in ledger:
        return DepositResult(False, REJECT_DOUBLE_SPEND)
    ledger.add(identifier)
    return DepositResult(True)


# ---------------------------------------------------------------------------
# file/wire representations (naturals as canonical hex)
# ---------------------------------------------------------------------------

BANK_FORMAT = "EPAY-BANK1"
COIN_FORMAT = "EPAY-COIN1"


def bank_keys_to_dict(keys: BankKeys) -> dict:
    return {
        "format": BANK_FORMAT,
        "p": nat_to_hex(keys.p),
        "q": nat_to_hex(keys.q),
        "n": nat_to_hex(keys.n),
        "theta": nat_to_hex(keys.theta),
        "e": nat_to_hex(keys.e),
        "w": nat_to_hex(keys.w),
    }


def bank_keys_from_dict(data: dict) -> BankKeys:
    if data.get("format") != BANK_FORMAT:
        raise ValueError(f"not a bank key file (format {data.get('format')!r})")
    return BankKeys(**{k: nat_from_hex(data[k]) for k in ("p", "q", "n", "theta", "e", "w")})


def public_key_from_dict(data: dict) -> BankPublicKey:
    """Read only the public half; works on full key files too."""
    if data.get("format") != BANK_FORMAT:
        raise ValueError(f"not a bank key file (format {data.get('format')!r})")
    return BankPublicKey(e=nat_from_hex(data["e"]), n=nat_from_hex(data["n"]))


def coin_to_dict(coin: Coin) -> dict:
    return {
        "format": COIN_FORMAT,
        "expiry": coin.attributes.expiry.isoformat(),
        "value_cents": coin.attributes.value,
        "serial": coin.attributes.serial,
        "h_x0": nat_to_hex(coin.h_x0),
        "c1": nat_to_hex(coin.c1),
        "s1": nat_to_hex(coin.s1),
    }


def coin_from_dict(data: dict) -> Coin:
    if data.get("format") != COIN_FORMAT:
        raise ValueError(f"not a coin file (format {data.get('format')!r})")
    attrs = CoinAttributes(
        expiry=date.fromisoformat(data["expiry"]),
        value=int(data["value_cents"]),
        serial=data["serial"],
    )
    return Coin(
        attributes=attrs,
        h_x0=nat_from_hex(data["h_x0"]),
        c1=nat_from_hex(data["c1"]),
        s1=nat_from_hex(data["s1"]),
    )


def withdraw_coin(
    keys: BankKeys, attrs: CoinAttributes, rng: random.Random
) -> tuple[Coin, dict]:
    """Run the whole withdrawal locally (user and bank roles in one process).

    Returns the coin and the bank's view of the transcript (what a curious
    bank could record), with naturals in hex.  Restarts on a degenerate
    challenge so callers always get a coin.
    """
    while True:
        session, (b_encoding, a_msg) = user_withdraw_init(keys.public, attrs, rng)
        x1 = bank_challenge(keys, rng)
        try:
            beta = user_blind(session, x1, rng)
        except DegenerateChallenge:
            continue
        beta_inv, t1 = bank_sign(keys, b_encoding, a_msg, beta, x1)
        coin = user_unblind(session, beta_inv, t1)
        transcript = {
            "b": b_encoding.decode(),
            "a_msg": nat_to_hex(a_msg),
            "x1": nat_to_hex(x1),
            "beta": nat_to_hex(beta),
            "beta_inv": nat_to_hex(beta_inv),
            "t1": nat_to_hex(t1),
        }
        return coin, transcript
