"""Arbitrary-precision modular arithmetic, probable primes, hash-to-integer
mapping, and the RC5-32 block cipher used on the wire channel.

All big numbers are plain Python ints constrained to be non-negative.  In
files and wire messages they are rendered as lowercase big-endian hex with
no leading zeros ("0" for zero); see :func:`nat_to_hex` / :func:`nat_from_hex`.

Randomness is always an explicit ``random.Random`` argument so that every
protocol transcript can be reproduced from a seed.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "NotInvertible",
    "SamplingExhausted",
    "ChannelCorrupt",
    "Rc5Params",
    "nat_to_hex",
    "nat_from_hex",
    "mod_exp",
    "mod_inv",
    "is_probable_prime",
    "gen_prime",
    "rand_unit",
    "hash_to_int",
    "rc5_block",
    "rc5_cbc",
]


class NotInvertible(ValueError):
    """The value shares a nontrivial factor with the modulus.

    Carries the offending gcd: e-cash callers treat a nontrivial gcd of the
    bank modulus as a fatal "modulus compromised" signal.
    """

    def __init__(self, value: int, modulus: int, gcd: int):
        super().__init__(f"{value} is not invertible mod {modulus} (gcd={gcd})")
        self.value = value
        self.modulus = modulus
        self.gcd = gcd


class SamplingExhausted(RuntimeError):
    """rand_unit gave up after its attempt budget (pathological toy moduli)."""


class ChannelCorrupt(ValueError):
    """Ciphertext failed length, padding, or structural checks on decrypt."""


# ---------------------------------------------------------------------------
# hex serialization of naturals
# ---------------------------------------------------------------------------

def nat_to_hex(value: int) -> str:
    """Render a non-negative int as lowercase big-endian hex, no leading zeros."""
    if value < 0:
        raise ValueError("naturals are non-negative")
    return format(value, "x")


def nat_from_hex(text: str) -> int:
    """Parse the canonical hex form produced by :func:`nat_to_hex`."""
    if not text or text != text.lower() or (text != "0" and text.startswith("0")):
        raise ValueError(f"not canonical natural hex: {text!r}")
    return int(text, 16)


# ---------------------------------------------------------------------------
# modular arithmetic
# ---------------------------------------------------------------------------

def mod_exp(base: int, exponent: int, modulus: int) -> int:
    """Compute base**exponent mod modulus by square-and-multiply.

    O(bit-length of exponent) modular multiplications.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    result = 1
    base %= modulus
    while exponent:
        if exponent & 1:
            result = result * base % modulus
        base = base * base % modulus
        exponent >>= 1
    return result


def mod_inv(value: int, modulus: int) -> int:
    """Return v with value*v == 1 (mod modulus), 0 <= v < modulus.

    Extended Euclid.  Raises :class:`NotInvertible` (carrying the gcd) when
    gcd(value, modulus) != 1.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    t, new_t = 0, 1
    r, new_r = modulus, value % modulus
    while new_r:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    if r != 1:
        raise NotInvertible(value, modulus, r)
    return t % modulus


# ---------------------------------------------------------------------------
# probable primes
# ---------------------------------------------------------------------------

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
                 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
                 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251]


def is_probable_prime(n: int, rng: random.Random, rounds: int = 40) -> bool:
    """Miller-Rabin with random witnesses.

    Error probability <= 4**-rounds, i.e. <= 2**-80 at the default 40 rounds.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    # n - 1 = d * 2^s with d odd
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_prime(bits: int, rng: random.Random) -> int:
    """Return an odd probable prime of exactly ``bits`` bits."""
    if bits < 4:
        raise ValueError(f"bits must be >= 4, got {bits}")
    while True:
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(candidate, rng):
            return candidate


def rand_unit(modulus: int, rng: random.Random, max_attempts: int = 128) -> int:
    """Sample v with 2 <= v < modulus and gcd(v, modulus) = 1.

    Rejection-samples; raises :class:`SamplingExhausted` after
    ``max_attempts`` failures (only plausible on pathological toy moduli).
    """
    if modulus < 3:
        raise ValueError(f"modulus must be >= 3, got {modulus}")
    for _ in range(max_attempts):
        v = rng.randrange(2, modulus)
        if math.gcd(v, modulus) == 1:
            return v
    raise SamplingExhausted(f"no unit found mod {modulus} in {max_attempts} draws")


def hash_to_int(message: bytes, modulus: int) -> int:
    """Map a byte string to a unit h with 2 <= h < modulus, deterministically.

    SHA-256 digest read as a big-endian integer, reduced mod modulus, then
    incremented by 1 (re-reducing) until the range/unit condition holds.
    """
    if modulus < 3:
        raise ValueError(f"modulus must be >= 3, got {modulus}")
    h = int.from_bytes(hashlib.sha256(message).digest(), "big") % modulus
    while h < 2 or math.gcd(h, modulus) != 1:
        h = (h + 1) % modulus
    return h


# ---------------------------------------------------------------------------
# RC5-32
# ---------------------------------------------------------------------------

_P32 = 0xB7E15163
_Q32 = 0x9E3779B9
_MASK32 = 0xFFFFFFFF
_BLOCK_BYTES = 8  # two 32-bit words


@dataclass(frozen=True)
class Rc5Params:
    """RC5-32/r/b parameters.  The word size is fixed at 32 bits.

    ``iv`` is used by CBC mode only and must be one 8-byte block.
    """

    key: bytes
    rounds: int = 12
    iv: bytes | None = None

    def __post_init__(self):
        if not 0 <= self.rounds <= 255:
            raise ValueError(f"rounds must be in [0, 255], got {self.rounds}")
        if len(self.key) > 255:
            raise ValueError("key longer than 255 bytes")
        if self.iv is not None and len(self.iv) != _BLOCK_BYTES:
            raise ValueError("iv must be exactly 8 bytes")


def _rotl(x: int, n: int) -> int:
    n &= 31
    return ((x << n) | (x >> (32 - n))) & _MASK32


def _rotr(x: int, n: int) -> int:
    n &= 31
    return ((x >> n) | (x << (32 - n))) & _MASK32


@lru_cache(maxsize=256)
def _expand_key(key: bytes, rounds: int) -> tuple[int, ...]:
    """RC5 key schedule: S[0..2r+1] from the secret key."""
    c = max(1, (len(key) + 3) // 4)
    L = [0] * c
    for i in reversed(range(len(key))):
        L[i // 4] = ((L[i // 4] << 8) + key[i]) & _MASK32
    t = 2 * rounds + 2
    S = [0] * t
    S[0] = _P32
    for i in range(1, t):
        S[i] = (S[i - 1] + _Q32) & _MASK32
    A = B = i = j = 0
    for _ in range(3 * max(t, c)):
        A = S[i] = _rotl((S[i] + A + B) & _MASK32, 3)
        B = L[j] = _rotl((L[j] + A + B) & _MASK32, A + B)
        i = (i + 1) % t
        j = (j + 1) % c
    return tuple(S)


def _encrypt_block(S: tuple[int, ...], rounds: int, block: bytes) -> bytes:
    A = int.from_bytes(block[:4], "little")
    B = int.from_bytes(block[4:], "little")
    A = (A + S[0]) & _MASK32
    B = (B + S[1]) & _MASK32
    for i in range(1, rounds + 1):
        A = (_rotl(A ^ B, B) + S[2 * i]) & _MASK32
        B = (_rotl(B ^ A, A) + S[2 * i + 1]) & _MASK32
    return A.to_bytes(4, "little") + B.to_bytes(4, "little")


def _decrypt_block(S: tuple[int, ...], rounds: int, block: bytes) -> bytes:
    A = int.from_bytes(block[:4], "little")
    B = int.from_bytes(block[4:], "little")
    for i in range(rounds, 0, -1):
        B = _rotr((B - S[2 * i + 1]) & _MASK32, A) ^ A
        A = _rotr((A - S[2 * i]) & _MASK32, B) ^ B
    B = (B - S[1]) & _MASK32
    A = (A - S[0]) & _MASK32
    return A.to_bytes(4, "little") + B.to_bytes(4, "little")


def rc5_block(direction: str, params: Rc5Params, block: bytes) -> bytes:
    """Encrypt or decrypt one 8-byte block with RC5-32/r/b (ECB, no chaining)."""
    if len(block) != _BLOCK_BYTES:
        raise ValueError(f"block must be 8 bytes, got {len(block)}")
    S = _expand_key(params.key, params.rounds)
    if direction == "encrypt":
        return _encrypt_block(S, params.rounds, block)
    if direction == "decrypt":
        return _decrypt_block(S, params.rounds, block)
    raise ValueError(f"direction must be 'encrypt' or 'decrypt', got {direction!r}")


def rc5_cbc(direction: str, params: Rc5Params, payload: bytes) -> bytes:
    """RC5-32 in CBC mode with RFC 2040 padding (pad byte = pad length, 1..8).

    Padding is always applied on encrypt, so ciphertext length is the next
    multiple of 8 strictly above the payload length.  Decrypt raises
    :class:`ChannelCorrupt` on bad length or bad padding.
    """
    if params.iv is None:
        raise ValueError("CBC mode requires an iv")
    S = _expand_key(params.key, params.rounds)
    if direction == "encrypt":
        pad = _BLOCK_BYTES - len(payload) % _BLOCK_BYTES
        data = payload + bytes([pad]) * pad
        out = bytearray()
        prev = params.iv
        for i in range(0, len(data), _BLOCK_BYTES):
            x = bytes(a ^ b for a, b in zip(data[i:i + _BLOCK_BYTES], prev))
            prev = _encrypt_block(S, params.rounds, x)
            out += prev
        return bytes(out)
    if direction == "decrypt":
        if len(payload) < _BLOCK_BYTES or len(payload) % _BLOCK_BYTES:
            raise ChannelCorrupt(f"ciphertext length {len(payload)} not a positive multiple of 8")
        out = bytearray()
        prev = params.iv
        for i in range(0, len(payload), _BLOCK_BYTES):
            block = payload[i:i + _BLOCK_BYTES]
            x = _decrypt_block(S, params.rounds, block)
            out += bytes(a ^ b for a, b in zip(x, prev))
            prev = block
        pad = out[-1]
        if not 1 <= pad <= _BLOCK_BYTES or out[-pad:] != bytes([pad]) * pad:
            raise ChannelCorrupt("bad padding")
        return bytes(out[:-pad])
    raise ValueError(f"direction must be 'encrypt' or 'decrypt', got {direction!r}")
