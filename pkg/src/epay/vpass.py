"""The virtual password scheme.

A user secret is a pair (fixed password, virtual function).  At login the
server shows a random salt; the user (or a helper app) runs the virtual
function over the fixed password and salt and submits the resulting dynamic
password.  Two function families are implemented:

* linear:            k_i = (a*(x_i + y_i) + c) mod Z
* randomized-linear: k_1 = (a*x_1 + y_1 + x_2 + c) mod Z
                     k_i = (a*k_{i-1} + y_i + x_i + c) mod Z,  i >= 2
  where c is picked fresh by the user at every login and the server
  searches all Z candidates during verification.

Digit strings are tuples of ints in [0, Z).  Rendering uses ASCII digits
0-9 for Z <= 10 and 0-9a-f up to Z = 16.

The module also implements the known break of the linear family (two
observations leak the multiplier a) and the exhaustive consistency check
showing that randomized-linear observations never narrow the multiplier
candidate set.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

Digits = tuple[int, ...]

LINEAR = "linear"
RANDOMIZED_LINEAR = "randomized-linear"

_DIGIT_CHARS = "0123456789abcdef"
_MAX_ENUM_Z = 16


class NoInformation(Exception):
    """The two observations used the same salt digit: no constraint on a."""


class ResourceLimit(Exception):
    """Refused a brute-force enumeration beyond Z = 16 (by design)."""


@dataclass(frozen=True)
class VirtualFunction:
    """Per-user secret parameters of the dynamic-password map.

    The linear variant carries its constant c; the randomized-linear variant
    does not (c is chosen per session by the login client).
    """

    a: int
    z: int = 10
    c: int | None = None
    variant: str = RANDOMIZED_LINEAR

    def __post_init__(self):
        if self.z < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.z}")
        if not 1 <= self.a < self.z:
            raise ValueError(f"multiplier must be in [1, Z), got {self.a}")
        if math.gcd(self.a, self.z) != 1:
            raise ValueError(f"gcd(a, Z) must be 1, got a={self.a}, Z={self.z}")
        if self.variant == LINEAR:
            if self.c is None or not 0 <= self.c < self.z:
                raise ValueError("linear variant needs a constant c in [0, Z)")
        elif self.variant == RANDOMIZED_LINEAR:
            if self.c is not None:
                raise ValueError("randomized-linear carries no stored constant")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class Observation:
    """One recorded login: the salt shown and the dynamic password typed."""

    salt: Digits
    submitted: Digits

    def __post_init__(self):
        if len(self.salt) != len(self.submitted):
            raise ValueError("salt and submitted password lengths differ")


def _check_digits(name: str, digits: Digits, z: int) -> None:
    if any(not 0 <= d < z for d in digits):
        raise ValueError(f"{name} digits must lie in [0, {z})")


def parse_digits(text: str, z: int) -> Digits:
    """Parse a digit string (0-9a-f) into a tuple, rejecting digits >= Z."""
    if z > _MAX_ENUM_Z:
        raise ValueError(f"rendering supports Z <= 16, got {z}")
    out = []
    for ch in text.lower():
        value = _DIGIT_CHARS.find(ch)
        if value < 0 or value >= z:
            raise ValueError(f"invalid digit {ch!r} for alphabet size {z}")
        out.append(value)
    return tuple(out)


def render_digits(digits: Digits, z: int) -> str:
    if z > _MAX_ENUM_Z:
        raise ValueError(f"rendering supports Z <= 16, got {z}")
    _check_digits("render", digits, z)
    return "".join(_DIGIT_CHARS[d] for d in digits)


def units(z: int) -> tuple[int, ...]:
    """All multipliers in [1, Z) coprime to Z."""
    return tuple(a for a in range(1, z) if math.gcd(a, z) == 1)


def random_digits(n: int, z: int, rng: random.Random) -> Digits:
    return tuple(rng.randrange(z) for _ in range(n))


def random_unit(z: int, rng: random.Random) -> int:
    return rng.choice(units(z))


# ---------------------------------------------------------------------------
# derivation and inversion
# ---------------------------------------------------------------------------

def derive_eq1(x: Digits, y: Digits, f: VirtualFunction) -> Digits:
    """Linear dynamic password: k_i = (a*(x_i + y_i) + c) mod Z."""
    if f.variant != LINEAR:
        raise ValueError("derive_eq1 needs a linear virtual function")
    if len(x) != len(y):
        raise ValueError("password and salt lengths differ")
    _check_digits("password", x, f.z)
    _check_digits("salt", y, f.z)
    return tuple((f.a * (xi + yi) + f.c) % f.z for xi, yi in zip(x, y))


def derive_eq2(x: Digits, y: Digits, f: VirtualFunction, c: int) -> Digits:
    """Randomized-linear dynamic password with session constant c.

    k_1 = (a*x_1 + y_1 + x_2 + c) mod Z, then each digit chains on the
    previous dynamic digit: k_i = (a*k_{i-1} + y_i + x_i + c) mod Z.
    """
    if f.variant != RANDOMIZED_LINEAR:
        raise ValueError("derive_eq2 needs a randomized-linear virtual function")
    if len(x) != len(y):
        raise ValueError("password and salt lengths differ")
    if len(x) < 2:
        raise ValueError("randomized-linear needs password length >= 2")
    if not 0 <= c < f.z:
        raise ValueError(f"session constant must be in [0, {f.z})")
    _check_digits("password", x, f.z)
    _check_digits("salt", y, f.z)
    k = [(f.a * x[0] + y[0] + x[1] + c) % f.z]
    for i in range(1, len(x)):
        k.append((f.a * k[i - 1] + y[i] + x[i] + c) % f.z)
    return tuple(k)


def invert_eq2(k: Digits, y: Digits, a: int, z: int, c: int) -> Digits:
    """Recover the unique fixed password mapping to k under (y, a, c).

    Walks the chain backwards: x_i = (k_i - a*k_{i-1} - y_i - c) mod Z for
    i = n..2, then x_1 = a^{-1}*(k_1 - y_1 - x_2 - c) mod Z.
    """
    if math.gcd(a, z) != 1:
        raise ValueError(f"gcd(a, Z) must be 1, got a={a}, Z={z}")
    if len(k) != len(y):
        raise ValueError("password and salt lengths differ")
    if len(k) < 2:
        raise ValueError("randomized-linear needs password length >= 2")
    x = [0] * len(k)
    for i in range(len(k) - 1, 0, -1):
        x[i] = (k[i] - a * k[i - 1] - y[i] - c) % z
    a_inv = pow(a, -1, z)
    x[0] = a_inv * (k[0] - y[0] - x[1] - c) % z
    return tuple(x)


def verify(x: Digits, f: VirtualFunction, y: Digits, submitted: Digits) -> bool:
    """Server-side check of a submitted dynamic password.

    For the randomized-linear variant the session constant is unknown to the
    server, so every c in [0, Z) is tried by forward recomputation; the
    submission is accepted iff some c reproduces it exactly.  Equivalent to
    inverting per candidate c and comparing with the stored password, since
    the server holds x.  For the linear variant the expected password is
    recomputed directly.
    """
    if len(x) != len(y) or len(y) != len(submitted):
        raise ValueError("password, salt, and submission lengths differ")
    if f.variant == LINEAR:
        return derive_eq1(x, y, f) == tuple(submitted)
    for c in range(f.z):
        k = f.a * x[0] + y[0] + x[1] + c
        if k % f.z != submitted[0]:
            continue
        k %= f.z
        for i in range(1, len(x)):
            k = (f.a * k + y[i] + x[i] + c) % f.z
            if k != submitted[i]:
                break
        else:
            return True
    return False


# ---------------------------------------------------------------------------
# attack algebra
# ---------------------------------------------------------------------------

def attack_eq1(obs1: Observation, obs2: Observation, z: int, index: int):
    """Solve a*(y'_i - y_i) = (k'_i - k_i) mod Z from two linear-scheme logins.

    Returns the multiplier when the salt difference is invertible, otherwise
    the frozenset of unit multipliers consistent with the congruence.  Raises
    :class:`NoInformation` when the salt digit did not change.
    """
    dy = (obs2.salt[index] - obs1.salt[index]) % z
    dk = (obs2.submitted[index] - obs1.submitted[index]) % z
    if dy == 0:
        raise NoInformation(f"salt digit {index} unchanged between observations")
    if math.gcd(dy, z) == 1:
        return pow(dy, -1, z) * dk % z
    return frozenset(a for a in units(z) if a * dy % z == dk)


def impersonate_eq1(k_i: int, y_i: int, y_live: int, a: int, z: int) -> int:
    """Forge the live dynamic digit from one observed (k_i, y_i) pair.

    (k_i + a*(y''_i - y_i)) mod Z equals the true linear-scheme digit for the
    live salt digit y''_i once a is known.
    """
    return (k_i + a * (y_live - y_i)) % z


def consistent_a_set(observations: list[Observation], z: int) -> frozenset[int]:
    """Unit multipliers consistent with first-digit views of eq.-2 logins.

    Brute force over (a, x1, x2, per-observation c): a is kept iff some
    (x1, x2) explains every observed first digit with a free constant per
    observation.  Because the constant absorbs any discrepancy, the result
    is always the full unit set; the enumeration proves it rather than
    assuming it.  Refuses Z > 16.
    """
    if z > _MAX_ENUM_Z:
        raise ResourceLimit(f"enumeration capped at Z = {_MAX_ENUM_Z}, got {z}")
    consistent = []
    for a in units(z):
        found = False
        for x1 in range(z):
            for x2 in range(z):
                base = a * x1 + x2
                if all(
                    any((base + obs.salt[0] + c) % z == obs.submitted[0] for c in range(z))
                    for obs in observations
                ):
                    found = True
                    break
            if found:
                break
        if found:
            consistent.append(a)
    return frozenset(consistent)
