"""Monte Carlo adversaries against the two virtual-function families.

Each trial creates a fresh victim, lets the adversary record ``m`` logins
(a phisher chooses the salts itself, since it runs the fake site; the
passive kinds watch server-chosen salts), then attempts one live login.

Against the linear family the adversary intersects the multiplier
constraints a*dy = dk (mod Z) across observation pairs and digit positions
and forges the live password digit-by-digit.  Against the randomized-linear
family the brute-forced consistent multiplier set never shrinks, so the
best available move is a uniform random guess; the report records the
candidate-set statistics that show why.

Success rates carry 95% Wilson score intervals.  Reports are reproducible
bit-for-bit from the seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import vpass
from .vpass import LINEAR, RANDOMIZED_LINEAR, Observation, VirtualFunction

PHISHER = "phisher"
KEYLOGGER = "keylogger"
SHOULDER_SURFER = "shoulder-surfer"
MULTI_OBSERVER = "multi-observer"
ADVERSARY_KINDS = (PHISHER, KEYLOGGER, SHOULDER_SURFER, MULTI_OBSERVER)

# kinds that control the login page and therefore the salts shown
_CHOOSES_SALTS = frozenset({PHISHER})


@dataclass(frozen=True)
class AdversaryModel:
    kind: str
    observations: int

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.observations < 0:
            raise ValueError("observation budget must be non-negative")


@dataclass(frozen=True)
class SimulationReport:
    scheme: str
    adversary: str
    observations: int
    trials: int
    z: int
    n: int
    successes: int
    success_rate: float
    wilson_low: float
    wilson_high: float
    exact_recovery_rate: float
    mean_candidate_count: float
    baseline_rate: float


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval (by default) for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _observation_salts(model: AdversaryModel, n: int, z: int, rng: random.Random):
    if model.kind in _CHOOSES_SALTS:
        # constant-digit salts 0, 1, 2, ...: consecutive pairs differ by 1
        # in every position, so the multiplier congruence is invertible
        return [tuple(j % z for _ in range(n)) for j in range(model.observations)]
    return [vpass.random_digits(n, z, rng) for _ in range(model.observations)]


def _eq1_candidates(observations: list[Observation], z: int) -> frozenset[int]:
    candidates = frozenset(vpass.units(z))
    for first in range(len(observations)):
        for second in range(first + 1, len(observations)):
            for index in range(len(observations[first].salt)):
                try:
                    solved = vpass.attack_eq1(
                        observations[first], observations[second], z, index
                    )
                except vpass.NoInformation:
                    continue
                if isinstance(solved, frozenset):
                    candidates &= solved
                else:
                    candidates &= {solved}
    return candidates


def _run_eq1_trial(model: AdversaryModel, z: int, n: int, rng: random.Random):
    x = vpass.random_digits(n, z, rng)
    f = VirtualFunction(a=vpass.random_unit(z, rng), z=z, c=rng.randrange(z), variant=LINEAR)
    observations = [
        Observation(salt, vpass.derive_eq1(x, salt, f))
        for salt in _observation_salts(model, n, z, rng)
    ]
    live_salt = vpass.random_digits(n, z, rng)
    candidates = _eq1_candidates(observations, z)
    if observations and candidates:
        guess_a = min(candidates) if len(candidates) == 1 else rng.choice(sorted(candidates))
        reference = observations[0]
        forged = tuple(
            vpass.impersonate_eq1(reference.submitted[i], reference.salt[i], live_salt[i], guess_a, z)
            for i in range(n)
        )
    else:
        forged = vpass.random_digits(n, z, rng)
    success = vpass.verify(x, f, live_salt, forged)
    return success, len(candidates) if observations else len(vpass.units(z))


def _run_eq2_trial(model: AdversaryModel, z: int, n: int, rng: random.Random):
    x = vpass.random_digits(n, z, rng)
    f = VirtualFunction(a=vpass.random_unit(z, rng), z=z)
    observations = []
    for salt in _observation_salts(model, n, z, rng):
        c = rng.randrange(z)  # the user's fresh per-login constant
        observations.append(Observation(salt, vpass.derive_eq2(x, salt, f, c)))
    candidates = vpass.consistent_a_set(observations, z)
    live_salt = vpass.random_digits(n, z, rng)
    guess = vpass.random_digits(n, z, rng)
    success = vpass.verify(x, f, live_salt, guess)
    return success, len(candidates)


def simulate_adversary(
    model: AdversaryModel,
    scheme: str,
    trials: int,
    rng: random.Random,
    z: int = 10,
    n: int = 6,
) -> SimulationReport:
    """Run ``trials`` independent victim/attack rounds and summarize."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if scheme not in (LINEAR, RANDOMIZED_LINEAR):
        raise ValueError(f"unknown scheme {scheme!r}")
    run_trial = _run_eq1_trial if scheme == LINEAR else _run_eq2_trial
    successes = 0
    exact = 0
    candidate_total = 0
    for _ in range(trials):
        success, candidate_count = run_trial(model, z, n, rng)
        successes += success
        exact += candidate_count == 1
        candidate_total += candidate_count
    low, high = wilson_interval(successes, trials)
    baseline = z ** (1 - n) if scheme == RANDOMIZED_LINEAR else z ** (-n)
    return SimulationReport(
        scheme=scheme,
        adversary=model.kind,
        observations=model.observations,
        trials=trials,
        z=z,
        n=n,
        successes=successes,
        success_rate=successes / trials,
        wilson_low=low,
        wilson_high=high,
        exact_recovery_rate=exact / trials,
        mean_candidate_count=candidate_total / trials,
        baseline_rate=baseline,
    )
