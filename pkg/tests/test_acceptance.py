"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion with the measured numbers.
"""

import itertools
import random
import time
from dataclasses import replace
from datetime import date

from epay import ecash, limitpay, vpass
from epay.limitpay import LimitPayService, PaymentPresentation, journal_replay
from epay.numcrypt import Rc5Params, hash_to_int, rc5_block, rc5_cbc
from epay.simulate import PHISHER, AdversaryModel, simulate_adversary, wilson_interval
from epay.vpass import LINEAR, RANDOMIZED_LINEAR, VirtualFunction

from test_rc5 import RFC2040_CBC_VECTORS, RIVEST_VECTORS


def report(name: str, detail: str, elapsed: float) -> None:
    print(f"\nACCEPTANCE PASS {name}: {detail} ({elapsed:.2f}s)")


def rand_digit_tuple(rng: random.Random, z: int, n: int) -> tuple:
    value = rng.randrange(z**n)
    digits = []
    for _ in range(n):
        value, d = divmod(value, z)
        digits.append(d)
    return tuple(digits)


def test_c01_exactly_z_acceptance():
    """Z=10, n=3: exhaustively, exactly 10 of the 1000 submissions verify."""
    t0 = time.perf_counter()
    f = VirtualFunction(a=3, z=10)
    x = (9, 0, 4)
    y = (2, 7, 7)
    accepted = sum(
        vpass.verify(x, f, y, k) for k in itertools.product(range(10), repeat=3)
    )
    elapsed = time.perf_counter() - t0
    assert accepted == 10
    assert elapsed < 1.0
    report("exactly-Z", f"{accepted}/1000 candidate submissions accepted", elapsed)


def test_c02_guess_rate_one_in_hundred_thousand():
    """10^6 random guesses at Z=10, n=6 land inside the Wilson band of 10^-5."""
    z, n, trials = 10, 6, 1_000_000
    rng = random.Random(12345)
    t0 = time.perf_counter()
    x = rand_digit_tuple(rng, z, n)
    f = VirtualFunction(a=7, z=z)
    successes = 0
    verify = vpass.verify
    for _ in range(trials):
        salt = rand_digit_tuple(rng, z, n)
        guess = rand_digit_tuple(rng, z, n)
        successes += verify(x, f, salt, guess)
    elapsed = time.perf_counter() - t0
    analytic = z ** (1 - n)
    low, high = wilson_interval(round(analytic * trials), trials)
    rate = successes / trials
    assert low <= rate <= high, (successes, low, high)
    assert elapsed < 60.0
    paper_formula = z / 2**n
    report(
        "guess-rate",
        f"{successes}/10^6 guesses accepted, rate {rate:.2e} in [{low:.2e}, {high:.2e}] "
        f"around Z^(1-n)={analytic:.0e} (paper's Z/2^n would be {paper_formula:.5f}, "
        "reported only)",
        elapsed,
    )


def test_c03_eq1_break_is_total():
    """Two phished logins against the linear family: impersonation always lands."""
    t0 = time.perf_counter()
    model = AdversaryModel(kind=PHISHER, observations=2)
    result = simulate_adversary(model, LINEAR, 1000, random.Random(7), z=10, n=6)
    elapsed = time.perf_counter() - t0
    assert result.successes == 1000
    assert result.success_rate == 1.0
    assert elapsed < 5.0
    report("eq1-break", "1000/1000 impersonations succeeded after m=2", elapsed)


def test_c04_eq2_resists_multiplier_recovery():
    """Z in {6, 10, 12}: two observations never shrink the unit candidate set."""
    t0 = time.perf_counter()
    rng = random.Random(13)
    checked = 0
    for z in (6, 10, 12):
        all_units = frozenset(vpass.units(z))
        for _ in range(100):
            x = vpass.random_digits(4, z, rng)
            f = VirtualFunction(a=vpass.random_unit(z, rng), z=z)
            observations = []
            for _ in range(2):
                salt = vpass.random_digits(4, z, rng)
                c = rng.randrange(z)
                observations.append(
                    vpass.Observation(salt, vpass.derive_eq2(x, salt, f, c))
                )
            assert vpass.consistent_a_set(observations, z) == all_units
            checked += 1
    elapsed = time.perf_counter() - t0
    assert checked == 300
    assert elapsed < 30.0
    report("eq2-resistance", "300/300 instances kept the full unit set", elapsed)


def test_c05_bijectivity():
    """invert(derive(x)) = x: 10^4 random instances plus exhaustive Z=5."""
    t0 = time.perf_counter()
    rng = random.Random(17)
    for _ in range(10_000):
        z = rng.choice((5, 8, 10, 13, 16))
        n = rng.randrange(2, 9)
        a = vpass.random_unit(z, rng)
        c = rng.randrange(z)
        f = VirtualFunction(a=a, z=z)
        x = vpass.random_digits(n, z, rng)
        y = vpass.random_digits(n, z, rng)
        assert vpass.invert_eq2(vpass.derive_eq2(x, y, f, c), y, a, z, c) == x
    exhaustive = 0
    for n in (2, 3):
        f = VirtualFunction(a=3, z=5)
        y = tuple(itertools.islice(itertools.cycle((2, 0, 4)), n))
        images = set()
        for x in itertools.product(range(5), repeat=n):
            k = vpass.derive_eq2(x, y, f, 1)
            assert vpass.invert_eq2(k, y, 3, 5, 1) == x
            images.add(k)
            exhaustive += 1
        assert len(images) == 5**n
    elapsed = time.perf_counter() - t0
    report("bijectivity", f"10^4 random + {exhaustive} exhaustive round-trips", elapsed)


def test_c06_ecash_signature_identity_and_tamper():
    """s1^e = h(b) * (h(x0)*(c1^2+1))^2 mod n on honest runs; tampers all fail."""
    t0 = time.perf_counter()
    rng = random.Random(23)

    def check_identity(keys, coin):
        n = keys.n
        h_b = hash_to_int(coin.attributes.encode(), n)
        rhs = h_b * pow(coin.h_x0 * (coin.c1 * coin.c1 % n + 1) % n, 2, n) % n
        return pow(coin.s1, keys.e, n) == rhs

    keys64 = ecash.bank_keygen(64, rng)
    coins = []
    for _ in range(100):
        coin, _ = ecash.withdraw_coin(
            keys64, ecash.random_attributes(date(2027, 1, 1), 1234, rng), rng
        )
        assert check_identity(keys64, coin)
        coins.append(coin)
    big_checked = 0
    for _ in range(2):
        keys512 = ecash.bank_keygen(512, rng)
        for _ in range(5):
            coin, _ = ecash.withdraw_coin(
                keys512, ecash.random_attributes(date(2027, 1, 1), 50_00, rng), rng
            )
            assert check_identity(keys512, coin)
            big_checked += 1
    assert big_checked == 10

    # single-value tampers: 20 probes per exchanged value, all must fail
    tamper_failures = 0
    for probe in range(100):
        field = ("a_msg", "beta", "t1", "s1", "c1")[probe % 5]
        attrs = ecash.random_attributes(date(2027, 1, 1), 999, rng)
        if field in ("s1", "c1"):
            coin, _ = ecash.withdraw_coin(keys64, attrs, rng)
            bad = replace(coin, **{field: (getattr(coin, field) + 1) % keys64.n})
            tamper_failures += not ecash.verify_coin(keys64.public, bad)
            continue
        while True:
            session, (b_enc, a_msg) = ecash.user_withdraw_init(keys64.public, attrs, rng)
            x1 = ecash.bank_challenge(keys64, rng)
            try:
                beta = ecash.user_blind(session, x1, rng)
            except ecash.DegenerateChallenge:
                continue
            break
        if field == "a_msg":
            a_msg = (a_msg + 1) % keys64.n
        elif field == "beta":
            beta = (beta + 1) % keys64.n
        try:
            beta_inv, t1 = ecash.bank_sign(keys64, b_enc, a_msg, beta, x1)
        except ecash.ModulusCompromised:
            tamper_failures += 1  # tampered beta lost invertibility
            continue
        if field == "t1":
            t1 = (t1 + 1) % keys64.n
        try:
            ecash.user_unblind(session, beta_inv, t1)
        except ecash.BankSignatureInvalid:
            tamper_failures += 1
    elapsed = time.perf_counter() - t0
    assert tamper_failures == 100
    assert elapsed < 60.0
    report(
        "ecash-identity",
        "100/100 transcripts at 64-bit and 10/10 at 512-bit verified; "
        "100/100 tampers rejected",
        elapsed,
    )


def test_c07_double_spend_detection():
    """Second deposit of the same coin is rejected as DoubleSpend, 100/100."""
    t0 = time.perf_counter()
    rng = random.Random(29)
    keys = ecash.bank_keygen(64, rng)
    ledger = ecash.SpentLedger()
    today = date(2026, 6, 1)
    detected = 0
    for _ in range(100):
        coin, _ = ecash.withdraw_coin(
            keys, ecash.random_attributes(date(2027, 1, 1), 777, rng), rng
        )
        first = ecash.deposit_coin(ledger, keys.public, coin, today)
        second = ecash.deposit_coin(ledger, keys.public, coin, today)
        detected += (
            first.accepted
            and not second.accepted
            and second.reason == ecash.REJECT_DOUBLE_SPEND
        )
    elapsed = time.perf_counter() - t0
    assert detected == 100
    report("double-spend", "100/100 replayed deposits rejected", elapsed)


def test_c08_loss_bound():
    """10^4 adversarial payment sequences never clear more than the limit."""
    t0 = time.perf_counter()
    rng = random.Random(31)
    clock = lambda: 1_800_000_000.0
    service = LimitPayService(rng=rng, clock=clock)
    service.register_account("victim", 10**12)
    account = service.accounts["victim"]

    def auth_pair():
        salt = vpass.random_digits(6, 10, rng)
        c = rng.randrange(10)
        return salt, vpass.derive_eq2(account.password, salt, account.vfunc, c)

    for _ in range(10_000):
        limit = rng.randrange(1, 501)
        salt, password = auth_pair()
        service.set_limit("victim", salt, password, limit)
        salt, password = auth_pair()
        credential = service.issue_temp_credential("victim", salt, password)
        presentation = PaymentPresentation(
            account_id="victim",
            random_number=credential.random_number,
            temp_password=credential.temp_password,
        )
        approved_total = 0
        for _ in range(rng.randrange(1, 13)):
            style = rng.randrange(4)
            if style == 0:
                amount = rng.randrange(1, 2 * limit + 1)
            elif style == 1:
                amount = max(1, credential.remaining)  # drain probe
            elif style == 2:
                amount = 1
            else:
                amount = limit
            decision = service.authorize_payment(presentation, "mallory", amount)
            if decision.approved:
                approved_total += amount
            if style == 3 and rng.random() < 0.25:
                # owner raises the limit mid-attack; must not widen this credential
                salt, password = auth_pair()
                service.set_limit("victim", salt, password, rng.randrange(1, 1001))
        assert approved_total <= limit, (approved_total, limit)
    elapsed = time.perf_counter() - t0
    report("loss-bound", "10^4 adversarial sequences stayed within the limit", elapsed)


def test_c09_rc5_vectors_and_cbc_round_trips():
    """Published RC5 vectors bit-exact; 10^4 random CBC payloads round-trip."""
    t0 = time.perf_counter()
    for key, pt, ct in RIVEST_VECTORS:
        params = Rc5Params(key=bytes.fromhex(key))
        assert rc5_block("encrypt", params, bytes.fromhex(pt)).hex() == ct
        assert rc5_block("decrypt", params, bytes.fromhex(ct)).hex() == pt
    for rounds, key, iv, pt, ct in RFC2040_CBC_VECTORS:
        params = Rc5Params(key=bytes.fromhex(key), rounds=rounds, iv=bytes.fromhex(iv))
        out = rc5_cbc("encrypt", params, bytes.fromhex(pt))
        assert out[: len(bytes.fromhex(ct))].hex() == ct
    rng = random.Random(37)
    for _ in range(10_000):
        params = Rc5Params(key=rng.randbytes(16), iv=rng.randbytes(8))
        payload = rng.randbytes(rng.randrange(0, 65))
        assert rc5_cbc("decrypt", params, rc5_cbc("encrypt", params, payload)) == payload
    elapsed = time.perf_counter() - t0
    report(
        "rc5",
        f"{len(RIVEST_VECTORS)} Rivest + {len(RFC2040_CBC_VECTORS)} RFC 2040 vectors "
        "bit-exact; 10^4 CBC round-trips",
        elapsed,
    )


def test_c10_journal_replay():
    """Replaying the journal reproduces the full service state structurally."""
    t0 = time.perf_counter()
    rng = random.Random(41)
    now = [1_800_000_000.0]
    service = LimitPayService(rng=rng, clock=lambda: now[0])

    def auth_pair(account_id):
        account = service.accounts[account_id]
        salt = vpass.random_digits(6, 10, rng)
        c = rng.randrange(10)
        return salt, vpass.derive_eq2(account.password, salt, account.vfunc, c)

    service.register_account("alice", 900_00)
    salt, password = auth_pair("alice")
    service.set_limit("alice", salt, password, 120_00)
    salt, password = auth_pair("alice")
    first = service.issue_temp_credential("alice", salt, password)
    salt, password = auth_pair("alice")
    second = service.issue_temp_credential("alice", salt, password)

    def present(credential):
        return PaymentPresentation("alice", credential.random_number, credential.temp_password)

    service.authorize_payment(present(first), "shop-a", 100_00)
    service.authorize_payment(present(first), "shop-a", 30_00)  # OverLimit decline
    service.authorize_payment(present(second), "shop-b", 120_00)  # exhausts
    now[0] += 3600
    salt, password = auth_pair("alice")
    service.revoke_credential("alice", salt, password, first.id)
    service.authorize_payment(present(first), "shop-c", 1_00)  # Revoked decline
    try:
        service.set_limit("alice", (0,) * 6, (0,) * 6, 1_00)  # journaled auth failure
    except limitpay.AuthFailed:
        pass
    service.register_account("bob", 5_00)
    service.set_account_status("bob", "frozen")

    replayed = journal_replay(service.journal.records)
    assert replayed.state_snapshot() == service.state_snapshot()
    assert replayed.payments == service.payments
    elapsed = time.perf_counter() - t0
    report(
        "journal-replay",
        f"{len(service.journal.records)} records replayed to an identical snapshot",
        elapsed,
    )
