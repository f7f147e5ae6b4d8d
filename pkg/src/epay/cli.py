"""The ``epay`` command line.

Exit codes: 0 success, 2 verification/authorization failure, 1 error.

    epay bank keygen --bits N --out FILE
    epay serve --port P --state DIR --channel-key HEX
    epay vpass derive --scheme eq1|eq2 --a A --z Z --x DIGITS --y DIGITS --c C
    epay vpass verify --scheme eq1|eq2 --a A --z Z --x DIGITS --y DIGITS --k DIGITS
    epay attack --scheme eq1|eq2|both --observations M --trials T --seed S
    epay coin withdraw|verify|deposit ...
    epay account register|set-limit|issue-credential|pay ... --state DIR
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from datetime import date

from . import ecash, limitpay, vpass, wire
from .simulate import ADVERSARY_KINDS, PHISHER, AdversaryModel, simulate_adversary
from .vpass import LINEAR, RANDOMIZED_LINEAR

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2

_SCHEMES = {"eq1": LINEAR, "eq2": RANDOMIZED_LINEAR}


def _rng(seed: int | None) -> random.Random:
    return random.Random(seed)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# bank / serve
# ---------------------------------------------------------------------------

def _cmd_bank_keygen(args) -> int:
    keys = ecash.bank_keygen(args.bits, _rng(args.seed))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(ecash.bank_keys_to_dict(keys), fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.bits}-bit bank keys to {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    channel_key = bytes.fromhex(args.channel_key) if args.channel_key else None
    serve(
        port=args.port,
        state_dir=args.state,
        channel_key=channel_key,
        bits=args.bits,
        seed=args.seed,
        static_dir=args.static,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# vpass
# ---------------------------------------------------------------------------

def _vfunc(args, variant: str) -> vpass.VirtualFunction:
    if variant == LINEAR:
        if args.c is None:
            raise ValueError("eq1 needs --c (the stored constant)")
        return vpass.VirtualFunction(a=args.a, z=args.z, c=args.c, variant=LINEAR)
    return vpass.VirtualFunction(a=args.a, z=args.z)


def _cmd_vpass_derive(args) -> int:
    variant = _SCHEMES[args.scheme]
    x = vpass.parse_digits(args.x, args.z)
    y = vpass.parse_digits(args.y, args.z)
    f = _vfunc(args, variant)
    if variant == LINEAR:
        k = vpass.derive_eq1(x, y, f)
    else:
        if args.c is None:
            raise ValueError("eq2 needs --c (the session constant)")
        k = vpass.derive_eq2(x, y, f, args.c)
    print(vpass.render_digits(k, args.z))
    return EXIT_OK


def _cmd_vpass_verify(args) -> int:
    variant = _SCHEMES[args.scheme]
    x = vpass.parse_digits(args.x, args.z)
    y = vpass.parse_digits(args.y, args.z)
    k = vpass.parse_digits(args.k, args.z)
    f = _vfunc(args, variant)
    accepted = vpass.verify(x, f, y, k)
    print("accepted" if accepted else "rejected")
    return EXIT_OK if accepted else EXIT_REJECTED


# ---------------------------------------------------------------------------
# attack simulations
# ---------------------------------------------------------------------------

def _cmd_attack(args) -> int:
    schemes = [_SCHEMES[args.scheme]] if args.scheme != "both" else [LINEAR, RANDOMIZED_LINEAR]
    rng = _rng(args.seed)
    reports = []
    for scheme in schemes:
        for m in range(args.observations + 1):
            model = AdversaryModel(kind=args.adversary, observations=m)
            reports.append(
                simulate_adversary(model, scheme, args.trials, rng, z=args.z, n=args.n)
            )
    header = (
        f"{'scheme':<18} {'m':>3} {'trials':>8} {'successes':>9} "
        f"{'rate':>12} {'95% Wilson':>26} {'candidates':>10}"
    )
    print(header)
    for r in reports:
        interval = f"[{r.wilson_low:.3e}, {r.wilson_high:.3e}]"
        print(
            f"{r.scheme:<18} {r.observations:>3} {r.trials:>8} {r.successes:>9} "
            f"{r.success_rate:>12.6f} {interval:>26} {r.mean_candidate_count:>10.2f}"
        )
    if args.out_dir:
        from .report import render_report_figures, write_report_csv

        os.makedirs(args.out_dir, exist_ok=True)
        csv_path = os.path.join(args.out_dir, "attack_report.csv")
        write_report_csv(reports, csv_path)
        figures = render_report_figures(reports, args.out_dir)
        print(f"wrote {csv_path}")
        for path in figures:
            print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# coins
# ---------------------------------------------------------------------------

def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_coin_withdraw(args) -> int:
    keys = ecash.bank_keys_from_dict(_load_json(args.bank))
    rng = _rng(args.seed)
    attrs = ecash.random_attributes(date.fromisoformat(args.expiry), args.value, rng)
    coin, transcript = ecash.withdraw_coin(keys, attrs, rng)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(ecash.coin_to_dict(coin), fh, indent=2)
        fh.write("\n")
    if args.transcript:
        if not args.channel_key:
            raise ValueError("--transcript needs --channel-key")
        key = bytes.fromhex(args.channel_key)
        records = [
            wire.wire_encode(kind, {kind: value}, key, counter)
            for counter, (kind, value) in enumerate(transcript.items())
        ]
        with open(args.transcript, "w", encoding="utf-8") as fh:
            fh.write(wire.dump_records(records))
    print(f"wrote coin to {args.out}")
    return EXIT_OK


def _cmd_coin_verify(args) -> int:
    public = ecash.public_key_from_dict(_load_json(args.bank))
    coin = ecash.coin_from_dict(_load_json(args.coin))
    ok = ecash.verify_coin(public, coin)
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_REJECTED


def _cmd_coin_deposit(args) -> int:
    public = ecash.public_key_from_dict(_load_json(args.bank))
    coin = ecash.coin_from_dict(_load_json(args.coin))
    entries: set[str] = set()
    if os.path.exists(args.ledger):
        with open(args.ledger, encoding="utf-8") as fh:
            entries = {line.strip() for line in fh if line.strip()}
    ledger = ecash.SpentLedger(entries)
    today = date.fromisoformat(args.date) if args.date else date.today()
    result = ecash.deposit_coin(ledger, public, coin, today)
    if result.accepted:
        with open(args.ledger, "a", encoding="utf-8") as fh:
            fh.write(ecash.coin_id(coin) + "\n")
        print("accepted")
        return EXIT_OK
    print(f"rejected: {result.reason}")
    return EXIT_REJECTED


# ---------------------------------------------------------------------------
# accounts
# ---------------------------------------------------------------------------

def _open_service(args) -> limitpay.LimitPayService:
    os.makedirs(args.state, exist_ok=True)
    journal = os.path.join(args.state, "journal.jsonl")
    return limitpay.open_service(journal, _rng(args.seed))


def _cmd_account_register(args) -> int:
    service = _open_service(args)
    account, secret = service.register_account(args.id, args.balance)
    _emit(
        {
            "id": account.id,
            "balance_cents": account.balance,
            "limit_cents": account.limit,
            "secret": {
                "password": vpass.render_digits(secret.password, secret.vfunc.z),
                "a": secret.vfunc.a,
                "z": secret.vfunc.z,
            },
        }
    )
    return EXIT_OK


def _cmd_account_set_limit(args) -> int:
    service = _open_service(args)
    account = service._account(args.id)
    z = account.vfunc.z
    try:
        service.set_limit(
            args.id,
            vpass.parse_digits(args.salt, z),
            vpass.parse_digits(args.password, z),
            args.limit,
        )
    except limitpay.AuthFailed:
        print("authentication failed")
        return EXIT_REJECTED
    _emit({"id": args.id, "limit_cents": args.limit})
    return EXIT_OK


def _cmd_account_issue(args) -> int:
    service = _open_service(args)
    account = service._account(args.id)
    z = account.vfunc.z
    try:
        credential = service.issue_temp_credential(
            args.id, vpass.parse_digits(args.salt, z), vpass.parse_digits(args.password, z)
        )
    except limitpay.AuthFailed:
        print("authentication failed")
        return EXIT_REJECTED
    _emit(
        {
            "account_id": args.id,
            "random_number": vpass.render_digits(credential.random_number, z),
            "temp_password": vpass.render_digits(credential.temp_password, z),
            "allowance_cents": credential.allowance,
            "expires": credential.expires,
        }
    )
    return EXIT_OK


def _cmd_account_pay(args) -> int:
    service = _open_service(args)
    account = service.accounts.get(args.id)
    z = account.vfunc.z if account else 10
    presentation = limitpay.PaymentPresentation(
        account_id=args.id,
        random_number=vpass.parse_digits(args.random_number, z),
        temp_password=vpass.parse_digits(args.password, z),
    )
    decision = service.authorize_payment(presentation, args.merchant, args.amount)
    if decision.approved:
        _emit({"outcome": "approved", "remaining_cents": decision.remaining})
        return EXIT_OK
    _emit({"outcome": "declined", "reason": decision.reason})
    return EXIT_REJECTED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epay")
    sub = parser.add_subparsers(dest="command", required=True)

    bank = sub.add_parser("bank", help="bank key material").add_subparsers(
        dest="subcommand", required=True
    )
    keygen = bank.add_parser("keygen", help="generate signing keys")
    keygen.add_argument("--bits", type=int, default=512, help="bits per prime")
    keygen.add_argument("--out", required=True)
    keygen.add_argument("--seed", type=int)
    keygen.set_defaults(func=_cmd_bank_keygen)

    serve = sub.add_parser("serve", help="run the HTTP bank")
    serve.add_argument("--port", type=int, default=8400)
    serve.add_argument("--state", help="state directory (journal, bank keys, transcript)")
    serve.add_argument("--channel-key", help="hex RC5 channel key for the transcript store")
    serve.add_argument("--bits", type=int, default=512)
    serve.add_argument("--seed", type=int)
    serve.add_argument("--static", help="directory of helper-app assets to serve at /")
    serve.set_defaults(func=_cmd_serve)

    vp = sub.add_parser("vpass", help="dynamic password tools").add_subparsers(
        dest="subcommand", required=True
    )
    for name, handler in (("derive", _cmd_vpass_derive), ("verify", _cmd_vpass_verify)):
        p = vp.add_parser(name)
        p.add_argument("--scheme", choices=("eq1", "eq2"), required=True)
        p.add_argument("--a", type=int, required=True, help="multiplier")
        p.add_argument("--z", type=int, default=10, help="alphabet size")
        p.add_argument("--x", required=True, help="fixed password digits")
        p.add_argument("--y", required=True, help="salt digits")
        p.add_argument("--c", type=int, help="constant (eq1: stored, eq2: session)")
        if name == "verify":
            p.add_argument("--k", required=True, help="submitted dynamic password digits")
        p.set_defaults(func=handler)

    attack = sub.add_parser("attack", help="Monte Carlo adversary simulations")
    attack.add_argument("--scheme", choices=("eq1", "eq2", "both"), default="both")
    attack.add_argument("--observations", type=int, default=2, help="max observed logins")
    attack.add_argument("--trials", type=int, default=1000)
    attack.add_argument("--seed", type=int, default=0)
    attack.add_argument("--z", type=int, default=10)
    attack.add_argument("--n", type=int, default=6, help="password length")
    attack.add_argument("--adversary", choices=ADVERSARY_KINDS, default=PHISHER)
    attack.add_argument("--out-dir", help="write attack_report.csv and figures here")
    attack.set_defaults(func=_cmd_attack)

    coin = sub.add_parser("coin", help="e-cash").add_subparsers(dest="subcommand", required=True)
    withdraw = coin.add_parser("withdraw", help="run the withdrawal protocol locally")
    withdraw.add_argument("--bank", required=True, help="bank key file")
    withdraw.add_argument("--value", type=int, required=True, help="cents")
    withdraw.add_argument("--expiry", required=True, help="ISO date")
    withdraw.add_argument("--out", required=True, help="coin file to write")
    withdraw.add_argument("--seed", type=int)
    withdraw.add_argument("--transcript", help="write the encrypted message transcript here")
    withdraw.add_argument("--channel-key", help="hex RC5 key for --transcript")
    withdraw.set_defaults(func=_cmd_coin_withdraw)
    cverify = coin.add_parser("verify", help="check a coin against the bank public key")
    cverify.add_argument("--bank", required=True)
    cverify.add_argument("--coin", required=True)
    cverify.set_defaults(func=_cmd_coin_verify)
    deposit = coin.add_parser("deposit", help="deposit a coin against a ledger file")
    deposit.add_argument("--bank", required=True)
    deposit.add_argument("--coin", required=True)
    deposit.add_argument("--ledger", required=True, help="spent-coin ledger file")
    deposit.add_argument("--date", help="deposit date (ISO), default today")
    deposit.set_defaults(func=_cmd_coin_deposit)

    account = sub.add_parser("account", help="limit-bounded accounts").add_subparsers(
        dest="subcommand", required=True
    )
    register = account.add_parser("register")
    register.add_argument("--state", required=True)
    register.add_argument("--id", required=True)
    register.add_argument("--balance", type=int, required=True, help="cents")
    register.add_argument("--seed", type=int)
    register.set_defaults(func=_cmd_account_register)
    setlimit = account.add_parser("set-limit")
    setlimit.add_argument("--state", required=True)
    setlimit.add_argument("--id", required=True)
    setlimit.add_argument("--limit", type=int, required=True, help="cents")
    setlimit.add_argument("--salt", required=True, help="challenge digits")
    setlimit.add_argument("--password", required=True, help="dynamic password for the salt")
    setlimit.add_argument("--seed", type=int)
    setlimit.set_defaults(func=_cmd_account_set_limit)
    issue = account.add_parser("issue-credential")
    issue.add_argument("--state", required=True)
    issue.add_argument("--id", required=True)
    issue.add_argument("--salt", required=True)
    issue.add_argument("--password", required=True)
    issue.add_argument("--seed", type=int)
    issue.set_defaults(func=_cmd_account_issue)
    pay = account.add_parser("pay")
    pay.add_argument("--state", required=True)
    pay.add_argument("--id", required=True)
    pay.add_argument("--random-number", required=True)
    pay.add_argument("--password", required=True)
    pay.add_argument("--merchant", required=True)
    pay.add_argument("--amount", type=int, required=True, help="cents")
    pay.add_argument("--seed", type=int)
    pay.set_defaults(func=_cmd_account_pay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ValueError,
        OSError,
        limitpay.NotFound,
        limitpay.Conflict,
        limitpay.InsufficientFunds,
        limitpay.NoLimitSet,
        limitpay.AccountFrozen,
        limitpay.JournalCorrupt,
        ecash.ModulusCompromised,
        ecash.BankSignatureInvalid,
        ecash.DegenerateChallenge,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
