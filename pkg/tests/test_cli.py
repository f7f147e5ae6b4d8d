import json
import subprocess
import sys

import pytest

from epay import vpass
from epay.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestVpassCommands:
    def test_derive_eq2_worked_example(self, capsys):
        code, out = run(
            capsys, "vpass", "derive", "--scheme", "eq2",
            "--a", "3", "--z", "10", "--x", "12", "--y", "57", "--c", "4",
        )
        assert code == 0
        assert out.strip() == "45"

    def test_derive_eq1(self, capsys):
        code, out = run(
            capsys, "vpass", "derive", "--scheme", "eq1",
            "--a", "3", "--z", "10", "--x", "11", "--y", "55", "--c", "4",
        )
        assert code == 0
        assert out.strip() == "22"

    def test_verify_accept_and_reject_codes(self, capsys):
        code, out = run(
            capsys, "vpass", "verify", "--scheme", "eq2",
            "--a", "3", "--z", "10", "--x", "12", "--y", "57", "--k", "45",
        )
        assert code == 0 and "accepted" in out
        code, out = run(
            capsys, "vpass", "verify", "--scheme", "eq2",
            "--a", "3", "--z", "10", "--x", "12", "--y", "57", "--k", "46",
        )
        assert code == 2 and "rejected" in out

    def test_bad_digit_is_error(self, capsys):
        code = main(
            ["vpass", "derive", "--scheme", "eq2", "--a", "3", "--z", "10",
             "--x", "1x", "--y", "57", "--c", "4"]
        )
        assert code == 1


class TestBankAndCoins:
    @pytest.fixture
    def bank_file(self, tmp_path, capsys):
        path = str(tmp_path / "bank.json")
        code, _ = run(capsys, "bank", "keygen", "--bits", "64", "--out", path, "--seed", "1")
        assert code == 0
        return path

    def test_withdraw_verify_deposit_cycle(self, tmp_path, capsys, bank_file):
        coin = str(tmp_path / "coin.json")
        ledger = str(tmp_path / "ledger.txt")
        transcript = str(tmp_path / "transcript.vp1")
        code, _ = run(
            capsys, "coin", "withdraw", "--bank", bank_file, "--value", "2500",
            "--expiry", "2027-01-01", "--out", coin, "--seed", "2",
            "--transcript", transcript, "--channel-key", "00" * 16,
        )
        assert code == 0
        code, out = run(capsys, "coin", "verify", "--bank", bank_file, "--coin", coin)
        assert code == 0 and "valid" in out
        code, out = run(
            capsys, "coin", "deposit", "--bank", bank_file, "--coin", coin,
            "--ledger", ledger, "--date", "2026-01-01",
        )
        assert code == 0 and "accepted" in out
        code, out = run(
            capsys, "coin", "deposit", "--bank", bank_file, "--coin", coin,
            "--ledger", ledger, "--date", "2026-01-01",
        )
        assert code == 2 and "DoubleSpend" in out
        with open(transcript) as fh:
            assert len(fh.readlines()) == 6

    def test_tampered_coin_rejected(self, tmp_path, capsys, bank_file):
        coin_path = tmp_path / "coin.json"
        code, _ = run(
            capsys, "coin", "withdraw", "--bank", bank_file, "--value", "100",
            "--expiry", "2027-01-01", "--out", str(coin_path), "--seed", "3",
        )
        assert code == 0
        data = json.loads(coin_path.read_text())
        data["value_cents"] = 999999  # claim a bigger denomination
        coin_path.write_text(json.dumps(data))
        code, out = run(capsys, "coin", "verify", "--bank", bank_file, "--coin", str(coin_path))
        assert code == 2 and "invalid" in out


class TestAccountCommands:
    def register(self, capsys, tmp_path):
        state = str(tmp_path / "state")
        code, out = run(
            capsys, "account", "register", "--state", state,
            "--id", "alice", "--balance", "50000", "--seed", "4",
        )
        assert code == 0
        return state, json.loads(out)

    def derive(self, secret, salt, c=3):
        z = secret["z"]
        x = vpass.parse_digits(secret["password"], z)
        y = vpass.parse_digits(salt, z)
        f = vpass.VirtualFunction(a=secret["a"], z=z)
        return vpass.render_digits(vpass.derive_eq2(x, y, f, c), z)

    def test_full_account_lifecycle(self, capsys, tmp_path):
        state, registered = self.register(capsys, tmp_path)
        secret = registered["secret"]
        salt = "314159"
        password = self.derive(secret, salt)
        code, _ = run(
            capsys, "account", "set-limit", "--state", state, "--id", "alice",
            "--limit", "10000", "--salt", salt, "--password", password,
        )
        assert code == 0
        salt2 = "271828"
        code, out = run(
            capsys, "account", "issue-credential", "--state", state, "--id", "alice",
            "--salt", salt2, "--password", self.derive(secret, salt2, c=8),
        )
        assert code == 0
        credential = json.loads(out)
        code, out = run(
            capsys, "account", "pay", "--state", state, "--id", "alice",
            "--random-number", credential["random_number"],
            "--password", credential["temp_password"],
            "--merchant", "books", "--amount", "6000",
        )
        assert code == 0 and json.loads(out)["outcome"] == "approved"
        code, out = run(
            capsys, "account", "pay", "--state", state, "--id", "alice",
            "--random-number", credential["random_number"],
            "--password", credential["temp_password"],
            "--merchant", "books", "--amount", "5000",
        )
        assert code == 2 and json.loads(out)["reason"] == "OverLimit"

    def test_wrong_password_rejected(self, capsys, tmp_path):
        state, registered = self.register(capsys, tmp_path)
        code, out = run(
            capsys, "account", "set-limit", "--state", state, "--id", "alice",
            "--limit", "100", "--salt", "000000", "--password", "000000",
        )
        assert code == 2

    def test_duplicate_register_is_error(self, capsys, tmp_path):
        state, _ = self.register(capsys, tmp_path)
        code = main(
            ["account", "register", "--state", state, "--id", "alice", "--balance", "1"]
        )
        assert code == 1


class TestAttackCommand:
    def test_report_files_written(self, capsys, tmp_path):
        out_dir = str(tmp_path / "report")
        code, out = run(
            capsys, "attack", "--scheme", "both", "--observations", "2",
            "--trials", "60", "--seed", "0", "--z", "10", "--n", "4",
            "--out-dir", out_dir,
        )
        assert code == 0
        assert (tmp_path / "report" / "attack_report.csv").exists()
        assert (tmp_path / "report" / "success_rates.png").stat().st_size > 1000
        assert (tmp_path / "report" / "recovery_stats.png").stat().st_size > 1000
        lines = (tmp_path / "report" / "attack_report.csv").read_text().splitlines()
        assert len(lines) == 1 + 6  # header + 2 schemes * m in {0,1,2}
        assert lines[0].startswith("scheme,adversary,observations,trials")

    def test_eq1_phisher_wins_in_table(self, capsys):
        code, out = run(
            capsys, "attack", "--scheme", "eq1", "--observations", "2",
            "--trials", "50", "--seed", "1", "--n", "4",
        )
        assert code == 0
        last = [l for l in out.splitlines() if l.startswith("linear")][-1]
        assert " 1.000000" in last


class TestEntryPoint:
    def test_console_script(self):
        result = subprocess.run(
            [sys.executable, "-m", "epay.cli", "vpass", "derive", "--scheme", "eq2",
             "--a", "3", "--z", "10", "--x", "12", "--y", "57", "--c", "4"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert result.stdout.strip() == "45"
