import json
import os
import stat
import subprocess
import sys

import pytest

from latledger.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_REJECTED, main


def run(capsys, *argv):
    code = main(list(argv) + ["--json"])
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


@pytest.fixture
def ledger(tmp_path, capsys):
    path = str(tmp_path / "l.bin")
    code, out = run(capsys, "setup", "--ledger", path, "--parties", "3", "--assets", "2",
                    "--genesis", "10,0,4,0,8,0", "--seed", "cli")
    assert code == EXIT_OK, out
    return path, out


def test_params(capsys):
    code, out = run(capsys, "params", "--params", "paper")
    assert code == EXIT_OK and out["q_bits"] == 101 and out["d"] == 256 and out["backend"] in ("wide", "pure")
    code, out = run(capsys, "params")
    assert out["name"] == "desk" and out["valid"]


def test_bad_params(capsys, tmp_path):
    bad = tmp_path / "p.json"
    bad.write_text("{}")
    code, out = run(capsys, "params", "--params", str(bad))
    assert code == EXIT_INVALID and not out["ok"]


def test_setup_writes_private_keys(ledger):
    path, out = ledger
    assert os.path.exists(path) and os.path.exists(path + ".idx")
    assert len(out["keyfiles"]) == 3
    for kf in out["keyfiles"]:
        assert stat.S_IMODE(os.stat(kf).st_mode) == 0o600
        assert json.load(open(kf))["format"] == "latledger-key/1"


def test_setup_is_deterministic(tmp_path, capsys):
    heads = []
    for name in ("a", "b"):
        code, out = run(capsys, "setup", "--ledger", str(tmp_path / name), "--parties", "2",
                        "--genesis", "1,2", "--seed", "same")
        heads.append(out["header_sha3"])
    assert heads[0] == heads[1]


def test_setup_refuses_overwrite(ledger, capsys):
    path, _ = ledger
    code, out = run(capsys, "setup", "--ledger", path, "--parties", "3", "--assets", "2",
                    "--genesis", "10,0,4,0,8,0")
    assert code == EXIT_IO


def test_setup_bad_genesis(tmp_path, capsys):
    code, _ = run(capsys, "setup", "--ledger", str(tmp_path / "x"), "--parties", "2", "--genesis", "1")
    assert code == EXIT_INVALID
    code, _ = run(capsys, "setup", "--ledger", str(tmp_path / "y"), "--parties", "2", "--genesis", "1,-1")
    assert code == EXIT_INVALID


def test_transfer_verify_balance(ledger, capsys):
    path, out = ledger
    keys = out["keyfiles"]
    code, tx = run(capsys, "tx", "--ledger", path, "--transfer", "0:1:0:3", "--key", keys[0])
    assert code == EXIT_OK and tx["tx"] == 0
    code, tx = run(capsys, "tx", "--ledger", path, "--values", "0,0,0,0,-2,2", "--key", keys[1])
    assert code == EXIT_OK and tx["tx"] == 1
    balances = [run(capsys, "balance", "--ledger", path, "--key", keys[i], "--asset", str(a))[1]["balance"]
                for a in range(2) for i in range(3)]
    # genesis is asset-major: asset 0 holds (10, 0, 4), asset 1 holds (0, 8, 0)
    assert balances == [7, 3, 4, 0, 6, 2]
    code, rep = run(capsys, "verify", "--ledger", path)
    assert code == EXIT_OK and rep["transactions"] == 2 and all(r["ok"] for r in rep["report"])


def test_overspend_rejected(ledger, capsys):
    path, out = ledger
    code, res = run(capsys, "tx", "--ledger", path, "--transfer", "1:0:0:1", "--key", out["keyfiles"][1])
    assert code == EXIT_REJECTED and res["failed"].startswith("PoA[")
    code, rep = run(capsys, "verify", "--ledger", path)
    assert rep["transactions"] == 0


def test_unbalanced(ledger, capsys):
    path, _ = ledger
    code, res = run(capsys, "tx", "--ledger", path, "--values", "0,1,0,0,0,0")
    assert code == EXIT_REJECTED and res["failed"].startswith("PoB[")
    code, res = run(capsys, "tx", "--ledger", path, "--values", "0,1,0,0,0,0", "--strict")
    assert code == EXIT_INVALID


def test_tx_argument_errors(ledger, capsys):
    path, out = ledger
    assert run(capsys, "tx", "--ledger", path)[0] == EXIT_INVALID
    assert run(capsys, "tx", "--ledger", path, "--values", "1,2")[0] == EXIT_INVALID
    assert run(capsys, "tx", "--ledger", path, "--transfer", "0:9:0:1")[0] == EXIT_INVALID
    assert run(capsys, "tx", "--ledger", path, "--transfer", "bogus")[0] == EXIT_INVALID
    assert run(capsys, "tx", "--ledger", path, "--transfer", "0:1:0:1", "--key", "/nonexistent")[0] == EXIT_IO
    code, res = run(capsys, "tx", "--ledger", path, "--transfer", "0:1:0:1", "--key", out["keyfiles"][1])
    assert code == EXIT_INVALID and "missing secret key" in res["error"]


def test_balance_errors(ledger, capsys, tmp_path):
    path, out = ledger
    assert run(capsys, "balance", "--ledger", path, "--key", out["keyfiles"][0], "--asset", "5")[0] == EXIT_INVALID
    junk = tmp_path / "junk.key"
    junk.write_text("{}")
    assert run(capsys, "balance", "--ledger", path, "--key", str(junk))[0] == EXIT_INVALID
    assert run(capsys, "balance", "--ledger", str(tmp_path / "none"), "--key", out["keyfiles"][0])[0] == EXIT_IO


def test_corrupt_ledger(ledger, capsys):
    path, _ = ledger
    data = bytearray(open(path, "rb").read())
    data[-10] ^= 1
    open(path, "wb").write(bytes(data))
    code, res = run(capsys, "verify", "--ledger", path)
    assert code == EXIT_IO and res["record"] is not None


def test_bench_and_vectors(capsys):
    code, out = run(capsys, "bench", "--kind", "PoB", "--kind", "PoA", "-n", "2")
    assert code == EXIT_OK and [r["kind"] for r in out["rows"]] == ["PoB", "PoA"]
    assert run(capsys, "bench", "--kind", "PoZ")[0] == EXIT_INVALID
    code, v1 = run(capsys, "vectors")
    code, v2 = run(capsys, "vectors")
    assert v1 == v2 and len(v1["ab"]) == 64


def test_human_output(capsys):
    assert main(["bench", "--kind", "PoB", "-n", "1"]) == EXIT_OK
    assert "PoB" in capsys.readouterr().out


def test_entry_point_subprocess():
    res = subprocess.run([sys.executable, "-m", "latledger.cli", "params", "--json"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["name"] == "desk"
