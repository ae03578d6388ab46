"""Command-line front end.

Exit codes: 0 ok, 2 invalid input or parameters, 3 a proof failed
verification, 4 file I/O or a corrupt ledger record.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import zkp
from .bench import KINDS, bench
from .commit import KeyPair, PublicKeys, commit_tx, expand_keys
from .ledger import Ledger, LedgerError, LedgerFile, LedgerIOError, TxRejected, pp_seed, setup
from .params import ParamSet, load_params, validate
from .ring import RingArray, get_ring
from .sampling import Rng, chi_ring

EXIT_OK, EXIT_INVALID, EXIT_REJECTED, EXIT_IO = 0, 2, 3, 4
KEY_FORMAT = "latledger-key/1"


class CliError(Exception):
    def __init__(self, code: int, msg: str, **extra):
        super().__init__(msg)
        self.code, self.extra = code, extra


# -- helpers --------------------------------------------------------------------

def _params(args) -> ParamSet:
    try:
        p = load_params(args.params)
    except (OSError, ValueError, TypeError) as exc:
        raise CliError(EXIT_INVALID, f"cannot load parameters {args.params!r}: {exc}")
    ok = validate(p)
    if not ok:
        raise CliError(EXIT_INVALID, f"invalid parameters: {ok}")
    return p


def _ints(text: str, what: str) -> list:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise CliError(EXIT_INVALID, f"{what} must be comma separated integers")


def _key_dir(args) -> str:
    return args.keys or args.ledger + ".keys"


def write_keyfile(path: str, party: int, kp: KeyPair, led: Ledger):
    doc = {
        "format": KEY_FORMAT,
        "party": party,
        "params": led.params.name,
        "ledger_seed": led.seed.hex(),
        "secret": {name: getattr(kp, name).to_bytes(signed=True).hex() for name in ("s1", "e1", "s2", "e2")},
    }
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    with os.fdopen(fd, "w") as fh:
        json.dump(doc, fh, indent=1)


def read_keyfile(path: str, keys: PublicKeys):
    """Returns (party index, KeyPair)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read key file {path}: {exc}")
    except ValueError:
        raise CliError(EXIT_INVALID, f"{path} is not a key file")
    if doc.get("format") != KEY_FORMAT:
        raise CliError(EXIT_INVALID, f"{path} is not a key file")
    R, p = keys.ring, keys.params
    try:
        sec = {n: RingArray.from_bytes(R, bytes.fromhex(doc["secret"][n]), (p.kappa if n[0] == "s" else p.m,),
                                       signed=True)
               for n in ("s1", "e1", "s2", "e2")}
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_INVALID, f"malformed key file {path}: {exc}")
    At = keys.A.T
    kp = KeyPair(sec["s1"], sec["e1"], sec["s2"], sec["e2"], At @ sec["s1"] + sec["e1"], At @ sec["s2"] + sec["e2"])
    return int(doc["party"]), kp


def _load(args, verify: bool = False, on_tx=None) -> Ledger:
    if not os.path.exists(args.ledger):
        raise CliError(EXIT_IO, f"no ledger at {args.ledger}")
    return LedgerFile(args.ledger).load(verify_txs=verify, on_tx=on_tx)


def _parse_values(args, led: Ledger):
    n, k = led.n_parties, led.n_assets
    if args.values and args.transfer:
        raise CliError(EXIT_INVALID, "give --values or --transfer, not both")
    if args.values:
        flat = _ints(args.values, "--values")
        if len(flat) != n * k:
            raise CliError(EXIT_INVALID, f"--values needs {n * k} entries (asset-major)")
        return np.array(flat, dtype=object).reshape(k, n)
    if not args.transfer:
        raise CliError(EXIT_INVALID, "nothing to do: give --values or --transfer")
    vals = np.zeros((k, n), dtype=object)
    for spec in args.transfer:
        try:
            src, dst, asset, amount = (int(x) for x in spec.split(":"))
        except ValueError:
            raise CliError(EXIT_INVALID, f"bad transfer {spec!r}, want src:dst:asset:amount")
        if not (0 <= src < n and 0 <= dst < n and 0 <= asset < k) or amount < 0:
            raise CliError(EXIT_INVALID, f"transfer {spec!r} out of range")
        vals[asset][src] -= amount
        vals[asset][dst] += amount
    return vals


# -- commands -------------------------------------------------------------------

def cmd_params(args):
    p = _params(args)
    R = get_ring(p)
    return {"name": p.name, "q": str(p.q), "q_bits": p.q.bit_length(), "d": p.d, "l": p.l,
            "kappa": p.kappa, "lambda": p.lam, "m": p.m, "omega": p.omega, "sqrt_q": str(p.sqrt_q),
            "value_bits": p.value_bits, "beta_bits": p.beta_bits, "backend": R.kernels.NAME,
            "valid": True}


def cmd_setup(args):
    p = _params(args)
    genesis = _ints(args.genesis, "--genesis")
    if args.parties * args.assets != len(genesis):
        raise CliError(EXIT_INVALID, f"--genesis needs {args.parties * args.assets} values (asset-major)")
    if os.path.exists(args.ledger):
        raise CliError(EXIT_IO, f"{args.ledger} already exists")
    kdir = _key_dir(args)
    t = time.perf_counter()
    led, sks = setup(args.parties, genesis, p, args.seed.encode(), compact=args.compact, n_assets=args.assets)
    try:
        os.makedirs(kdir, mode=0o700, exist_ok=True)
        paths = []
        for i, kp in enumerate(sks):
            path = os.path.join(kdir, f"party{i}.key")
            write_keyfile(path, i, kp, led)
            paths.append(path)
        LedgerFile(args.ledger).create(led)
    except FileExistsError as exc:
        raise CliError(EXIT_IO, f"refusing to overwrite {exc.filename}")
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    header = hashlib.sha3_256(led.header_bytes()).hexdigest()
    return {"ledger": args.ledger, "parties": list(range(args.parties)), "keyfiles": paths,
            "assets": args.assets, "compact": args.compact, "header_sha3": header,
            "seconds": round(time.perf_counter() - t, 3)}


def cmd_tx(args):
    led = _load(args)
    vals = _parse_values(args, led)
    sks = {}
    for path in args.key or []:
        party, kp = read_keyfile(path, led.keys)
        sks[party] = kp
    if args.strict:
        led.check_values(vals)
    t = time.perf_counter()
    # the honest-caller checks are skipped on purpose: the verifier decides
    tx = led.create_tx(vals, sks, Rng(), force=True)
    built = time.perf_counter() - t
    verdict = led.verify_tx(tx)
    if not verdict:
        raise CliError(EXIT_REJECTED, f"transaction rejected: {verdict.failed} {verdict.detail}",
                       failed=verdict.failed)
    led.apply(tx)
    try:
        LedgerFile(args.ledger).append_tx(tx)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    timings = {k: round(1000 * sum(v) / len(v), 2) for k, v in tx.timings.items()}
    return {"tx": len(led.txs) - 1, "bytes": len(tx.to_bytes()), "build_s": round(built, 3),
            "mean_prove_ms": timings}


def cmd_verify(args):
    report = []

    def on_tx(rec, index, verdict):
        report.append({"tx": index, "record": rec, "ok": bool(verdict),
                       "failed": None if verdict else verdict.failed})

    try:
        led = _load(args, verify=True, on_tx=on_tx)
    except LedgerIOError as exc:
        bad = [r for r in report if not r["ok"]]
        if bad:
            raise CliError(EXIT_REJECTED, f"transaction {bad[0]['tx']} fails {bad[0]['failed']}",
                           record=exc.record, report=report)
        raise CliError(EXIT_IO, f"corrupt ledger: {exc}", record=exc.record, report=report)
    return {"transactions": len(led.txs), "all_ok": True, "report": report}


def cmd_balance(args):
    led = _load(args)
    party, kp = read_keyfile(args.key, led.keys)
    if not 0 <= args.asset < led.n_assets:
        raise CliError(EXIT_INVALID, f"asset {args.asset} out of range")
    return {"party": party, "asset": args.asset, "balance": led.check_balance(kp, party, args.asset)}


def cmd_bench(args):
    p = _params(args)
    kinds = args.kind or list(KINDS)
    for k in kinds:
        if k not in KINDS:
            raise CliError(EXIT_INVALID, f"unknown proof kind {k}; choose from {', '.join(KINDS)}")
    keys = expand_keys(p, pp_seed(args.seed.encode()))
    rows = bench(keys, kinds, args.n, args.seed)
    for r in rows:
        for f in ("prove_ms", "verify_ms", "attempts"):
            r[f] = round(r[f], 3)
    return {"params": p.name, "backend": keys.ring.kernels.NAME, "rows": rows}


def cmd_vectors(args):
    """Deterministic known-answer values for cross-implementation checks."""
    p = _params(args)
    seed = args.seed.encode()
    keys = expand_keys(p, pp_seed(seed))
    R = keys.ring
    rng = Rng(b"latledger/vectors" + seed)
    a, b = chi_ring(R, rng), chi_ring(R, rng)
    from .commit import keygen
    kp = keygen(keys, rng)
    r = chi_ring(R, rng, p.m)
    com = commit_tx(keys, kp.pk, R.const(5), r)
    stmt = zkp.BalanceStatement([com, commit_tx(keys, kp.pk, R.const(-5), -r)])
    proof = zkp.fiat_shamir("PoB", lambda: zkp.prove_pob(keys, stmt, R.zeros(p.m), rng))
    return {
        "params": p.name, "q": str(p.q), "pp_seed": keys.seed.hex(),
        "a": [int(x) for x in a.centered()], "b": [int(x) for x in b.centered()],
        "ab": [int(x) for x in (a * b).c], "ntt_a": [str(int(x)) for x in R.ntt(a).reshape(-1)],
        "commitment_sha3": hashlib.sha3_256(com.to_bytes()).hexdigest(),
        "pob_proof_sha3": hashlib.sha3_256(proof).hexdigest(), "pob_proof_bytes": len(proof),
    }


# -- output ---------------------------------------------------------------------

def _human(cmd: str, out: dict) -> str:
    if cmd == "bench":
        lines = [f"params={out['params']} backend={out['backend']}",
                 f"{'kind':6} {'n':>4} {'prove ms':>10} {'verify ms':>10} {'attempts':>9} {'bytes':>8}"]
        for r in out["rows"]:
            lines.append(f"{r['kind']:6} {r['n']:>4} {r['prove_ms']:>10.2f} {r['verify_ms']:>10.2f} "
                         f"{r['attempts']:>9.2f} {r['bytes']:>8}")
        return "\n".join(lines)
    if cmd == "balance":
        return str(out["balance"])
    if cmd == "verify":
        lines = [f"tx {r['tx']}: {'ok' if r['ok'] else 'FAIL ' + str(r['failed'])}" for r in out["report"]]
        return "\n".join(lines + [f"{out['transactions']} transactions verified"])
    if cmd == "tx":
        t = ", ".join(f"{k} {v} ms" for k, v in out["mean_prove_ms"].items())
        return f"appended tx {out['tx']} ({out['bytes']} bytes, built in {out['build_s']} s; {t})"
    if cmd == "setup":
        return "\n".join([f"created {out['ledger']}"] + [f"participant {i}: {k}" for i, k in
                                                         zip(out["parties"], out["keyfiles"])])
    return "\n".join(f"{k}: {v}" for k, v in out.items())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", default="desk", help="named set (desk or paper) or a JSON parameter file")
    common.add_argument("--ledger", default="ledger.bin")
    common.add_argument("--seed", default="latledger")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    ap = argparse.ArgumentParser(prog="latledger", parents=[common], description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("params", parents=[common], help="show and validate a parameter set")
    s = sub.add_parser("setup", parents=[common], help="create a ledger and participant key files")
    s.add_argument("--parties", type=int, required=True)
    s.add_argument("--assets", type=int, default=1)
    s.add_argument("--genesis", required=True, help="asset-major comma separated amounts")
    s.add_argument("--compact", action="store_true", help="all assets in one commitment per party")
    s.add_argument("--keys", help="key directory (default <ledger>.keys)")
    t = sub.add_parser("tx", parents=[common], help="build, verify and append a transaction")
    t.add_argument("--values", help="asset-major comma separated amounts, one per (asset, party)")
    t.add_argument("--transfer", action="append", help="src:dst:asset:amount (repeatable)")
    t.add_argument("--key", action="append", help="key file of a spending participant (repeatable)")
    t.add_argument("--strict", action="store_true", help="refuse unbalanced amounts before proving")
    sub.add_parser("verify", parents=[common], help="re-verify every transaction")
    b = sub.add_parser("balance", parents=[common], help="decrypt a participant's balance")
    b.add_argument("--key", required=True)
    b.add_argument("--asset", type=int, default=0)
    be = sub.add_parser("bench", parents=[common], help="mean prove/verify time per proof kind")
    be.add_argument("--kind", action="append", help=f"one of {', '.join(KINDS)} (repeatable; default all)")
    be.add_argument("-n", type=int, default=10)
    sub.add_parser("vectors", parents=[common], help="emit known-answer test vectors")
    return ap


COMMANDS = {"params": cmd_params, "setup": cmd_setup, "tx": cmd_tx, "verify": cmd_verify,
            "balance": cmd_balance, "bench": cmd_bench, "vectors": cmd_vectors}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out, code = COMMANDS[args.cmd](args), EXIT_OK
    except CliError as exc:
        out, code = dict(exc.extra, error=str(exc)), exc.code
    except TxRejected as exc:
        out, code = {"error": f"transaction rejected: {exc.verdict.failed}", "failed": exc.verdict.failed}, EXIT_REJECTED
    except LedgerIOError as exc:
        out, code = {"error": str(exc), "record": exc.record}, EXIT_IO
    except (LedgerError, ValueError) as exc:
        out, code = {"error": str(exc)}, EXIT_INVALID
    except OSError as exc:
        out, code = {"error": str(exc)}, EXIT_IO
    if args.json:
        print(json.dumps(dict(out, command=args.cmd, ok=code == EXIT_OK, exit=code), sort_keys=True, default=str))
    elif code == EXIT_OK:
        print(_human(args.cmd, out))
    else:
        print(f"error: {out['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
