"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--reps N] [--json]

For each parameter set, times the forward NTT, a ring product and a
16 x 35 matrix-vector product on every available backend. Before timing,
it checks that the backends agree exactly.
"""

import argparse
import json
import timeit

import numpy as np

from latledger.params import desk_params, paper_params
from latledger.ring import Ring, RingArray, _core, _pure, _wide
from latledger.sampling import Rng, uniform_ring


def backends_for(q):
    out = [("pure", _pure)]
    if _core is not None and q < (1 << 62):
        out.insert(0, ("core", _core))
    if _wide is not None and (1 << 62) <= q and q.bit_length() <= _wide.MAX_BITS:
        out.insert(0, ("wide", _wide))
    return out


def run(params, reps):
    rng = Rng(b"bench-kernels")
    rows, ref = [], None
    base = Ring(params, backend=_pure)
    a, b = uniform_ring(base, rng), uniform_ring(base, rng)
    M, v = uniform_ring(base, rng, 16, 35), uniform_ring(base, rng, 35)
    for name, mod in backends_for(params.q):
        R = Ring(params, backend=mod)
        A, B = RingArray(R, a.c), RingArray(R, b.c)
        MM, vv = RingArray(R, M.c), RingArray(R, v.c)
        got = ((A * B).c, (MM @ vv).c)
        if ref is None:
            ref = got
        elif not all(np.array_equal(np.asarray(x, dtype=object), np.asarray(y, dtype=object))
                     for x, y in zip(got, ref)):
            raise SystemExit(f"backend {name} disagrees at {params.name}")
        ops = {
            "ntt": lambda: R.ntt_blocks(A.c),
            "mul": lambda: RingArray(R, A.c) * RingArray(R, B.c),
            "matvec_16x35": lambda: RingArray(R, MM.c) @ RingArray(R, vv.c),
        }
        for op, fn in ops.items():
            n = max(1, reps // (35 if op.startswith("matvec") else 1))
            t = min(timeit.repeat(fn, number=n, repeat=3)) / n
            rows.append({"params": params.name, "backend": name, "op": op, "us": round(1e6 * t, 1)})
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = run(desk_params(), args.reps) + run(paper_params(), max(1, args.reps // 10))
    if args.json:
        print(json.dumps(rows, indent=1))
        return
    speed = {}
    for r in rows:
        speed.setdefault((r["params"], r["op"]), {})[r["backend"]] = r["us"]
    print(f"{'params':6} {'op':14} {'backend':8} {'us/op':>12} {'vs pure':>8}")
    for r in rows:
        pure = speed[(r["params"], r["op"])]["pure"]
        print(f"{r['params']:6} {r['op']:14} {r['backend']:8} {r['us']:>12.1f} {pure / r['us']:>7.1f}x")


if __name__ == "__main__":
    main()
