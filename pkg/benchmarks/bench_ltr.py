"""Benchmark the LambdaMART training kernels with and without the compiled
backend.

The backend choice is frozen at import time by MESHSUGGEST_NO_NUMBA, so the
comparison runs each mode in a child process over the same synthetic
workload and then checks that both modes write byte-identical model files.

    python3 benchmarks/bench_ltr.py
    python3 benchmarks/bench_ltr.py --groups 60 --group-size 40 --trees 120
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import subprocess
import sys
import tempfile
import time
from pathlib import Path


def build_groups(groups: int, group_size: int, seed: int):
    import numpy as np

    from meshsuggest.ranking import FEATURE_NAMES

    qce = FEATURE_NAMES.index("qce")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(groups):
        n_pos = 1 + (i % (group_size - 1))
        y = np.array([1] * n_pos + [0] * (group_size - n_pos), dtype=np.int64)
        X = rng.uniform(0.0, 5.0, size=(group_size, len(FEATURE_NAMES)))
        X[:, qce] = y
        out.append((X, y))
    return out


def run_child(args) -> None:
    from meshsuggest.ltr import TrainConfig, save_model, train_ranker
    from meshsuggest._kernels import NUMBA_ACTIVE

    groups = build_groups(args.groups, args.group_size, args.seed)
    config = TrainConfig(trees=args.trees, depth=args.depth, seed=args.seed)

    # first call includes any jit compilation; report it separately
    t0 = time.perf_counter()
    model = train_ranker(groups, config, method="bench")
    first_s = time.perf_counter() - t0

    timings = []
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        model = train_ranker(groups, config, method="bench")
        timings.append(time.perf_counter() - t0)

    save_model(model, args.out)
    print(json.dumps({
        "numba_active": NUMBA_ACTIVE,
        "first_s": first_s,
        "train_s": timings,
    }))


def run_mode(no_numba: bool, args, out: Path) -> dict:
    env = dict(os.environ)
    env["MESHSUGGEST_NO_NUMBA"] = "1" if no_numba else "0"
    cmd = [sys.executable, __file__, "--child", "--out", str(out),
           "--groups", str(args.groups), "--group-size", str(args.group_size),
           "--trees", str(args.trees), "--depth", str(args.depth),
           "--seed", str(args.seed), "--repeats", str(args.repeats)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True,
                          check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--groups", type=int, default=24)
    parser.add_argument("--group-size", type=int, default=24)
    parser.add_argument("--trees", type=int, default=40)
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--out", type=Path, help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.child:
        run_child(args)
        return 0

    workload = (f"{args.groups} groups x {args.group_size} instances, "
                f"{args.trees} trees, depth {args.depth}, "
                f"best of {args.repeats}")
    print(f"workload: {workload}")
    with tempfile.TemporaryDirectory() as tmp:
        jit_out = Path(tmp) / "jit.json"
        plain_out = Path(tmp) / "plain.json"
        jit = run_mode(no_numba=False, args=args, out=jit_out)
        plain = run_mode(no_numba=True, args=args, out=plain_out)

        rows = [("compiled kernels" if r["numba_active"] else "plain numpy",
                 r["first_s"], min(r["train_s"]),
                 statistics.mean(r["train_s"])) for r in (jit, plain)]
        print(f"{'backend':>18}  {'first(s)':>9}  {'best(s)':>9}  {'mean(s)':>9}")
        for name, first, best, mean in rows:
            print(f"{name:>18}  {first:>9.3f}  {best:>9.3f}  {mean:>9.3f}")

        if not jit["numba_active"]:
            print("note: numba unavailable; both rows ran the numpy path")
        else:
            speedup = min(plain["train_s"]) / min(jit["train_s"])
            print(f"speedup (plain/compiled, best): {speedup:.1f}x")

        identical = jit_out.read_bytes() == plain_out.read_bytes()
        print(f"model files byte-identical across backends: {identical}")
        return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
