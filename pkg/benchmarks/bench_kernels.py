"""Compare the compiled mining-draw kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--steps N] [--no-sim]

Full-window timings use a threshold of one (a hit probability of about
1e-16), so every call scans the whole window,
which is the worst case for a miner waiting on its next block. The
end-to-end part runs a desk-scale simulation once per backend in a
subprocess (the backend is chosen at import time).
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

from chainsim import _kernels_py
from chainsim.rng import bernoulli_threshold

try:
    from chainsim import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

KEY = 0x9E3779B97F4A7C15
ROOT = Path(__file__).resolve().parents[1]

SIM_SNIPPET = """
import json, time
from chainsim import kernels
from chainsim.config import load_config
from chainsim.simulation import run
cfg = load_config({config!r}, ["total_steps={steps}"])
t0 = time.perf_counter()
report, events = run(cfg)
print(json.dumps({{"backend": kernels.BACKEND, "seconds": time.perf_counter() - t0,
                  "blocks": report.blocks_total, "events": len(events)}}))
"""


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(window: int) -> None:
    print(f"first_below over a {window:,}-draw window (no hit)")
    rows = [("numpy", _kernels_py.first_below)]
    if _kernels_c is not None:
        rows.insert(0, ("cython", _kernels_c.first_below))
    ref = None
    for name, fn in rows:
        t = best_of(lambda: fn(KEY, 0, window, 1))
        ref = ref or t
        print(f"  {name:<8} {t * 1e3:9.2f} ms  {window / t / 1e6:8.1f} M draws/s  x{t / ref:.1f}")
    small = min(window, 200_000)
    t = best_of(lambda: _kernels_py.first_below_scalar(KEY, 0, small, 1), repeat=1)
    print(f"  {'scalar':<8} {t * window / small * 1e3:9.2f} ms  {small / t / 1e6:8.1f} M draws/s  "
          f"x{t * window / small / ref:.1f} (extrapolated from {small:,} draws)")

    # typical call: find the next block at a 1-in-6000 per-step rate
    thr = bernoulli_threshold(1 / 6000)
    print("first_below until the next hit, p = 1/6000, 2,000 consecutive blocks")
    for name, fn in rows:
        def chain():
            pos = 0
            for _ in range(2000):
                pos = fn(KEY, pos, pos + 10**9, thr) + 1
        print(f"  {name:<8} {best_of(chain, repeat=3) * 1e3:9.2f} ms")
    if _kernels_c is None:
        print("  (compiled extension not built; only the fallback was timed)")


def bench_simulation(steps: int) -> None:
    config = str(ROOT / "configs" / "exp1_desk.yaml")
    print(f"end-to-end run of exp1_desk, {steps:,} steps")
    for forced in (False, True):
        env = dict(os.environ)
        env.pop("CHAINSIM_PURE_PYTHON", None)
        if forced:
            env["CHAINSIM_PURE_PYTHON"] = "1"
        out = subprocess.run(
            [sys.executable, "-c", SIM_SNIPPET.format(config=config, steps=steps)],
            env=env, capture_output=True, text=True, check=True,
        )
        r = json.loads(out.stdout.strip().splitlines()[-1])
        print(f"  {r['backend']:<8} {r['seconds']:7.2f} s  {r['blocks']} blocks, {r['events']} events")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--window", type=int, default=5_000_000)
    ap.add_argument("--steps", type=int, default=3_000_000)
    ap.add_argument("--no-sim", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.window)
    if not args.no_sim:
        bench_simulation(args.steps)


if __name__ == "__main__":
    main()
