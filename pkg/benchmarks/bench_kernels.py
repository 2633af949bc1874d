"""Compare the numba and numpy RK4 kernels on the NOT-gate propagation.

    python benchmarks/bench_kernels.py [--repeat 3]

Each backend runs in its own interpreter because the choice is made at
import time through QDGATES_DISABLE_NUMBA.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, math, time
import numpy as np
from qdgates import _kernels
from qdgates.single_gate import MoleculeSpec, PulseSpec, simulate_pulse

spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
pulse = PulseSpec.from_rabi_energy(spec, {hbar_omega})
simulate_pulse(spec, pulse, [1, 0])  # warm-up (JIT compile or cache load)
times = []
for _ in range({repeat}):
    t0 = time.perf_counter()
    sim = simulate_pulse(spec, pulse, [1, 0])
    times.append(time.perf_counter() - t0)
print(json.dumps({{"backend": _kernels.BACKEND, "best_s": min(times), "steps": sim.nsteps,
                   "final": [[z.real, z.imag] for z in sim.final]}}))
"""


def run(disable: bool, repeat: int, hbar_omega: float) -> dict:
    env = dict(os.environ, QDGATES_DISABLE_NUMBA="1" if disable else "0")
    code = WORKER.format(repeat=repeat, hbar_omega=hbar_omega)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--hbar-omega", type=float, default=0.05, help="Rabi energy in meV")
    args = ap.parse_args(argv)
    fast = run(False, args.repeat, args.hbar_omega)
    slow = run(True, args.repeat, args.hbar_omega)
    diff = max(abs(complex(*a) - complex(*b)) for a, b in zip(fast["final"], slow["final"]))
    print(f"steps per run     {fast['steps']}")
    for r in (fast, slow):
        print(f"{r['backend']:<6} best of {args.repeat}: {r['best_s'] * 1e3:9.2f} ms")
    print(f"speed-up          {slow['best_s'] / fast['best_s']:.1f}x")
    print(f"max |psi| diff    {diff:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
