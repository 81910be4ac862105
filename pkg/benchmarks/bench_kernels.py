"""Time the compiled and pure-Python kernel backends on representative sizes.

    python benchmarks/bench_kernels.py [--repeat 20]

Prints one line per (kernel, backend) with the best wall time per call,
plus an end-to-end trajectory timing with each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pawtime import kernels


def _cases(rng):
    states = np.ascontiguousarray(rng.standard_normal((512, 1024)) + 1j * rng.standard_normal((512, 1024)))
    h_states = np.ascontiguousarray(rng.standard_normal((512, 1024)) + 1j * rng.standard_normal((512, 1024)))
    weights = rng.uniform(size=1024)
    factor = np.exp(1j * rng.uniform(size=4096))
    psi = np.ascontiguousarray(rng.standard_normal(4096) + 1j * rng.standard_normal(4096))
    return {
        "weighted_abs2 (512x1024)": lambda k: k.weighted_abs2(states, weights),
        "multiply_inplace (4096)": lambda k: k.multiply_inplace(psi, factor),
        "residual_sq (512x1024)": lambda k: k.residual_sq(states, h_states, 0.01, 1.0),
    }


END_TO_END = """
import time, numpy as np
from pawtime import ClockGrid, GaussianParams, PotentialGrid, gaussian_packet, propagate_trajectory, BACKEND
from pawtime.dynamics import harmonic_potential
psi = gaussian_packet(GaussianParams(5.0, 0.0, 0.7071067811865476), -20.0, 20.0, 512)
h = PotentialGrid(1.0, harmonic_potential(psi.grid, 1.0, 1.0))
t0 = time.perf_counter()
propagate_trajectory(psi, h, ClockGrid(6 * np.pi, 512))
print(BACKEND, time.perf_counter() - t0)
"""


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    if len(backends) == 1:
        print("compiled backend not built; only timing the python fallback")
    cases = _cases(np.random.default_rng(0))
    for name, call in cases.items():
        times = {}
        for bname, mod in backends.items():
            times[bname] = min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
        line = "  ".join(f"{b}: {t * 1e3:8.3f} ms" for b, t in times.items())
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:28s} {line}  speedup x{speedup:.2f}")

    print("\nharmonic trajectory, 512 ticks x 512 points, dt_max = dt/8:")
    for forced in ("", "1"):
        env = dict(os.environ, PAWTIME_PURE_PYTHON=forced) if forced else dict(os.environ)
        env.pop("PAWTIME_PURE_PYTHON", None) if not forced else None
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:8s} {float(secs):.3f} s")


if __name__ == "__main__":
    main()
