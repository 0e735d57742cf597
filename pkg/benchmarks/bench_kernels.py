"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the individual kernels on typical per-step array sizes and a full
stepping loop under each backend.  Run:

    python3 benchmarks/bench_kernels.py [--n-nodes 257] [--steps 200]
"""

import argparse
import subprocess
import sys
import time

import numpy as np

from nsfslab._core import kernels_py

try:
    from nsfslab._core import _kernels as kernels_cy
except ImportError:
    kernels_cy = None


def time_fn(fn, *args, repeat=2000):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_kernels(n):
    rng = np.random.default_rng(0)
    rho = rng.uniform(0.5, 2.0, n)
    theta = rng.uniform(0.5, 2.0, n)
    dl = rng.uniform(-1, 1, n)
    du = rng.uniform(-1, 1, n)
    di = np.abs(dl) + np.abs(du) + 1.0
    rhs = rng.uniform(-1, 1, n)
    w = rho * (1.5 * theta + 1.5 * rho ** (2 / 3) + 0.5 * theta**4 / rho
               + 1e-3 * theta)
    z = rng.uniform(-0.2, 0.2, n)

    cases = {
        "thomas": (lambda m: m.thomas(dl, di, du, rhs),),
        "powerlaw_pes": (lambda m: m.powerlaw_pes(rho, theta, 1.0, 1.0, 0.5, 0.0),),
        "theta_from_heat": (lambda m: m.theta_from_heat(rho, w, 1e-3, 1.0, 1.0, 0.5),),
        "neg_part_smooth": (lambda m: m.neg_part_smooth(z, 64),),
    }
    print(f"\nkernel timings at n = {n} (microseconds per call)")
    print(f"{'kernel':<18}{'python':>10}{'cython':>10}{'speedup':>9}")
    for name, (call,) in cases.items():
        t_py = time_fn(call, kernels_py) * 1e6
        if kernels_cy is not None:
            t_cy = time_fn(call, kernels_cy) * 1e6
            print(f"{name:<18}{t_py:>10.2f}{t_cy:>10.2f}{t_py / t_cy:>8.1f}x")
        else:
            print(f"{name:<18}{t_py:>10.2f}{'n/a':>10}{'':>9}")


STEP_SNIPPET = r"""
import time
import numpy as np
from nsfslab import backend
from nsfslab import thermo as th
from nsfslab.discretization import Grid1D, build_basis, constant_boundary, make_state
from nsfslab.scheme import SchemeParams, Stepper

grid = Grid1D({n_cells}, 1.0)
basis = build_basis(grid, 4)
bd = constant_boundary(1.0, 1.0, 0.0)
eos = th.power_law_eos(a_rad=0.3)
tr = th.power_law_transport(mu0=0.05, kappa0=0.05)
params = SchemeParams(eps=1e-4, delta=1e-4, dt=1e-3, t_end={steps} * 1e-3)
st = Stepper(grid, basis, bd, eos, tr, params)
s0 = make_state(0.0, 1.0 + 0.1 * np.sin(2 * np.pi * grid.x),
                np.ones(grid.n_nodes), 0.05 * np.ones(4), basis, bd)
st.run(s0, stride=10**9)  # warm up numba-free paths and caches
t0 = time.perf_counter()
st.run(s0, stride=10**9)
print(f"{{backend():>8}}: {{(time.perf_counter() - t0) / {steps} * 1e3:.3f}} ms/step")
"""


def bench_stepping(n_cells, steps):
    print(f"\nfull stepping loop, {n_cells} cells x {steps} steps")
    snippet = STEP_SNIPPET.format(n_cells=n_cells, steps=steps)
    for env_backend in ("cython", "python"):
        env = {"NSFSLAB_BACKEND": env_backend}
        import os
        full_env = dict(os.environ, **env)
        subprocess.run([sys.executable, "-c", snippet], env=full_env,
                       check=True)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n-nodes", type=int, default=257)
    parser.add_argument("--steps", type=int, default=200)
    args = parser.parse_args()
    if kernels_cy is None:
        print("note: compiled kernels unavailable; showing fallback only")
    bench_kernels(args.n_nodes)
    bench_stepping(args.n_nodes - 1, args.steps)


if __name__ == "__main__":
    main()
