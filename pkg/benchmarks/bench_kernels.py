"""Compare the compiled and numpy ensemble kernels (ns per trajectory-step).

    python benchmarks/bench_kernels.py [--family 2] [--n-traj 64] [--steps 20000]
"""
import argparse
import time

import numpy as np

from lgdopo.classical import DopoParams
from lgdopo.linear_quantum import QuadratureSelector
from lgdopo.stochastic import SimConfig, StateLayout, available_backends, classical_state, get_kernel
from lgdopo.stochastic.ensemble import _kernel_args
from lgdopo.stochastic.rng import trajectory_keys


def bench(backend, family, model, n_traj, n_steps, every=50):
    p = DopoParams(family, 2.0, 0.01, 100.0 if model == "full" else 1.0)
    L = StateLayout.build(family, model)
    kw = _kernel_args(SimConfig(p, model=model), L)
    sels = [QuadratureSelector(family, k, q) for k in "cs" for q in "xy"]
    proj = np.array([L.projection(s) for s in sels])
    _, adv = get_kernel(backend)
    state = np.tile(classical_state(p, model), (n_traj, 1))
    args = (trajectory_keys(0, range(n_traj)), np.zeros(n_traj, np.int64), n_steps, kw["dt"], kw["full"],
            p.sigma, p.g, p.gamma_ratio, kw["pair_l"], kw["pair_kappa"], kw["pair_off"], proj, every,
            np.zeros((n_traj, n_steps // every, len(sels)), complex), np.zeros((n_traj, L.dim), complex),
            np.zeros((n_traj, 2), complex), 1e9, np.zeros(n_traj, np.uint8))
    t0 = time.perf_counter()
    adv(state, *args)
    return (time.perf_counter() - t0) / (n_traj * n_steps) * 1e9


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", type=int, default=2)
    ap.add_argument("--n-traj", type=int, default=64)
    ap.add_argument("--steps", type=int, default=20000)
    a = ap.parse_args()
    print(f"{'backend':>8} {'model':>10} {'ns/traj-step':>13}")
    res = {}
    for model in ("adiabatic", "full"):
        for b in available_backends():
            # the numpy kernel pays per-step dispatch, so fewer steps keep it quick
            steps = a.steps if b == "cython" else max(a.steps // 10, 50)
            steps -= steps % 50
            res[b, model] = bench(b, a.family, model, a.n_traj, steps)
            print(f"{b:>8} {model:>10} {res[b, model]:13.1f}")
        if ("cython", model) in res:
            print(f"{'speedup':>8} {model:>10} {res['python', model] / res['cython', model]:12.1f}x")


if __name__ == "__main__":
    main()
