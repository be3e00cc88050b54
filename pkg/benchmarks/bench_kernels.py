"""Benchmark the compiled Chebyshev kernel against the pure-python fallback.

Builds the full Hamiltonian at a few sizes, runs a fixed number of
Chebyshev propagation steps with each kernel, and reports wall time and
the max deviation between the two results.

Usage: python3 benchmarks/bench_kernels.py [--sizes 3 4] [--steps 20]
"""
import argparse
import time

import numpy as np

from spinbath import chebyshev, model
from spinbath._kernels import KERNEL, py_kernel


def run_one(L: int, steps: int, dt: float = 0.5):
    lat = model.LatticeSpec(L)
    cpl = model.CouplingSpec()
    hb = model.build_bath_hamiltonian(lat, cpl)
    hs = model.build_system_hamiltonian(cpl, n_spins=lat.N)
    hi = model.build_interaction_hamiltonian(lat)
    op = model.assemble_total(hs, hb, hi, lam=0.2)
    plan = chebyshev.plan_propagator(op, dt)
    coeffs = np.ascontiguousarray(plan.coeffs, dtype=np.complex128)

    rng = np.random.default_rng(7)
    psi0 = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
    psi0 /= np.linalg.norm(psi0)

    results = {}

    if KERNEL == "compiled":
        psi = psi0.copy()
        t0 = time.perf_counter()
        for _ in range(steps):
            psi = chebyshev.step(plan, op, psi)
        results["compiled"] = (time.perf_counter() - t0, psi)
    else:
        results["compiled"] = (None, None)

    psi = psi0.copy()
    t0 = time.perf_counter()
    for _ in range(steps):
        psi = py_kernel.cheb_apply_csr(op.matrix, plan.b, 1.0 / plan.a,
                                       coeffs, psi, plan.phase)
    results["python"] = (time.perf_counter() - t0, psi)
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 4],
                    help="lattice lengths L (N = 3L + 1 spins)")
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()

    print(f"active kernel: {KERNEL}")
    print(f"{'N':>4} {'dim':>8} {'compiled [s]':>13} {'python [s]':>11} "
          f"{'speedup':>8} {'max dev':>10}")
    for L in args.sizes:
        res = run_one(L, args.steps)
        n = 3 * L + 1
        dim = 2 ** n
        wc, psic = res["compiled"]
        wp, psip = res["python"]
        if wc is None:
            print(f"{n:>4} {dim:>8} {'(not built)':>13} {wp:>11.3f} "
                  f"{'-':>8} {'-':>10}")
        else:
            dev = float(np.abs(psic - psip).max())
            print(f"{n:>4} {dim:>8} {wc:>13.3f} {wp:>11.3f} "
                  f"{wp / wc:>8.2f} {dev:>10.2e}")


if __name__ == "__main__":
    main()
