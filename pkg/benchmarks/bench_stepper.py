#!/usr/bin/env python3
"""Time the implicit-midpoint sweep on the numpy and numba backends.

Builds a 64-element patch model with dynamic charge, integrates ~2000 steps,
and reports the best wall time per backend plus their trajectory agreement.

Usage:
    python benchmarks/bench_stepper.py [--elements N] [--steps N] [--repeats N]
"""

import argparse
import time

import numpy as np

from piezobeam.assembly import build_system
from piezobeam.kernels import HAS_NUMBA
from piezobeam.materials import (
    BeamGeometry,
    MaterialParams,
    ModelSpec,
    Regime,
    Variant,
    VoltageSignal,
    validate_spec,
)
from piezobeam.solvers import simulate

BEAM = MaterialParams(rho=1.0, c11=2.0, c55=1.0, gamma31=0.7, gamma15=0.3,
                      eps1=1.2, eps3=0.8, mu=0.5)
PATCH = MaterialParams(rho=1.4, c11=3.0, c55=1.2, gamma31=0.9, gamma15=0.2,
                       eps1=1.0, eps3=0.6, mu=0.8)
GEO = BeamGeometry(length=1.0, core_half_thickness=0.05, patch_thickness=0.03,
                   patch_start=0.25, patch_end=0.75)


def build(n_elements: int):
    spec = ModelSpec(
        variant=Variant.PATCH_MT,
        regime=Regime.FULL_MAGNETIC,
        beam_material=BEAM,
        patch_material=PATCH,
        geometry=GEO,
        voltage=(VoltageSignal.sinusoid(1.0, 3.0),
                 VoltageSignal.sinusoid(-0.5, 2.0)),
    )
    return build_system(validate_spec(spec), n_elements)


def bench(system, x0, v0, dt, t_end, backend, repeats):
    best = np.inf
    traj = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj = simulate(system, x0, v0, dt=dt, t_end=t_end, stride=100,
                        backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, traj


def run_case(n_elements: int, n_steps: int, repeats: int, backends) -> None:
    system = build(n_elements)
    rng = np.random.default_rng(7)
    x0 = 0.01 * rng.standard_normal(system.n_dofs)
    v0 = 0.01 * rng.standard_normal(system.n_dofs)
    dt = 1e-3
    t_end = n_steps * dt
    if "numba" in backends:
        # trigger JIT compilation outside the timed region
        simulate(system, x0, v0, dt=dt, t_end=10 * dt, backend="numba")

    times, trajs = {}, {}
    for backend in backends:
        times[backend], trajs[backend] = bench(
            system, x0, v0, dt, t_end, backend, repeats)
    gap = (np.abs(trajs["numba"].X - trajs["numpy"].X).max()
           if len(backends) == 2 else float("nan"))
    for backend in backends:
        rate = n_steps / times[backend]
        rel = times["numpy"] / times[backend]
        print(f"{n_elements:>9} {system.n_dofs:>6} {n_steps:>7} {backend:<7}"
              f"{times[backend]:>10.4f} {rate:>12.0f} {rel:>8.1f}x"
              f"{gap:>12.2e}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--elements", type=int, default=None,
                    help="single mesh size (default: sweep 8, 24, 64)")
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"]
    if HAS_NUMBA:
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy backend only")

    if args.elements is not None:
        cases = [(args.elements, args.steps)]
    else:
        cases = [(8, 10 * args.steps), (24, 2 * args.steps), (64, args.steps)]

    print(f"best of {args.repeats} runs per case")
    print(f"{'elements':>9} {'dofs':>6} {'steps':>7} {'backend':<7}"
          f"{'time (s)':>10} {'steps/s':>12} {'speedup':>9} {'max |dX|':>12}")
    for n_elements, n_steps in cases:
        run_case(n_elements, n_steps, args.repeats, backends)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
