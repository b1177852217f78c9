"""Compare the compiled and numpy replica kernels.

    python3 benchmarks/bench_backends.py [--repeat 3] [--scale 1.0]

Each case runs through the public estimators with ``backend=`` forced, so the
timings include the same driver overhead users see.  The relative
difference of the two means is reported next to the speedup.
"""
from __future__ import annotations

import argparse
import time


from spde_moments import _backend, fieldsim, moment_mc
from spde_moments.model import DO, Bounded, EquationSpec, Generalized, NoiseSpec, Riesz

BUMP = Bounded(1.0, "gaussian-bump", 1.0)


def cases(scale: float):
    R = lambda n: max(2, int(n * scale))
    yield ("heat n=2 const, t=2", lambda b: moment_mc.second_moment_heat_mc(
        EquationSpec("heat"), NoiseSpec(DO(0.75), Bounded(1.0)), 2.0, 0.0, 0.0, R(100_000), 1, backend=b))
    yield ("heat n=4 bump, t=1", lambda b: moment_mc.nth_moment_heat_mc(
        EquationSpec("heat"), NoiseSpec(DO(0.6), BUMP), 1.0, 0.0, 4, R(50_000), 1, backend=b))
    yield ("heat n=3 riesz d=2, t=1", lambda b: moment_mc.nth_moment_heat_mc(
        EquationSpec("heat", 2), NoiseSpec(DO(0.6), Riesz(0.5)), 1.0, 0.0, 3, R(50_000), 1, backend=b))
    yield ("wave n=2 bump d=3, t=1", lambda b: moment_mc.second_moment_wave_mc(
        EquationSpec("wave", 3), NoiseSpec(DO(0.6), BUMP), 1.0, 0.0, 0.0, R(100_000), 1, backend=b))
    yield ("fk k=3 bump, 64 steps", lambda b: moment_mc.fk_moment_generalized_mc(
        NoiseSpec(Generalized(0.25, -0.5), BUMP), 3, 1.0, R(2_000), 64, 1, backend=b))


def run(fn, backend, repeat):
    best, est = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        est = fn(backend)
        best = min(best, time.perf_counter() - t0)
    return best, est


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply replica counts")
    args = ap.parse_args(argv)
    avail = _backend.available()
    if "cython" not in avail:
        print("compiled kernels are not built; only the numpy backend is available")
    print(f"{'case':28s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s} {'rel diff mean':>13s}")
    for label, fn in cases(args.scale):
        tp, ep = run(fn, "python", args.repeat)
        if "cython" in avail:
            tc, ec = run(fn, "cython", args.repeat)
            diff = abs(ec.mean - ep.mean) / abs(ep.mean)
            print(f"{label:28s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f} {diff:13.2e}")
        else:
            print(f"{label:28s} {tp:10.3f} {'-':>10s} {'-':>8s} {'-':>13s}")
    # the field simulator only uses the kernels for normals; time it for reference
    cfg = fieldsim.LatticeConfig(3.0, 64, 0.5, 256, 0.7, BUMP, int(2000 * args.scale) or 2, 1)
    t0 = time.perf_counter()
    fieldsim.simulate_do_field(cfg)
    print(f"{'field n_x=64 n_t=256':28s} {time.perf_counter() - t0:10.3f}  (active backend: {_backend.name})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
