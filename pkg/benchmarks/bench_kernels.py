"""Compare the compiled and pure-Python kernels on the per-step hot paths.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from musclesim import _kernels_py

try:
    from musclesim import _kernels
except ImportError:
    _kernels = None

DT = 1.0 / 120.0
PARAMS = (0.5, 0.1, 2.0, 50.0, 50.0)


def cases(k, steps):
    rng = np.random.default_rng(0)
    loads = rng.uniform(0.0, 1.0, steps)
    f_pd = rng.uniform(0.0, 1500.0, steps).tolist()
    l_bar = rng.uniform(0.6, 1.4, steps).tolist()

    def integrate():
        k.integrate_fatigue(0.0, 1.0, 0.0, loads, DT, *PARAMS)

    def step_loop():
        s = (0.0, 1.0, 0.0)
        for u in loads.tolist():
            s = k.fatigue_step(*s, u, DT, *PARAMS)

    def control_loop():
        ma, mr, mf = 0.0, 1.0, 0.0
        for f, lb in zip(f_pd, l_bar):
            out = k.muscle_control(f, lb, 0.0, 1000.0, ma, mr, mf, DT, *PARAMS)
            ma, mr, mf = out[3:6]

    def curves():
        for lb in l_bar:
            k.fl_active(lb)
            k.fl_passive(lb)
            k.fv(lb - 1.0)

    return {"integrate_fatigue": integrate, "fatigue_step loop": step_loop,
            "muscle_control loop": control_loop, "hill curves": curves}


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    py = cases(_kernels_py, args.steps)
    cy = cases(_kernels, args.steps) if _kernels is not None else None
    print(f"{args.steps} calls per case, best of {args.repeat}")
    print(f"{'case':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name in py:
        t_py = best(py[name], args.repeat) * 1e3
        if cy is None:
            print(f"{name:<22}{t_py:>14.1f}{'n/a':>14}{'':>10}")
            continue
        t_cy = best(cy[name], args.repeat) * 1e3
        print(f"{name:<22}{t_py:>14.1f}{t_cy:>14.1f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
