"""Time the grid classification kernel: numba vs pure numpy.

    python3 benchmarks/bench_grid.py [--reps 5]
"""
import argparse
import time

import numpy as np

from xperiods._accel import USE_NUMBA
from xperiods.kernels import classify_cells, pack_region
from xperiods.semialg import SignConditionRegion
from xperiods.volume import grid_cells

REGIONS = {
    "disk": {"dim": 2, "clauses": [{"gt": ["1 - x1^2 - x2^2"]}], "box": [["-1", "1"], ["-1", "1"]]},
    "cubic": {"dim": 2, "clauses": [{"gt": ["x2 - x1^3 + x1", "1 - x2"]}], "box": [["-2", "2"], ["-2", "2"]]},
    "ball3": {"dim": 3, "clauses": [{"gt": ["1 - x1^2 - x2^2 - x3^2"]}],
              "box": [["-1", "1"], ["-1", "1"], ["-1", "1"]]},
}


def timed(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    if not USE_NUMBA:
        print("numba disabled (XP_DISABLE_NUMBA set or numba missing); numpy timings only")
    print(f"{'region':8s} {'eps':>8s} {'cells':>10s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, obj in REGIONS.items():
        R = SignConditionRegion.from_json(obj)
        for k in (6, 8, 10) if R.dim == 2 else (5, 6):
            eps = 2.0 ** -k
            origin, counts, _, _ = grid_cells(R, eps, "numpy")
            origin = [float(o) for o in origin]
            packed = pack_region(R)
            ncells = int(np.prod(counts))
            t_np, (a_np, b_np) = timed(lambda: classify_cells(origin, eps, counts, packed, "numpy"), args.reps)
            if USE_NUMBA:
                classify_cells(origin, eps, counts, packed, "numba")  # compile
                t_nb, (a_nb, b_nb) = timed(lambda: classify_cells(origin, eps, counts, packed, "numba"), args.reps)
                assert np.array_equal(a_np, a_nb) and np.array_equal(b_np, b_nb)
                print(f"{name:8s} {eps:8.5f} {ncells:10d} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}")
            else:
                print(f"{name:8s} {eps:8.5f} {ncells:10d} {t_np:10.4f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
