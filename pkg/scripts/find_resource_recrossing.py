"""Search seeds for a resource whose LERN crosses 1 more than once.

Such resources show an infection level that dips and then rises again while
the network as a whole is already past its peak.
"""
import argparse

import numpy as np

from multisir.analysis import annotate
from multisir.integrator import simulate
from multisir.scenario import generate_scenario


def crossings(values, level=1.0):
    f = values - level
    ok = ~np.isnan(f)
    f = f[ok]
    return int(np.sum((f[:-1] > 0) != (f[1:] > 0)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--first", type=int, default=1)
    ap.add_argument("--last", type=int, default=200)
    ap.add_argument("--all", action="store_true", help="keep going after the first hit")
    args = ap.parse_args()

    hits = 0
    for seed in range(args.first, args.last + 1):
        sc = generate_scenario(seed=seed)
        traj = simulate(sc.params, sc.initial, sc.settings)
        annotate(traj, sc.params, record=("R", "lern"))
        n = sc.params.n
        for j in range(sc.params.m):
            c = crossings(traj.scalars["lern"][:, n + j])
            if c >= 2:
                hits += 1
                print(f"seed {seed}: resource {j + 1} LERN crosses 1 {c} times")
        if hits and not args.all:
            break
    if not hits:
        print(f"no resource LERN with two or more crossings in seeds {args.first}..{args.last}")


if __name__ == "__main__":
    main()
