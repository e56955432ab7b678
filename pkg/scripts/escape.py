#!/usr/bin/env python3
"""Max Gromov product (h, z y^n)_1 over the H-ball, for several z.

Slow for large h-radius: the default (radius 3, n <= 3, z in {a, t1}) takes
about 20 s.
"""

import argparse
import time

from amalgamlab.amalgam import default_amalgam
from amalgamlab.experiments import exp_gromov_escape
from amalgamlab.metric import DistanceOracle

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("z", nargs="*", default=["a", "t1"])
ap.add_argument("--y", default="ab")
ap.add_argument("--h-radius", type=int, default=3)
ap.add_argument("--n-max", type=int, default=3)
ap.add_argument("--cap", type=int, default=6)
ap.add_argument("--forward-radius", type=int, default=4)
args = ap.parse_args()

M = default_amalgam()
oracle = DistanceOracle(M, forward_radius=args.forward_radius)
y = M.tori[0].base.alphabet.parse(args.y)
for z in args.z:
    t0 = time.perf_counter()
    tab = exp_gromov_escape(M, z, y, args.h_radius, args.n_max, args.cap, oracle=oracle)
    print(f"z = {z or '1'}  (|B_H| = {tab.summary['h_ball_size']}, {time.perf_counter() - t0:.1f}s)")
    for n, val, witness, capped in tab.rows:
        print(f"  n={n}  max={val:<5} witness={witness or '1'}{'  [capped]' if capped else ''}")
