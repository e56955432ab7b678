#!/usr/bin/env python3
"""Print |phi^n(x)| against the ambient upper bound 2n+1 for the default automorphism."""

import argparse

from amalgamlab.experiments import exp_distortion
from amalgamlab.torus import default_free_torus

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("-N", type=int, default=30)
ap.add_argument("-x", default="a")
args = ap.parse_args()

G = default_free_torus()
tab = exp_distortion(G, G.base.alphabet.parse(args.x), args.N)
print("{:>4} {:>8} {:>12} {:>12}".format(*tab.header))
for n, amb, sub, ratio in tab.rows:
    print(f"{n:>4} {amb:>8} {sub:>12} {ratio:>12}")
