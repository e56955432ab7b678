#!/usr/bin/env python3
"""Count right cosets of H meeting g^-1 B_H(r) g, a finite-index proxy for H and gHg^-1."""

import argparse

from amalgamlab.amalgam import default_amalgam
from amalgamlab.experiments import exp_vn_index

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("g", nargs="*", default=["", "a", "aaa", "t", "t1", "b t"])
ap.add_argument("--radius-max", type=int, default=5)
args = ap.parse_args()

M = default_amalgam()
for g in args.g:
    counts = [row[2] for row in exp_vn_index(M, g, range(1, args.radius_max + 1)).rows]
    print(f"g = {g or '1':<6} {counts}")
