#!/usr/bin/env python3
# Zero-energy classification of the reference wells: the nested kernels of
# T = U + v G0 v and of its rank-one compression sort the four verdicts.
import numpy as np

from disp4d import potentials, spectral

CASES = [
    ("plain well, c = 1", potentials.square_well(1.0)),
    ("channel-0 threshold", potentials.square_well(5.783185962946785)),
    ("channel-1 threshold", potentials.square_well(14.681970642123893)),
    ("channel-2 threshold", potentials.square_well(26.374616427163247)),
    ("stepped two-well pair", potentials.two_well(35.818705629160, 3.454850199907, (1.0, 2.2))),
]

for name, spec in CASES:
    ws = spectral.Workspace(spec, channels=3)
    z = ws.classify()
    sig = {ell: f"{s[0]:.1e}" for ell, s in z.sigma.items()}
    line = f"{name:24s} -> {z.classification:10s} rank(S1)={z.rank_s1} rank(S2)={z.rank_s2}"
    if z.resonance_coefficient is not None:
        line += f"  a = {z.resonance_coefficient:+.4f}"
    for m in z.moments:
        line += f"  (l={m['ell']}: m0={m['m0']:.2e}, |m1|={m['m1']:.2e})"
    print(line)
    print(f"{'':24s}    smallest sigma per channel: {sig}")
