#!/usr/bin/env python3
# The quantitative anchor: with V = 0 the Stone-formula quadrature must
# reproduce |K(t)| = 1/(16 pi^2 t^2) for every pair and every large t.
import numpy as np

from disp4d import evolution as ev
from disp4d.evolution import Multiplier, Pair, PropagatorRequest

times = np.geomspace(1e3, 1e10, 8)
pairs = [Pair("near", 1.0, 2.0, 0.5), Pair("far", 3.0, 5.0, -0.7)]
req = PropagatorRequest(times=times, pairs=pairs, multiplier=Multiplier("schrod"))
ser = ev.stone_evolve(None, None, req)
ref = 1.0 / (16 * np.pi**2 * times**2)

print(f"{'t':>12s} {'|K| near':>14s} {'|K| far':>14s} {'ratio to free law':>18s}")
for i, t in enumerate(times):
    r = abs(ser.values[i, 0]) / ref[i]
    print(f"{t:12.3e} {abs(ser.values[i,0]):14.6e} {abs(ser.values[i,1]):14.6e} {r:18.6f}")
print(
    "\nquadrature cost is t-independent: the same panel set serves t = 1e3 and"
    " 1e10\n(the slow drift at t ~ 1e9+ is the double-precision amplitude floor"
    " against a 1e-22 answer)"
)
