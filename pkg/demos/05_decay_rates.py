#!/usr/bin/env python3
# End-to-end rate verification on two wells: classify, evolve, fit, and
# compare the measured decay against the menu the classification predicts.
# Lighter settings than the acceptance suite; expect a couple of minutes.
import warnings

import numpy as np

from disp4d import decayfit, evolution as ev, potentials, spectral
from disp4d.evolution import Multiplier, Pair, PropagatorRequest

warnings.filterwarnings("ignore")

pairs = [Pair("a", 2.0, 3.0, 0.3)]
for name, c, times in (
    ("regular (c=1)", 1.0, np.geomspace(1e3, 1e7, 14)),
    ("first kind", 5.783185962946785, np.geomspace(1e4, 1e10, 14)),
):
    ws = spectral.Workspace(potentials.square_well(c), channels=3)
    z = ws.classify()
    req = PropagatorRequest(times=times, pairs=pairs, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(ws, z, req)
    model = decayfit.expected_models(z.classification)
    fit = decayfit.fit_magnitudes(times, ser.magnitudes("a"), model)
    print(f"{name:16s} verdict {z.classification:10s} expected menu {model.basis}")
    print(f"{'':16s} dominant {fit.dominant:8s} slope {fit.slope:+.3f} "
          f"residual {fit.residual:.2e}")
    if z.classification == "FirstKind":
        comp = ser.magnitudes("a") * np.log(times)
        print(f"{'':16s} compensated |K| log t spans "
              f"[{comp.min():.3e}, {comp.max():.3e}] (flat = resonance law)")
