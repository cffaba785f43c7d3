#!/usr/bin/env python3
# Bessel/Hankel machinery: regimes, Wronskian, asymptotic envelope.
import numpy as np

from disp4d import specfun

print("== evaluation regimes ==")
for z in (0.5, 5.0, 50.0):
    ev = specfun.bessel_eval("J", 1, z)
    print(f"  J1({z:5.1f}) = {ev.value:+.15e}   [{ev.regime}]")

print("\n== Wronskian J Y' - J' Y = 2/(pi z) ==")
z = np.geomspace(1e-3, 40.0, 7)
for nu in (0, 1, 4, 8):
    w = (
        specfun.bessel("J", nu, z) * specfun.bessel_derivative("Y", nu, z)
        - specfun.bessel_derivative("J", nu, z) * specfun.bessel("Y", nu, z)
    )
    err = np.max(np.abs(w * np.pi * z / 2 - 1))
    print(f"  order {nu}: max relative defect {err:.2e}")

print("\n== Hankel asymptotics |H1(z)| sqrt(z) -> sqrt(2/pi) ==")
for z in (10.0, 100.0, 1000.0):
    val = abs(specfun.hankel("+", 1, z)) * np.sqrt(z)
    print(f"  z = {z:6.0f}: {val:.9f}  (limit {np.sqrt(2/np.pi):.9f})")

print("\nY1 series constants: b1 = %.12f, b2 = %.12f" % (specfun.b1(), specfun.b2()))
