"""Radial potential families and zero-energy threshold tuning.

A zero-energy threshold in channel ell exists when the regular solution of
the flattened radial equation

    -u'' + ((nu^2 - 1/4)/r^2 + V(r)) u = 0,   nu = ell + 1,   u ~ r^{nu+1/2}

matches the decaying branch r^{1/2-nu} at the edge of the potential's
support.  ``shoot_defect`` integrates outward and returns a normalized
log-derivative mismatch (the sine of the angle between (u, r u') and the
decaying branch), which is smooth in the coupling, changes sign at a
threshold, and stays bounded through zeros of u.

The square well admits the closed-form matching condition
sqrt(c) J_ell(sqrt(c) * radius) = 0, so its thresholds sit at the squared
Bessel zeros (j_{ell,1}/radius)^2; that is the independent oracle the
tests pin the tuner against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "BracketError",
    "ShootingError",
    "PotentialSpec",
    "square_well",
    "gaussian",
    "two_well",
    "sampled",
    "from_config",
    "shoot_defect",
    "tune_threshold",
    "tune_two_well",
    "TuneResult",
]


class BracketError(ValueError):
    """Defect does not change sign on the supplied bracket."""


class ShootingError(RuntimeError):
    """Outward integration failed even after renormalized retries."""


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential with decay-class metadata.

    ``decay_class`` is the declared beta with |V(r)| <~ (1+r)^{-beta}
    (math.inf for compactly supported families).  ``breakpoints`` lists
    radii where V jumps; grids and integrators split panels there.
    """

    family: str
    params: dict
    profile: Callable[[np.ndarray], np.ndarray]
    decay_class: float
    support_radius: float
    breakpoints: tuple = ()

    def __call__(self, r):
        return self.profile(np.asarray(r, dtype=float))

    def numeric_radius(self, floor: float = 1e-14) -> float:
        """Radius beyond which |V| falls under floor * max|V|."""
        if math.isinf(self.decay_class):
            return self.support_radius
        r = np.linspace(1e-3, 200.0, 4000)
        v = np.abs(self(r))
        vmax = v.max()
        idx = np.where(v > floor * vmax)[0]
        return float(r[idx[-1]] + 0.1) if idx.size else 1.0


def square_well(c: float, radius: float = 1.0) -> PotentialSpec:
    """V = -c on [0, radius], 0 outside."""

    def prof(r):
        return np.where(r <= radius, -c, 0.0)

    return PotentialSpec(
        family="square_well",
        params={"c": c, "radius": radius},
        profile=prof,
        decay_class=math.inf,
        support_radius=radius,
        breakpoints=(radius,),
    )


def gaussian(c: float, width: float = 1.0) -> PotentialSpec:
    """V = -c exp(-(r/width)^2)."""

    def prof(r):
        return -c * np.exp(-((r / width) ** 2))

    # numerically compact: below 1e-14 of the peak past ~5.7 widths
    return PotentialSpec(
        family="gaussian",
        params={"c": c, "width": width},
        profile=prof,
        decay_class=math.inf,
        support_radius=width * math.sqrt(-math.log(1e-14)),
    )


def two_well(c1: float, c2: float, radii: tuple = (1.0, 2.0)) -> PotentialSpec:
    """V = -c1 on [0, r1], -c2 on (r1, r2], 0 outside."""
    r1, r2 = radii

    def prof(r):
        return np.where(r <= r1, -c1, np.where(r <= r2, -c2, 0.0))

    return PotentialSpec(
        family="two_well",
        params={"c1": c1, "c2": c2, "r1": r1, "r2": r2},
        profile=prof,
        decay_class=math.inf,
        support_radius=r2,
        breakpoints=(r1, r2),
    )


def sampled(table, decay_class: float = math.inf) -> PotentialSpec:
    """Potential from a two-column (r, V(r)) table; linear interpolation,
    zero beyond the last radius."""
    tab = np.loadtxt(table) if isinstance(table, (str, bytes)) else np.asarray(table)
    if tab.ndim != 2 or tab.shape[1] != 2:
        raise ValueError("sampled potential needs two columns (r, V)")
    rr, vv = tab[:, 0], tab[:, 1]
    if np.any(np.diff(rr) <= 0):
        raise ValueError("radii must be strictly increasing")

    def prof(r):
        return np.interp(r, rr, vv, left=vv[0], right=0.0)

    return PotentialSpec(
        family="sampled",
        params={"points": len(rr)},
        profile=prof,
        decay_class=decay_class,
        support_radius=float(rr[-1]),
    )


def from_config(family: str, **params) -> PotentialSpec:
    makers = {
        "square_well": square_well,
        "gaussian": gaussian,
        "two_well": two_well,
        "sampled": sampled,
    }
    if family not in makers:
        raise ValueError(f"unknown potential family {family!r}")
    return makers[family](**params)


# ----------------------------------------------------------------------
# zero-energy shooting


def _segments(spec: PotentialSpec, r0: float, rmatch: float):
    pts = [r0] + [b for b in spec.breakpoints if r0 < b < rmatch] + [rmatch]
    return list(zip(pts[:-1], pts[1:]))


def shoot_defect(
    ell: int,
    spec: PotentialSpec,
    matching_radius: float | None = None,
    r0: float | None = None,
    rtol: float = 1e-12,
) -> float:
    """Normalized mismatch with the decaying branch at the matching radius.

    Zero defect <=> a zero-energy threshold solution in channel ell.  The
    value is [R u'(R) - (1/2 - nu) u(R)] / |(u, R u')|, bounded in [-1, 1].
    """
    nu = ell + 1
    rmatch = matching_radius or (spec.numeric_radius() * (1 + 1e-9))
    rr0 = r0 or min(1e-6, 1e-4 * rmatch)

    def rhs(r, y):
        return [y[1], ((nu * nu - 0.25) / (r * r) + float(spec(r))) * y[0]]

    y = np.array([1.0, (nu + 0.5) / rr0])  # u ~ r^{nu+1/2}, scale-free start
    for a, b in _segments(spec, rr0, rmatch):
        sol = solve_ivp(
            rhs, (a, b), y, method="DOP853", rtol=rtol, atol=1e-300, dense_output=False
        )
        if not sol.success:
            raise ShootingError(f"integration failed on [{a}, {b}]: {sol.message}")
        y = sol.y[:, -1]
        scale = max(abs(y[0]), abs(y[1]))
        if scale > 1e200:  # renormalize; the defect is scale-invariant
            y = y / scale
    u, up = y
    num = rmatch * up - (0.5 - nu) * u
    return float(num / math.hypot(u, rmatch * up))


@dataclass(frozen=True)
class TuneResult:
    coupling: float
    defect: float
    sigma_ratio: float | None = None


def _brent(f, a, b, fa, fb, xtol=1e-13, maxit=200):
    # bisection with secant acceleration; keeps the bracket
    for _ in range(maxit):
        if abs(b - a) < xtol:
            break
        mid = 0.5 * (a + b)
        if fb != fa:
            sec = b - fb * (b - a) / (fb - fa)
            x = sec if a + 0.01 * (b - a) < sec < b - 0.01 * (b - a) else mid
        else:
            x = mid
        fx = f(x)
        if fx == 0.0:
            return x, fx
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
    return (a if abs(fa) < abs(fb) else b), (fa if abs(fa) < abs(fb) else fb)


def tune_threshold(
    ell: int,
    factory: Callable[[float], PotentialSpec],
    bracket: tuple,
    defect_tol: float = 1e-12,
    certify: bool = False,
    matching_radius: float | None = None,
) -> TuneResult:
    """Locate the coupling where channel ell has a zero-energy threshold.

    Bisection with secant polish on the shooting defect; ``certify``
    additionally assembles the zero-energy channel operator and reports
    its smallest-to-largest singular value ratio at the tuned coupling.
    """
    a, b = bracket

    def f(c):
        return shoot_defect(ell, factory(c), matching_radius=matching_radius)

    fa, fb = f(a), f(b)
    if fa * fb > 0:
        raise BracketError(f"defect has no sign change on [{a}, {b}]")
    c, fc = _brent(f, a, b, fa, fb)
    if abs(fc) > defect_tol:
        raise ShootingError(f"polish stalled: |defect| = {abs(fc):.3e}")
    sigma_ratio = None
    if certify:
        from . import spectral  # deferred: spectral builds on this module

        ws = spectral.Workspace(factory(c), channels=ell + 1)
        sig, _, _ = ws.t_smallest_sigma(ell)
        sigma_ratio = float(sig / ws.sigma_max())
    return TuneResult(coupling=float(c), defect=float(fc), sigma_ratio=sigma_ratio)


def tune_two_well(
    radii: tuple = (1.0, 2.2),
    c2_bracket: tuple = (3.0, 4.0),
    c1_bracket: tuple = (30.0, 46.0),
    defect_tol: float = 1e-10,
) -> tuple:
    """Couplings (c1*, c2*) putting channels 0 and 1 simultaneously at
    threshold for the stepped two-well family (third-kind construction).

    For each c2 the inner coupling is tuned to the channel-0 threshold;
    the outer solve drives the channel-1 defect of that configuration to
    zero.
    """

    def c1_star(c2):
        res = tune_threshold(
            0, lambda c: two_well(c, c2, radii), c1_bracket, defect_tol=1e-12
        )
        return res.coupling

    def g(c2):
        return shoot_defect(1, two_well(c1_star(c2), c2, radii))

    a, b = c2_bracket
    ga, gb = g(a), g(b)
    if ga * gb > 0:
        raise BracketError(f"channel-1 defect has no sign change on [{a}, {b}]")
    c2, gc = _brent(g, a, b, ga, gb, xtol=1e-11)
    if abs(gc) > defect_tol:
        raise ShootingError(f"two-well polish stalled: |defect| = {abs(gc):.3e}")
    return c1_star(c2), float(c2)
