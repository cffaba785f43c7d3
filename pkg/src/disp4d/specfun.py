"""Bessel and Hankel functions of integer order on the positive real axis.

Evaluation targets relative accuracy of 1e-12 for orders 0..8, which is
what the resolvent kernels downstream require.  Three regimes are used:

* ``series``: direct power series for J (small arguments) and the
  logarithmic power series for Y0/Y1.
* ``backward-recurrence``: Miller's algorithm for J at moderate arguments,
  normalized with ``J0 + 2*J2 + 2*J4 + ... = 1``.
* ``asymptotic``: Hankel's modulus/phase expansion with optimal truncation
  for large arguments, then stable upward recurrence in the order.

Intermediate sums for the small-argument regime run in ``np.longdouble``
to keep the alternating-series cancellation below the accuracy target.
All functions are vectorized over the argument and free of shared mutable
state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_ORDER",
    "CROSSOVER",
    "DomainError",
    "UnsupportedOrderError",
    "BesselEval",
    "bessel",
    "bessel_eval",
    "bessel_derivative",
    "hankel",
    "hankel_derivative",
    "hankel_envelope",
    "b1",
    "b2",
    "regime_for",
]

MAX_ORDER = 8
# Internal tables go two orders higher so derivatives of order MAX_ORDER
# can be formed by the standard recurrence.
_NMAX = MAX_ORDER + 2

# Series/asymptotic switch.  The Hankel expansion's optimally truncated
# remainder behaves like exp(-2z); 16 keeps it below ~2e-13, while the
# longdouble series stays near 1e-13 at the same point.
CROSSOVER = 16.0
_SERIES_CUT = 2.0

_EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992

_LD = np.longdouble


class DomainError(ValueError):
    """Argument outside the supported domain (z must be positive)."""


class UnsupportedOrderError(ValueError):
    """Requested order outside 0..MAX_ORDER."""


@dataclass(frozen=True)
class BesselEval:
    """One evaluation with the regime that produced it."""

    order: int
    argument: float
    value: complex
    regime: str


def regime_for(kind: str, z: float) -> str:
    if z > CROSSOVER:
        return "asymptotic"
    if kind == "J" and z > _SERIES_CUT:
        return "backward-recurrence"
    return "series"


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0) or np.any(~np.isfinite(z)):
        raise DomainError("argument must be positive and finite")
    return z


def _check_order(order: int) -> int:
    order = int(order)
    if not 0 <= order <= MAX_ORDER:
        raise UnsupportedOrderError(
            f"order {order} outside supported range 0..{MAX_ORDER}"
        )
    return order


# ----------------------------------------------------------------------
# small-argument regime


def _j_series(z, nmax: int):
    """Direct power series for J_0..J_nmax, z <= _SERIES_CUT."""
    z = z.astype(_LD)
    half = z / 2
    out = np.empty((nmax + 1, z.size), dtype=_LD)
    x2 = -(half * half)
    for nu in range(nmax + 1):
        term = half**nu / _LD(math.factorial(nu))
        acc = term.copy()
        for k in range(1, 26):
            term = term * x2 / (_LD(k) * _LD(k + nu))
            acc += term
        out[nu] = acc
    return out


def _j_miller(z, nmax: int):
    """Miller backward recurrence for J_0..J_nmax, valid for z <= CROSSOVER."""
    z = z.astype(_LD)
    start = int(np.ceil(float(np.max(z)))) + 38
    if start % 2:
        start += 1
    jp = np.zeros_like(z)
    jc = np.full_like(z, _LD(1e-30))
    rows = np.zeros((nmax + 1, z.size), dtype=_LD)
    norm = np.zeros_like(z)
    for m in range(start, 0, -1):
        jm = (2 * _LD(m) / z) * jc - jp
        jp, jc = jc, jm
        # jc currently holds J_{m-1} (unnormalized)
        if (m - 1) <= nmax:
            rows[m - 1] = jc
        if (m - 1) % 2 == 0:
            norm += jc if (m - 1) == 0 else 2 * jc
        big = np.abs(jc) > _LD(1e250)
        if np.any(big):
            scale = np.where(big, _LD(1e-250), _LD(1.0))
            jp *= scale
            jc *= scale
            rows[:, big] *= 1e-250
            norm *= scale
    return rows / norm


def _y01_series(z, j0, j1):
    """Logarithmic series for Y0 and Y1; inputs/outputs in longdouble."""
    z = z.astype(_LD)
    half = z / 2
    lg = np.log(half) + _LD(_EULER_GAMMA)
    q = -(half * half)

    # Y0 = (2/pi) [ (log(z/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k (z^2/4)^k / (k!)^2 ]
    term = np.ones_like(z)
    acc0 = np.zeros_like(z)
    hk = _LD(0)
    for k in range(1, 61):
        term = term * q / _LD(k * k)
        hk = hk + _LD(1) / _LD(k)
        acc0 -= hk * term  # (-1)^{k+1} (z^2/4)^k / (k!)^2 = -term * (-1)^{...}; q carries the sign
    y0 = (2 / _LD(np.pi)) * (lg * j0 + acc0)

    # Y1 = (2/pi)(log(z/2)+gamma) J1 - 2/(pi z)
    #      - (1/pi) sum_{k>=0} (-1)^k (H_k + H_{k+1}) / (k! (k+1)!) (z/2)^{2k+1}
    term = half.copy()
    acc1 = term * _LD(1)  # k = 0: H_0 + H_1 = 1
    hk = _LD(0)
    hk1 = _LD(1)
    for k in range(1, 61):
        term = term * q / (_LD(k) * _LD(k + 1))
        hk = hk + _LD(1) / _LD(k)
        hk1 = hk1 + _LD(1) / _LD(k + 1)
        acc1 += (hk + hk1) * term
    y1 = (2 / _LD(np.pi)) * (lg * j1) - 2 / (_LD(np.pi) * z) - acc1 / _LD(np.pi)
    return y0, y1


# ----------------------------------------------------------------------
# large-argument regime

_ASYM_TERMS = 30


def _pq_asymptotic(z, nu: int):
    """Hankel P/Q expansion for one order with optimal truncation."""
    zz = np.asarray(z, dtype=float)
    k = np.arange(1, _ASYM_TERMS + 1)
    num = 4.0 * nu * nu - (2 * k - 1) ** 2
    # a_k = prod_j (4 nu^2 - (2j-1)^2) / (k! 8^k); build a_k / z^k row by row.
    terms = np.empty((_ASYM_TERMS + 1, zz.size))
    terms[0] = 1.0
    for i, kk in enumerate(k, start=1):
        terms[i] = terms[i - 1] * num[i - 1] / (8.0 * kk * zz)
    # truncate each column before the terms start growing again
    mag = np.abs(terms)
    growing = mag[1:] >= mag[:-1]
    first_grow = np.where(
        growing.any(axis=0), growing.argmax(axis=0) + 1, _ASYM_TERMS + 1
    )
    keep = np.arange(_ASYM_TERMS + 1)[:, None] < first_grow[None, :]
    terms = np.where(keep, terms, 0.0)
    sign = np.where(np.arange(_ASYM_TERMS + 1) // 2 % 2 == 0, 1.0, -1.0)
    even = np.arange(_ASYM_TERMS + 1) % 2 == 0
    p = (terms[even] * sign[even][:, None]).sum(axis=0)
    q = (terms[~even] * sign[~even][:, None]).sum(axis=0)
    return p, q


def _jy_asymptotic(z, nmax: int):
    amp = np.sqrt(2.0 / (np.pi * z))
    jj = np.empty((nmax + 1, z.size))
    yy = np.empty((nmax + 1, z.size))
    for nu in (0, 1):
        p, q = _pq_asymptotic(z, nu)
        omega = z - nu * np.pi / 2 - np.pi / 4
        c, s = np.cos(omega), np.sin(omega)
        jj[nu] = amp * (p * c - q * s)
        yy[nu] = amp * (p * s + q * c)
    for nu in range(1, nmax):
        jj[nu + 1] = (2 * nu / z) * jj[nu] - jj[nu - 1]
        yy[nu + 1] = (2 * nu / z) * yy[nu] - yy[nu - 1]
    return jj, yy


# ----------------------------------------------------------------------
# dispatch


def _jy_small_f64(z, nmax: int):
    """Series evaluation in float64 for z <= _SERIES_CUT (no cancellation
    to amplify there; ~10x faster than the longdouble path)."""
    half = z / 2
    x2 = -(half * half)
    jj = np.empty((nmax + 1, z.size))
    fact = 1.0
    for nu in range(nmax + 1):
        if nu:
            fact *= nu
        term = half**nu / fact
        acc = term.copy()
        for k in range(1, 19):
            term = term * x2 / (k * (k + nu))
            acc += term
        jj[nu] = acc

    lg = np.log(half) + _EULER_GAMMA
    term = np.ones_like(z)
    acc0 = np.zeros_like(z)
    hk = 0.0
    for k in range(1, 25):
        term = term * x2 / (k * k)
        hk += 1.0 / k
        acc0 -= hk * term
    y0 = (2 / np.pi) * (lg * jj[0] + acc0)
    term = half.copy()
    acc1 = term.copy()
    hk, hk1 = 0.0, 1.0
    for k in range(1, 25):
        term = term * x2 / (k * (k + 1))
        hk += 1.0 / k
        hk1 += 1.0 / (k + 1)
        acc1 += (hk + hk1) * term
    y1 = (2 / np.pi) * lg * jj[1] - 2 / (np.pi * z) - acc1 / np.pi

    yy = np.empty_like(jj)
    yy[0], yy[1] = y0, y1
    for nu in range(1, nmax):
        yy[nu + 1] = (2 * nu / z) * yy[nu] - yy[nu - 1]
    return jj, yy


def _jy_all(z, nmax: int = _NMAX):
    """J_nu(z), Y_nu(z) for nu = 0..nmax on an array of positive arguments."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    nmax = max(nmax, 1)
    jj = np.empty((nmax + 1, z.size))
    yy = np.empty((nmax + 1, z.size))

    tiny = z <= _SERIES_CUT
    mid = (z > _SERIES_CUT) & (z <= CROSSOVER)
    hi = z > CROSSOVER
    if np.any(tiny):
        jj[:, tiny], yy[:, tiny] = _jy_small_f64(z[tiny], nmax)
    if np.any(mid):
        zl = z[mid]
        jl = _j_miller(zl, nmax)
        y0, y1 = _y01_series(zl, jl[0], jl[1])
        yl = np.empty_like(jl)
        yl[0], yl[1] = y0, y1
        zld = zl.astype(_LD)
        for nu in range(1, nmax):
            yl[nu + 1] = (2 * nu / zld) * yl[nu] - yl[nu - 1]
        jj[:, mid] = jl.astype(float)
        yy[:, mid] = yl.astype(float)
    if np.any(hi):
        jh, yh = _jy_asymptotic(z[hi], nmax)
        jj[:, hi] = jh
        yy[:, hi] = yh
    return jj, yy


def bessel(kind: str, order: int, z, regime: str | None = None):
    """J_order(z) or Y_order(z) on positive real z (scalar or array).

    ``regime`` forces the evaluation path ("series", "backward-recurrence",
    "asymptotic"); the default picks the appropriate one per element.  The
    forced paths exist so regime stitching can be tested at the crossover.
    """
    if kind not in ("J", "Y"):
        raise ValueError("kind must be 'J' or 'Y'")
    order = _check_order(order)
    zarr = _check_z(z)
    flat = np.atleast_1d(zarr).ravel()

    if regime is None:
        jj, yy = _jy_all(flat, nmax=order)
        out = (jj if kind == "J" else yy)[order]
    elif regime == "series":
        if kind == "J":
            out = _j_series(flat, order)[order].astype(float)
        else:
            j = _j_miller(flat, 1)
            y0, y1 = _y01_series(flat, j[0], j[1])
            ya, yb = y0.copy(), y1.copy()
            zld = flat.astype(_LD)
            for nu in range(1, order):
                ya, yb = yb, (2 * nu / zld) * yb - ya
            out = (ya if order == 0 else yb).astype(float)
    elif regime == "backward-recurrence":
        if kind != "J":
            raise ValueError("backward recurrence applies to J only")
        out = _j_miller(flat, order)[order].astype(float)
    elif regime == "asymptotic":
        jh, yh = _jy_asymptotic(flat, max(order, 1))
        out = (jh if kind == "J" else yh)[order]
    else:
        raise ValueError(f"unknown regime {regime!r}")

    out = out.reshape(np.shape(zarr))
    return float(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def bessel_eval(kind: str, order: int, z: float) -> BesselEval:
    val = bessel(kind, order, float(z))
    return BesselEval(order=order, argument=float(z), value=val,
                      regime=regime_for(kind, float(z)))


def bessel_derivative(kind: str, order: int, z):
    """d/dz of J or Y via C' = (C_{nu-1} - C_{nu+1})/2 (C0' = -C1)."""
    if kind not in ("J", "Y"):
        raise ValueError("kind must be 'J' or 'Y'")
    order = _check_order(order)
    zarr = _check_z(z)
    flat = np.atleast_1d(zarr).ravel()
    jj, yy = _jy_all(flat, nmax=order + 1)
    tab = jj if kind == "J" else yy
    if order == 0:
        out = -tab[1]
    else:
        out = 0.5 * (tab[order - 1] - tab[order + 1])
    out = out.reshape(np.shape(zarr))
    return float(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def _sign(sign) -> int:
    if sign in ("+", 1, +1):
        return +1
    if sign in ("-", -1):
        return -1
    raise ValueError("sign must be '+' or '-'")


def hankel(sign, order: int, z):
    """H_order^{sign}(z) = J_order(z) +/- i Y_order(z)."""
    s = _sign(sign)
    order = _check_order(order)
    zarr = _check_z(z)
    flat = np.atleast_1d(zarr).ravel()
    jj, yy = _jy_all(flat, nmax=order)
    out = jj[order] + 1j * s * yy[order]
    out = out.reshape(np.shape(zarr))
    return complex(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def hankel_derivative(sign, order: int, z):
    s = _sign(sign)
    return bessel_derivative("J", order, z) + 1j * s * bessel_derivative("Y", order, z)


def hankel_envelope(sign, order: int, z):
    """omega_{order}^{sign}(z) = H_order^{sign}(z) exp(-/+ i z).

    The slowly varying amplitude left after peeling the oscillatory phase
    off the Hankel function; decays like (1+z)^{-1/2}.
    """
    s = _sign(sign)
    zarr = np.asarray(z, dtype=float)
    return hankel(sign, order, z) * np.exp(-1j * s * zarr)


# ----------------------------------------------------------------------
# series constants of the Y1 expansion
#
# Y1(z) = -2/(pi z) + (2/pi) log(z/2) J1(z) + b1 z + b2 z^3 + O(z^5 log z)


def b1() -> float:
    """Coefficient of z in the regular part of the Y1 series."""
    return (2.0 * _EULER_GAMMA - 1.0) / (2.0 * np.pi)


def b2() -> float:
    """Coefficient of z^3 in the regular part of the Y1 series."""
    return (5.0 - 4.0 * _EULER_GAMMA) / (32.0 * np.pi)
