"""Closed-form kernels for the low-energy resolvent analysis on R^4.

Contents:

* boundary values of the free resolvent ``(-Delta - lambda^2 -/+ i0)^{-1}``
  in four (and, for the dimension-reduction identity, two) dimensions;
* the partial-wave (channel) reduction of rotation-invariant kernels to
  half-line kernels acting on L^2(dr) after the flattening ``u = r^{3/2} f``;
* the zero-energy operators G_0..G_5 and the scalar expansion coefficients
  ``g_j(lam) = lam^{2j} (a_j log lam + z_j)`` that reproduce the free
  resolvent's Taylor/log expansion in the spectral parameter;
* the auxiliary amplitudes A, F, G and Gtilde built from the Bessel series
  and the Hankel asymptotic envelope.

Conventions.  The spectral parameter is ``lam`` with energy ``lam**2``;
``sign=+1`` selects the upper limiting-absorption boundary value and the
two signs are complex conjugates of each other.  The zero-energy kernel of
``(-Delta)^{-1}`` is taken with the positive sign ``1/(4 pi^2 d^2)``, the
``lam -> 0`` limit of the resolvent boundary values (the classifier relies
on M(lam) -> T entrywise, which pins this convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun

__all__ = [
    "SpectralPoint",
    "AuxArgs",
    "SingularDistanceError",
    "TWO_PI_SQ",
    "LAMBDA1_DEFAULT",
    "smooth_cutoff",
    "free_kernel_4d",
    "free_kernel",
    "free_kernel_2d",
    "free_resolvent_difference",
    "channel_kernel",
    "channel_kernel_zero",
    "channel_gj",
    "gj_kernel",
    "g_coeff",
    "expansion_constants",
    "resolvent_expansion",
    "aux_function",
    "amplitude_a",
    "aux_f",
    "aux_g",
    "aux_gtilde",
    "dimension_reduction_check",
    "chebyshev_u",
    "law_of_cosines",
    "resum_channels",
]

TWO_PI_SQ = 2.0 * np.pi**2  # volume of the unit 3-sphere
LAMBDA1_DEFAULT = 0.25

_EG = 0.57721566490153286060651209008240243104215933593992


class SingularDistanceError(ValueError):
    """Kernel evaluated at coincident points."""


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter lam > 0 with a limiting-absorption side."""

    lam: float
    sign: int = +1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("spectral parameter must be positive")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class AuxArgs:
    """Distance pair (p, q) for the auxiliary amplitudes."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")


def smooth_cutoff(z, lambda1: float = LAMBDA1_DEFAULT):
    """Even C^2 cutoff: 1 on [0, lambda1], 0 beyond 2*lambda1.

    Quintic smoothstep on the transition band; two continuous derivatives
    are what the integration-by-parts estimates downstream consume.
    """
    z = np.abs(np.asarray(z, dtype=float))
    x = np.clip(z / lambda1 - 1.0, 0.0, 1.0)
    s = x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    out = 1.0 - s
    return float(out) if np.ndim(z) == 0 else out


def _sgn(sign) -> int:
    if isinstance(sign, SpectralPoint):
        return sign.sign
    if sign in (+1, 1, "+"):
        return +1
    if sign in (-1, "-"):
        return -1
    raise ValueError("sign must be '+'/'-' or +1/-1")


# ----------------------------------------------------------------------
# free resolvent boundary values


def free_kernel(lam: float, d, sign=+1):
    """Kernel of (-Delta - lam^2 -/+ i0)^{-1} on R^4 at distance d (array ok)."""
    s = _sgn(sign)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise SingularDistanceError("distance must be positive")
    z = lam * d
    h = specfun.hankel("+" if s > 0 else "-", 1, z)
    out = s * 0.25j * lam / (2.0 * np.pi * d) * h
    return out


def free_kernel_4d(pt: SpectralPoint, d):
    return free_kernel(pt.lam, d, pt.sign)


def free_kernel_2d(lam: float, d, sign=+1):
    """Kernel of the 2-d free resolvent boundary value, +/- (i/4) H_0^{+/-}."""
    s = _sgn(sign)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise SingularDistanceError("distance must be positive")
    return s * 0.25j * specfun.hankel("+" if s > 0 else "-", 0, lam * d)


def free_resolvent_difference(lam: float, d):
    """[R0+ - R0-](lam^2)(d) = lam^2 A(lam d); purely imaginary."""
    d = np.asarray(d, dtype=float)
    return lam**2 * amplitude_a(lam * d)


# ----------------------------------------------------------------------
# channel reduction
#
# A rotation-invariant kernel K(x,y) = kappa(r, r', cos(gamma)) acts
# block-diagonally on hyperspherical channels.  With the Gegenbauer
# expansion kappa = sum_l kappa_l(r,r') U_l(cos gamma) (U_l = Chebyshev-U,
# equal to C_l^{(1)}), the flattened half-line kernel on channel l is
#
#     flat_l(r,r') = (2 pi^2 / (l+1)) kappa_l(r,r') (r r')^{3/2}.


def chebyshev_u(ell: int, x):
    x = np.asarray(x, dtype=float)
    if ell == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 2.0 * x
    for _ in range(ell - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def law_of_cosines(r, rp, cosg):
    d2 = r * r + rp * rp - 2.0 * r * rp * cosg
    return np.sqrt(np.maximum(d2, 0.0))


def channel_kernel(ell: int, pt: SpectralPoint, r, rp):
    """Flattened channel kernel of the free resolvent boundary value.

    Green's function of -d^2/dr^2 + (nu^2 - 1/4)/r^2 - lam^2 -/+ i0 on the
    half line, nu = ell + 1:  +/- (i pi / 2) sqrt(r r') J_nu(lam r_<)
    H_nu^{+/-}(lam r_>).
    """
    s = _sgn(pt)
    nu = ell + 1
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    rl = np.minimum(r, rp)
    rg = np.maximum(r, rp)
    j = specfun.bessel("J", nu, pt.lam * rl)
    h = specfun.hankel("+" if s > 0 else "-", nu, pt.lam * rg)
    return s * 0.5j * np.pi * np.sqrt(r * rp) * j * h


def channel_kernel_matrix(ell: int, pt: SpectralPoint, r_sorted):
    """channel_kernel on the tensor grid r x r, via 1-d evaluations.

    With the nodes sorted ascending, lam r_< and lam r_> take only n
    distinct values each, so the n x n kernel needs two 1-d Bessel passes
    and an index gather instead of n^2 evaluations.
    """
    s = _sgn(pt)
    nu = ell + 1
    r = np.asarray(r_sorted, dtype=float)
    z = pt.lam * r
    j1d = specfun.bessel("J", nu, z)
    h1d = specfun.hankel("+" if s > 0 else "-", nu, z)
    idx = np.arange(r.size)
    ilo = np.minimum(idx[:, None], idx[None, :])
    ihi = np.maximum(idx[:, None], idx[None, :])
    root = np.sqrt(r[:, None] * r[None, :])
    return s * 0.5j * np.pi * root * j1d[ilo] * h1d[ihi]


def channel_kernel_zero_matrix(ell: int, r_sorted):
    nu = ell + 1
    r = np.asarray(r_sorted, dtype=float)
    rl = np.minimum(r[:, None], r[None, :])
    rg = np.maximum(r[:, None], r[None, :])
    return np.sqrt(r[:, None] * r[None, :]) * (rl / rg) ** nu / (2.0 * nu)


def channel_kernel_zero(ell: int, r, rp):
    """lam -> 0 limit of channel_kernel: sqrt(r r') (r_</r_>)^nu / (2 nu)."""
    nu = ell + 1
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    rl = np.minimum(r, rp)
    rg = np.maximum(r, rp)
    return np.sqrt(r * rp) * (rl / rg) ** nu / (2.0 * nu)


# --- exact Chebyshev algebra for kernels polynomial in cos(gamma), with an
# optional log|x-y| factor.  log|x-y| = log r_> - sum_m (rho^m/m) T_m(c).


def _tau_log(k: int, a: int, rho, log_rg):
    """T-coefficient tau_k of T_a(c) * log|x-y| (fixed a in 0..2)."""
    out = np.zeros_like(rho)
    if k == a:
        out = out + log_rg
    if a == 0:
        if k >= 1:
            out = out - rho**k / k
    else:
        if k - a >= 1:
            out = out - 0.5 * rho ** (k - a) / (k - a)
        out = out - 0.5 * rho ** (k + a) / (k + a)
        if k >= 1 and a - k >= 1:
            out = out - 0.5 * rho ** (a - k) / (a - k)
    return out


def _kappa_poly_log(coeffs_t, ell: int, rho, log_rg):
    """U-coefficient kappa_ell of (sum_a coeffs_t[a] T_a(c)) * log|x-y|."""
    tau_l = sum(c * _tau_log(ell, a, rho, log_rg) for a, c in coeffs_t.items())
    tau_l2 = sum(c * _tau_log(ell + 2, a, rho, log_rg) for a, c in coeffs_t.items())
    head = tau_l if ell == 0 else 0.5 * tau_l
    return head - 0.5 * tau_l2


# T-basis of the cosine powers used by the G_j kernels
_COS_POWERS_T = {0: {0: 1.0}, 1: {1: 1.0}, 2: {0: 0.5, 2: 0.5}}
# U-basis of the same powers (polynomial part, no log)
_COS_POWERS_U = {0: {0: 1.0}, 1: {1: 0.5}, 2: {0: 0.25, 2: 0.25}}


@lru_cache(maxsize=None)
def expansion_constants():
    """Coefficients of the free-resolvent expansion in the spectral variable.

    Pinned at bootstrap from the J1/Y1 series coefficients exposed by
    specfun; cached read-only afterwards.  Returns a dict with the real
    log slopes ``a[j]``, the complex intercepts ``z[j]`` of the '+' side,
    and the kernel constants ``c[j]`` of G_2..G_5.
    """
    pi = np.pi
    b1 = specfun.b1()
    b2 = specfun.b2()
    y2 = -(5.0 - 3.0 * _EG) / (576.0 * pi)  # z^5 coefficient of the Y1 remainder
    a = {
        1: -1.0 / (8.0 * pi**2),
        2: 1.0 / (64.0 * pi**2),
        3: -1.0 / (1536.0 * pi**2),
    }
    z = {
        1: math.log(2.0) / (8.0 * pi**2) - b1 / (8.0 * pi) + 1j / (16.0 * pi),
        2: -math.log(2.0) / (64.0 * pi**2) - b2 / (8.0 * pi) - 1j / (128.0 * pi),
        3: math.log(2.0) / (1536.0 * pi**2) - y2 / (8.0 * pi) + 1j / (3072.0 * pi),
    }
    c = {
        2: 1.0,
        3: 1.0 / (64.0 * pi**2),
        4: 1.0,
        5: -1.0 / (1536.0 * pi**2),
    }
    return {"a": a, "z": z, "c": c}


def g_coeff(j: int, pt: SpectralPoint) -> complex:
    """g_j(lam) = lam^{2j} (a_j log lam + z_j), conjugated on the '-' side."""
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    k = expansion_constants()
    val = pt.lam ** (2 * j) * (k["a"][j] * math.log(pt.lam) + k["z"][j])
    return val if pt.sign > 0 else np.conj(val)


def gj_kernel(j: int, d):
    """Kernel of G_j at distance d.

    G_0 = 1/(4 pi^2 d^2), G_1 = -log(d)/(8 pi^2), G_2 = d^2,
    G_3 = c_3 d^2 log d, G_4 = d^4, G_5 = c_5 d^4 log d.
    """
    d = np.asarray(d, dtype=float)
    if j == 0:
        if np.any(d <= 0):
            raise SingularDistanceError("G_0 is singular at zero distance")
        return 1.0 / (4.0 * np.pi**2 * d * d)
    if np.any(d <= 0):
        raise SingularDistanceError("log-kernels need positive distance")
    k = expansion_constants()
    if j == 1:
        return -np.log(d) / (8.0 * np.pi**2)
    if j == 2:
        return k["c"][2] * d**2
    if j == 3:
        return k["c"][3] * d**2 * np.log(d)
    if j == 4:
        return k["c"][4] * d**4
    if j == 5:
        return k["c"][5] * d**4 * np.log(d)
    raise ValueError("j must be in 0..5")


def channel_gj(j, ell: int, r, rp):
    """Flattened channel-ell kernel of G_j (or of the constant kernel).

    ``j`` in 0..5, or the string "const" for the kernel identically 1
    (the one the rank-one projection term pairs with).
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    rl = np.minimum(r, rp)
    rg = np.maximum(r, rp)
    rho = rl / rg
    nu = ell + 1
    flat = TWO_PI_SQ / nu * (r * rp) ** 1.5
    k = expansion_constants()

    if j == "const":
        kappa = np.ones_like(rho) if ell == 0 else np.zeros_like(rho)
        return flat * kappa
    if j == 0:
        return flat * rho**ell / (4.0 * np.pi**2 * rg**2)

    log_rg = np.log(rg)
    A = r * r + rp * rp
    B = r * rp

    def poly_u(power: int):
        return _COS_POWERS_U[power].get(ell, 0.0)

    def poly_log(power: int):
        return _kappa_poly_log(_COS_POWERS_T[power], ell, rho, log_rg)

    if j == 1:
        kappa = -(poly_log(0)) / (8.0 * np.pi**2)
    elif j == 2:
        kappa = k["c"][2] * (A * poly_u(0) - 2.0 * B * poly_u(1))
    elif j == 3:
        kappa = k["c"][3] * (A * poly_log(0) - 2.0 * B * poly_log(1))
    elif j == 4:
        kappa = k["c"][4] * (
            A * A * poly_u(0) - 4.0 * A * B * poly_u(1) + 4.0 * B * B * poly_u(2)
        )
    elif j == 5:
        kappa = k["c"][5] * (
            A * A * poly_log(0) - 4.0 * A * B * poly_log(1) + 4.0 * B * B * poly_log(2)
        )
    else:
        raise ValueError("j must be in 0..5 or 'const'")
    return flat * kappa


def resolvent_expansion(pt: SpectralPoint, d, order: int):
    """Partial sum of the free-resolvent expansion through the given order.

    order 0: G_0;  1: + g_1 + lam^2 G_1;  2: + g_2 G_2 + lam^4 G_3;
    3: + g_3 G_4 + lam^6 G_5.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0..3")
    d = np.asarray(d, dtype=float)
    out = gj_kernel(0, d).astype(complex)
    if order >= 1:
        out = out + g_coeff(1, pt) + pt.lam**2 * gj_kernel(1, d)
    if order >= 2:
        out = out + g_coeff(2, pt) * gj_kernel(2, d) + pt.lam**4 * gj_kernel(3, d)
    if order >= 3:
        out = out + g_coeff(3, pt) * gj_kernel(4, d) + pt.lam**6 * gj_kernel(5, d)
    return out


# ----------------------------------------------------------------------
# auxiliary amplitudes


def amplitude_a(z):
    """A(z) with [R0+ - R0-](lam^2)(d) = lam^2 A(lam d): (i/4 pi) J_1(z)/z."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty(z.shape, dtype=complex)
    small = z < 1e-8
    if np.any(~small):
        zs = z[~small]
        out[~small] = 0.25j / np.pi * specfun.bessel("J", 1, zs) / zs
    out[small] = 1j / (8.0 * np.pi)
    return complex(out[0]) if scalar else out


def aux_g(lam: float, p, q, lambda1: float = LAMBDA1_DEFAULT):
    """G(lam,p,q) = A(lam p) chi(lam p) - A(lam q) chi(lam q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return amplitude_a(lam * p) * smooth_cutoff(lam * p, lambda1) - amplitude_a(
        lam * q
    ) * smooth_cutoff(lam * q, lambda1)


def _y1_regular(z):
    """chi-free part of F: Y_1(z)/z + 2/(pi z^2), smooth through z = 0."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty(z.shape)
    small = z < 1e-6
    if np.any(~small):
        zs = z[~small]
        out[~small] = specfun.bessel("Y", 1, zs) / zs + 2.0 / (np.pi * zs * zs)
    if np.any(small):
        zs = z[small]
        # log(z/2)/pi + b1 + O(z^2 log z)
        out[small] = np.where(
            zs > 0, np.log(np.maximum(zs, 1e-300) / 2.0) / np.pi + specfun.b1(), -np.inf
        )
    return out[0] if scalar else out


def aux_f(lam: float, p, q, lambda1: float = LAMBDA1_DEFAULT):
    """F(lam,p,q): the Y_1-regularized difference amplitude.

    F(0+, p, q) = log(p/q)/pi, which is how the logarithmic spatial
    weights enter the second-kind analysis.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return smooth_cutoff(lam * p, lambda1) * _y1_regular(lam * p) - smooth_cutoff(
        lam * q, lambda1
    ) * _y1_regular(lam * q)


def aux_gtilde(sign, lam: float, p, q, lambda1: float = LAMBDA1_DEFAULT):
    """Gtilde^{+/-}(lam,p,q) built from the Hankel asymptotic envelope.

    chi_hi(lam p) w(lam p) - exp(+/- i lam (p-q)) chi_hi(lam q) w(lam q)
    with w(z) = omega^{+/-}(z)/z = O(z^{-3/2}); supported where
    lam * min(p, q) is of order one or larger.
    """
    s = _sgn(sign)
    scalar = np.ndim(p) == 0 and np.ndim(q) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p, q = np.broadcast_arrays(p, q)

    def w(z):
        out = np.zeros(z.shape, dtype=complex)
        hi = 1.0 - smooth_cutoff(z, lambda1)
        mask = hi > 0
        if np.any(mask):
            zz = z[mask]
            out[mask] = hi[mask] * specfun.hankel_envelope(
                "+" if s > 0 else "-", 1, zz
            ) / zz
        return out

    out = w(lam * p) - np.exp(1j * s * lam * (p - q)) * w(lam * q)
    return complex(out[0]) if scalar else out


def aux_function(kind: str, pt: SpectralPoint, args: AuxArgs,
                 lambda1: float = LAMBDA1_DEFAULT) -> complex:
    """Dispatcher over the auxiliary amplitudes A, F, G, Gtilde+/-."""
    if kind == "A":
        return complex(amplitude_a(pt.lam * args.p))
    if kind == "F":
        return complex(aux_f(pt.lam, args.p, args.q, lambda1))
    if kind == "G":
        return complex(aux_g(pt.lam, args.p, args.q, lambda1))
    if kind == "Gtilde+":
        return complex(aux_gtilde(+1, pt.lam, args.p, args.q, lambda1))
    if kind == "Gtilde-":
        return complex(aux_gtilde(-1, pt.lam, args.p, args.q, lambda1))
    raise ValueError(f"unknown auxiliary kind {kind!r}")


# ----------------------------------------------------------------------
# dimension reduction and channel resummation


def dimension_reduction_check(pt: SpectralPoint, d: float,
                              constant: float | None = None) -> float:
    """Residual of (1/lam) d/dlam G_4(lam,d) = (1/ 2 pi) G_2(lam,d).

    The derivative is a central difference with relative step 1e-5; the
    ``constant`` override exists as a negative control.
    """
    lam, s = pt.lam, pt.sign
    h = lam * 1e-5
    der = (free_kernel(lam + h, d, s) - free_kernel(lam - h, d, s)) / (2.0 * h)
    c = 1.0 / (2.0 * np.pi) if constant is None else constant
    return float(abs(der / lam - c * free_kernel_2d(lam, d, s)))


def resum_channels(flat_values, ell_list, r, rp, cosg):
    """Recover the 4-d kernel at one point from flattened channel values."""
    total = 0.0 + 0.0j
    scale = (r * rp) ** 1.5
    for val, ell in zip(flat_values, ell_list):
        nu = ell + 1
        total += val * nu / TWO_PI_SQ * chebyshev_u(ell, cosg) / scale
    return total
