"""Filon-Clenshaw-Curtis quadrature for the spectral-measure integrals.

The propagator integrals all reduce to sums of components

    integral  exp(+/- i t s)  g(s)  ds

over a panelized interval in a variable s where the oscillation is
exactly linear: s = lam^2 for the Schrodinger multiplier, s =
sqrt(lam^2 + mass^2) for Klein-Gordon, s = lam for the wave flows.  Per
panel the amplitude is interpolated at Chebyshev-Lobatto points and the
oscillation integrated exactly against the interpolant, so the cost is
independent of t.

Panels are laid out in lam (dyadically graded toward zero, aligned with
the cutoff junctions); the local coordinate on a panel is the offset
sigma = s - s(lam_a), computed cancellation-free from lam so the map
stays accurate on panels far smaller than machine epsilon relative to
the mass shell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "VariableMap",
    "map_for",
    "cheb_lobatto",
    "cheb_coefficients",
    "cheb_moments",
    "dyadic_edges",
    "FilonGrid",
]


# ----------------------------------------------------------------------
# variable maps (lam -> oscillation variable), cancellation-free


@dataclass(frozen=True)
class VariableMap:
    kind: str  # "quadratic" (s = lam^2), "shell" (s = sqrt(lam^2+m^2)), "linear"
    mass: float = 0.0

    def s(self, lam):
        if self.kind == "quadratic":
            return np.asarray(lam) ** 2
        if self.kind == "shell":
            return np.sqrt(np.asarray(lam) ** 2 + self.mass**2)
        return np.asarray(lam)

    def sigma(self, lam, lam_a):
        """s(lam) - s(lam_a) without cancellation."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "quadratic":
            return lam**2 - lam_a**2
        if self.kind == "shell":
            return (lam**2 - lam_a**2) / (self.s(lam) + self.s(lam_a))
        return lam - lam_a

    def lam(self, sigma, lam_a):
        """Inverse of sigma(., lam_a), stable for tiny offsets."""
        sigma = np.asarray(sigma, dtype=float)
        if self.kind == "quadratic":
            return np.sqrt(np.maximum(sigma + lam_a**2, 0.0))
        if self.kind == "shell":
            sa = float(self.s(lam_a))
            return np.sqrt(np.maximum(sigma**2 + 2 * sigma * sa + lam_a**2, 0.0))
        return sigma + lam_a


def map_for(kind: str, mass: float = 0.0) -> VariableMap:
    if kind == "schrod":
        return VariableMap("quadratic")
    if kind in ("kgcos", "kgsin"):
        return VariableMap("shell", mass=mass)
    if kind in ("wavecos", "wavesin"):
        return VariableMap("linear")
    raise ValueError(f"unknown multiplier kind {kind!r}")


# ----------------------------------------------------------------------
# Chebyshev machinery


def cheb_lobatto(p: int):
    """p+1 Chebyshev-Lobatto points cos(pi k / p), descending from +1."""
    return np.cos(np.pi * np.arange(p + 1) / p)


def cheb_coefficients(values):
    """Chebyshev coefficients of the interpolant through Lobatto samples.

    values[..., k] at x_k = cos(pi k / p); returns c[..., n] with
    f = sum_n c_n T_n (type-I DCT with halved endpoints).
    """
    vals = np.asarray(values)
    p = vals.shape[-1] - 1
    k = np.arange(p + 1)
    cosmat = np.cos(np.pi * np.outer(k, k) / p)
    wts = np.ones(p + 1)
    wts[0] = wts[-1] = 0.5
    c = (2.0 / p) * (vals * wts) @ cosmat
    c[..., 0] *= 0.5
    c[..., -1] *= 0.5
    return c


_GL_CACHE = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def cheb_moments(omega: float, p: int):
    """m_n = integral_{-1}^{1} exp(i omega x) T_n(x) dx for n = 0..p.

    Quadrature for moderate frequency, forward recurrence beyond (stable
    for n < |omega|).
    """
    omega = float(omega)
    if abs(omega) <= 2.5 * max(p, 8):
        x, w = _gl(2 * p + 40)
        e = np.exp(1j * omega * x) * w
        t_prev = np.ones_like(x)
        t_cur = x.copy()
        out = np.empty(p + 1, dtype=complex)
        out[0] = np.sum(e)
        if p >= 1:
            out[1] = np.sum(e * x)
        for n in range(1, p):
            t_prev, t_cur = t_cur, 2 * x * t_cur - t_prev
            out[n + 1] = np.sum(e * t_cur)
        return out

    out = np.empty(p + 1, dtype=complex)
    s, c = np.sin(omega), np.cos(omega)
    out[0] = 2 * s / omega
    if p >= 1:
        out[1] = 2j * (s - omega * c) / omega**2
    if p >= 2:
        # T2' = 4 T1:  E2 - i w m2 = 4 m1
        e2 = 2j * s
        out[2] = (e2 - 4 * out[1]) / (1j * omega)
    for n in range(2, p):
        e_next = 2j * s if (n + 1) % 2 == 0 else 2 * c
        e_prev = 2j * s if (n - 1) % 2 == 0 else 2 * c
        out[n + 1] = (
            (n + 1)
            / (1j * omega)
            * (
                e_next / (n + 1)
                - e_prev / (n - 1)
                + 1j * omega * out[n - 1] / (n - 1)
                - 2 * out[n]
            )
        )
    return out


# ----------------------------------------------------------------------
# panelization


def dyadic_edges(lam_min: float, lambda1: float, top_panels: int = 4):
    """Panel edges in lam: dyadic from lam_min to lambda1/2, then a panel
    to lambda1, then uniform panels across the cutoff transition band
    (aligned with the junctions of the smooth cutoff at lambda1 and
    2 lambda1, where the amplitude is piecewise analytic)."""
    edges = [0.0, lam_min]
    x = lam_min
    while x * 2 < 0.5 * lambda1:
        x *= 2
        edges.append(x)
    edges.append(0.5 * lambda1)
    edges.append(0.75 * lambda1)
    edges.append(lambda1)
    for k in range(1, top_panels + 1):
        edges.append(lambda1 + k * lambda1 / top_panels)
    return np.unique(np.asarray(edges))


class FilonGrid:
    """Cached amplitude samples on a fixed panelization, integrated
    against exp(+/- i t s) for arbitrary t.

    ``amp`` is evaluated once at the Chebyshev-Lobatto nodes (in the
    oscillation variable) of every panel; ``integrate`` then costs only
    the Chebyshev moments per (panel, t).  The leftmost sliver [0,
    edges[1]] is delegated to the caller's tail model (non-oscillatory
    there by construction).
    """

    def __init__(self, edges, vmap: VariableMap, order: int = 24):
        self.vmap = vmap
        self.order = order
        self.edges = np.asarray(edges, dtype=float)
        xi = cheb_lobatto(order)  # descending from +1
        self.panels = []
        for a, b in zip(self.edges[1:-1], self.edges[2:]):
            sig_b = float(vmap.sigma(b, a))
            sig_nodes = 0.5 * sig_b * (1.0 + xi)
            lam_nodes = vmap.lam(sig_nodes, a)
            self.panels.append(
                {
                    "lam_a": a,
                    "lam_b": b,
                    "sig_b": sig_b,
                    "s_mid": float(vmap.s(a)) + 0.5 * sig_b,
                    "lam_nodes": lam_nodes,
                }
            )

    @property
    def all_nodes(self):
        return np.concatenate([p["lam_nodes"] for p in self.panels])

    def load_amplitude(self, amp_values):
        """Store amplitude samples (n_nodes,) or (n_nodes, m) and their
        Chebyshev coefficients per panel."""
        vals = np.asarray(amp_values)
        q = self.order + 1
        for i, p in enumerate(self.panels):
            block = vals[i * q : (i + 1) * q]
            p["coeffs"] = cheb_coefficients(np.moveaxis(block, 0, -1))

    def integrate(self, t: float, sign: int = +1):
        """integral exp(i sign t s) amp ds over the panelized range."""
        total = None
        err = 0.0
        for p in self.panels:
            half = 0.5 * p["sig_b"]
            omega = sign * t * half
            mom = cheb_moments(omega, self.order)
            phase = np.exp(1j * sign * t * p["s_mid"]) * half
            val = phase * (p["coeffs"] @ mom)
            total = val if total is None else total + val
            tail_c = np.abs(p["coeffs"][..., -(self.order // 4) :]).sum(axis=-1)
            err += np.max(np.atleast_1d(tail_c)) * abs(half) * min(
                2.0, 4.0 / max(1.0, abs(omega))
            )
        return total, err
