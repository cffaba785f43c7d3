"""Low-energy propagator kernels via the Stone formula.

For a Borel function g of H = -Delta + V the cutoff flow is

    g(H) chi(H) P_ac (x, y)
        = (1 / pi i) integral_0^inf g(lam^2) lam chi(lam)
                      [R_V^+ - R_V^-](lam^2)(x, y) dlam,

with the resolvent jump assembled per angular channel through the
symmetric identity R_V = R0 - R0 v M^{-1} v R0 and resummed.  The
supported multipliers are g = exp(i t E) (Schrodinger),
cos(t sqrt(E + m^2)) and sin(t sqrt(E + m^2))/sqrt(E + m^2)
(Klein-Gordon, m > 0; the wave flows are the massless limits).

The quadrature is Filon-Clenshaw-Curtis on dyadically graded panels
(:mod:`oscquad`): the density is evaluated once per panel node and reused
for every time, so the cost is independent of t.  Below the smallest
panel the integrand no longer oscillates and the resonance tail -- the
only non-negligible contribution there -- is integrated in closed form
against the threshold scalar model.

An independent cross-check diagonalizes the flattened channel
Hamiltonians in a large box and sums the spectral theorem directly
(:func:`eig_oracle`); it shares nothing with the resolvent pipeline
beyond the potential itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import discretize, kernels, oscquad
from .kernels import SpectralPoint

__all__ = [
    "MULTIPLIER_KINDS",
    "Multiplier",
    "Pair",
    "PropagatorRequest",
    "TimeSeries",
    "StaleOracleError",
    "spectral_density",
    "stone_evolve",
    "born_term",
    "eig_oracle",
]

MULTIPLIER_KINDS = ("schrod", "kgcos", "kgsin", "wavecos", "wavesin")

STONE_PREFACTOR = 1.0 / (np.pi * 1j)
# below this lam the threshold block of M is evaluated from its expansion
# model instead of the assembled matrix: the model's relative error
# O(lam^2 log lam) crosses the double-precision extraction noise
# ~1e-15 / |B(lam)| near 2e-4
LAM_MODEL = 1e-4


class StaleOracleError(RuntimeError):
    """Requested time beyond the box oracle's validity horizon."""


@dataclass(frozen=True)
class Multiplier:
    kind: str
    mass: float = 0.0

    def __post_init__(self):
        if self.kind not in MULTIPLIER_KINDS:
            raise ValueError(f"unknown multiplier {self.kind!r}")
        if self.kind.startswith("kg") and not self.mass > 0:
            raise ValueError("Klein-Gordon multipliers need mass > 0")
        if self.kind.startswith("wave") and self.mass != 0:
            raise ValueError("wave multipliers fix mass = 0")

    def vmap(self) -> oscquad.VariableMap:
        return oscquad.map_for(self.kind, self.mass)

    def parts(self):
        """(coefficient, sign) decomposition into exp(i sign t s) terms."""
        if self.kind == "schrod":
            return ((1.0, +1),)
        if self.kind in ("kgcos", "wavecos"):
            return ((0.5, +1), (0.5, -1))
        return ((-0.5j, +1), (0.5j, -1))  # sin(ts) = (e^{its}-e^{-its})/2i

    def measure_factor(self, lam):
        """Amplitude factor so that mult * lam * dlam = parts * factor * ds."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "schrod":
            return np.full_like(lam, 0.5)
        if self.kind == "kgcos":
            return np.sqrt(lam**2 + self.mass**2)
        if self.kind == "wavecos":
            return lam
        return np.ones_like(lam)  # both sine kinds

    def scalar(self, t, lam):
        """Direct pointwise evaluation of the multiplier."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "schrod":
            return np.exp(1j * t * lam**2)
        s = np.sqrt(lam**2 + self.mass**2)
        if self.kind == "kgcos" or self.kind == "wavecos":
            return np.cos(t * s)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(s > 0, np.sin(t * s) / np.where(s > 0, s, 1.0), t)
        return out

    def zero_limit(self, t):
        """mult(t, lam -> 0+), used by the closed-form tail."""
        if self.kind == "schrod":
            return 1.0 + 0.0j
        if self.kind == "kgcos":
            return math.cos(t * self.mass)
        if self.kind == "kgsin":
            return math.sin(t * self.mass) / self.mass
        if self.kind == "wavecos":
            return 1.0
        return float(t)  # wavesin: sin(t lam)/lam -> t


@dataclass(frozen=True)
class Pair:
    pid: str
    rx: float
    ry: float
    cosg: float = 1.0

    @property
    def distance(self) -> float:
        return float(kernels.law_of_cosines(self.rx, self.ry, self.cosg))


@dataclass
class PropagatorRequest:
    times: np.ndarray
    pairs: list
    multiplier: Multiplier
    lambda1: float = kernels.LAMBDA1_DEFAULT
    channels: int = 3
    lam_min: float = 1e-7
    order: int = 24
    top_panels: int = 4

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(self.times <= 0):
            raise ValueError("times must be positive")
        if np.any(self.times <= 2):
            warnings.warn("times at or below 2 are outside the large-time regime",
                          stacklevel=2)
        for p in self.pairs:
            if not (p.rx > 0 and p.ry > 0):
                raise ValueError("pair radii must be positive")


@dataclass
class TimeSeries:
    times: np.ndarray
    pair_ids: list
    values: np.ndarray  # (nt, npairs) complex
    err_est: np.ndarray
    multiplier: str
    classification: str = "free"

    def magnitudes(self, pid=None):
        if pid is None:
            return np.abs(self.values)
        j = self.pair_ids.index(pid)
        return np.abs(self.values[:, j])

    def accepted(self, rel: float = 1e-3):
        return self.err_est < rel * np.maximum(np.abs(self.values), 1e-300)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,pair_id,re,im,abs,err_est,multiplier,classification\n")
            for i, t in enumerate(self.times):
                for j, pid in enumerate(self.pair_ids):
                    v = self.values[i, j]
                    fh.write(
                        f"{float(t)!r},{pid},{float(v.real)!r},{float(v.imag)!r},"
                        f"{float(abs(v))!r},{float(self.err_est[i, j])!r},"
                        f"{self.multiplier},{self.classification}\n"
                    )

    @staticmethod
    def from_csv(path):
        import csv

        rows = list(csv.DictReader(open(path, encoding="utf-8")))
        times = sorted({float(r["t"]) for r in rows})
        pids = list(dict.fromkeys(r["pair_id"] for r in rows))
        values = np.zeros((len(times), len(pids)), dtype=complex)
        err = np.zeros_like(values, dtype=float)
        tix = {t: i for i, t in enumerate(times)}
        pix = {p: j for j, p in enumerate(pids)}
        for r in rows:
            i, j = tix[float(r["t"])], pix[r["pair_id"]]
            values[i, j] = float(r["re"]) + 1j * float(r["im"])
            err[i, j] = float(r["err_est"])
        return TimeSeries(
            times=np.asarray(times), pair_ids=pids, values=values, err_est=err,
            multiplier=rows[0]["multiplier"], classification=rows[0]["classification"],
        )


# ----------------------------------------------------------------------
# density machinery


class _DensityEngine:
    """[R_V^+ - R_V^-](lam^2) at fixed pairs, channel-resummed.

    The free part is closed-form (lam^2 A(lam d)); the potential
    correction goes through the JN decomposition per channel so the
    near-singular threshold block stays accurate at small lam, switching
    to the expansion model of B(lam) below LAM_MODEL.
    """

    def __init__(self, ws, zdata, pairs, channels):
        self.ws = ws
        self.zdata = zdata
        self.pairs = pairs
        self.channels = min(channels, 7) if ws is None else min(
            channels, ws.channels, 7
        )
        self._res_idx = None
        if ws is not None and zdata is not None and zdata.classification in (
            "FirstKind",
            "ThirdKind",
        ):
            self._res_idx = next(
                i for i, kv in enumerate(zdata.s1) if kv.ell == 0
            )
        self._model = self._build_model() if ws is not None else None

    # -- expansion model of the threshold block ------------------------

    def _build_model(self):
        if self.zdata is None or not self.zdata.s1:
            return None
        ws, z = self.ws, self.zdata
        k1 = len(z.s1)
        gram1 = np.zeros((k1, k1))
        pmat = np.zeros((k1, k1))
        for a, ka in enumerate(z.s1):
            for b, kb in enumerate(z.s1):
                if ka.ell == kb.ell:
                    gram1[a, b] = ka.vec @ ws._vkv(1, ka.ell) @ kb.vec
                if ka.ell == 0 and kb.ell == 0:
                    pmat[a, b] = (ka.vec @ ws.vtilde) * (ws.vtilde @ kb.vec) / ws.v_l1
        return {"gram1": gram1, "pmat": pmat}

    def _b_model(self, lam, sign):
        """B(lam) ~ g1t(lam) S1 P S1 + lam^2 S1 v G1 v S1 on the S1 basis."""
        g1t = kernels.g_coeff(1, SpectralPoint(lam, sign)) * self.ws.v_l1
        return g1t * self._model["pmat"] + lam**2 * self._model["gram1"]

    def resonance_scalar_constants(self):
        """(a, z) with f(lam) = 1/(lam^2 (a log lam + z)) on the '+' side."""
        i = self._res_idx
        p = self._model["pmat"][i, i]
        q = self._model["gram1"][i, i]
        k = kernels.expansion_constants()
        a = p * self.ws.v_l1 * k["a"][1]
        z = q + p * self.ws.v_l1 * k["z"][1]
        return a, z

    # -- per-node evaluation --------------------------------------------

    def free_density(self, lam):
        d = np.array([p.distance for p in self.pairs])
        return kernels.free_resolvent_difference(lam, d)

    def _rows(self, lam, sign, ell):
        """R0 rows from the pair points into the grid, v-weighted."""
        ws = self.ws
        pt = SpectralPoint(lam, sign)
        g = ws.grid
        amp = ws.v * g.sqrtw
        rx = np.array([p.rx for p in self.pairs])
        ry = np.array([p.ry for p in self.pairs])
        ax = kernels.channel_kernel(ell, pt, rx[:, None], g.nodes[None, :]) * amp
        ay = kernels.channel_kernel(ell, pt, ry[:, None], g.nodes[None, :]) * amp
        return ax, ay

    def _channel_factors(self, lam_eval, sign, ell):
        """Frozen per-(lam, sign, channel) pieces of the JN decomposition;
        cached because every node below LAM_MODEL shares lam_eval."""
        key = (lam_eval, sign, ell)
        if key in getattr(self, "_fcache", {}):
            return self._fcache[key]
        ws, z = self.ws, self.zdata
        pt = SpectralPoint(lam_eval, sign)
        m = ws.assemble_M(pt, ell)
        vecs = [kv.vec for kv in z.s1 if kv.ell == ell] if z is not None else []
        ax, ay = self._rows(lam_eval, sign, ell)
        if not vecs:
            entry = {"base": ax @ np.linalg.solve(m, ay.T)}
        else:
            phi = np.stack(vecs, axis=1)
            mp = m + (phi @ phi.T).astype(complex)
            mp_inv_ay = np.linalg.solve(mp, ay.T)
            mp_inv_phi = np.linalg.solve(mp, phi.astype(complex))
            entry = {
                "base": ax @ mp_inv_ay,
                "ua": ax @ mp_inv_phi,
                "ub": phi.T @ mp_inv_ay,
                "bdirect": np.asarray(
                    np.eye(len(vecs)) - phi.T @ mp_inv_phi, dtype=complex
                ),
            }
        if not hasattr(self, "_fcache"):
            self._fcache = {}
        if len(self._fcache) > 8:
            self._fcache.clear()
        self._fcache[key] = entry
        return entry

    def correction(self, lam, sign=+1, split: bool = False):
        """(R0 v M^{-1} v R0)(x, y) resummed over channels at the pairs.

        With ``split`` the resonance-scalar part (the channel-0 threshold
        direction's diagonal contribution) is returned separately, through
        the same hybrid B evaluation as the total, so the two subtract
        exactly in the leading-term decomposition.
        """
        z = self.zdata
        out = np.zeros(len(self.pairs), dtype=complex)
        res_out = np.zeros(len(self.pairs), dtype=complex)
        use_model = lam < LAM_MODEL
        lam_eval = LAM_MODEL if use_model else lam
        for ell in range(self.channels):
            fac = self._channel_factors(lam_eval, sign, ell)
            idx = (
                [i for i, kv in enumerate(z.s1) if kv.ell == ell]
                if z is not None
                else []
            )
            res_vals = None
            if "ua" not in fac:
                vals = fac["base"]
            else:
                if use_model:
                    bblk = self._b_model(lam, sign)[np.ix_(idx, idx)]
                else:
                    bblk = fac["bdirect"]
                binv = np.linalg.inv(bblk)
                sing = fac["ua"] @ binv @ fac["ub"]
                vals = fac["base"] + sing
                if split and self._res_idx in idx:
                    j0 = idx.index(self._res_idx)
                    res_vals = np.outer(
                        fac["ua"][:, j0] * binv[j0, j0], fac["ub"][j0, :]
                    )
            for j in range(len(self.pairs)):
                p = self.pairs[j]
                out[j] += kernels.resum_channels([vals[j, j]], [ell], p.rx, p.ry, p.cosg)
                if res_vals is not None:
                    res_out[j] += kernels.resum_channels(
                        [res_vals[j, j]], [ell], p.rx, p.ry, p.cosg
                    )
        return (out, res_out) if split else out

    def density(self, lam, part: str = "full"):
        """[R_V^+ - R_V^-] at the pairs = 2i Im R_V^+ (kernels conjugate
        under the sign flip; verified by spectral_density's two-sided test).

        ``part`` selects "full" or the "resonance" singular component.
        """
        rho = self.free_density(lam).astype(complex)
        if self.ws is None:
            return rho
        if part == "full":
            corr = self.correction(lam, +1)
            return rho - 2j * np.imag(corr)
        if part != "resonance":
            raise ValueError("part must be 'full' or 'resonance'")
        _, res = self.correction(lam, +1, split=True)
        return -2j * np.imag(res)

    def resonance_weight(self, lam_anchor=LAM_MODEL):
        """W(x, y) multiplying (f+ - f-) in the small-lam density model."""
        ws, z = self.ws, self.zdata
        i = self._res_idx
        kv = z.s1[i]
        pt = SpectralPoint(lam_anchor, +1)
        ax, ay = self._rows(lam_anchor, +1, 0)
        m = ws.assemble_M(pt, 0)
        vecs = [k2.vec for k2 in z.s1 if k2.ell == 0]
        phi = np.stack(vecs, axis=1)
        mp = m + (phi @ phi.T).astype(complex)
        ua = ax @ np.linalg.solve(mp, phi.astype(complex))
        ub = phi.T @ np.linalg.solve(mp, ay.T)
        j0 = [i2 for i2, k2 in enumerate(z.s1) if k2.ell == 0].index(i)
        w = np.empty(len(self.pairs), dtype=complex)
        for j, p in enumerate(self.pairs):
            w[j] = kernels.resum_channels(
                [ua[j, j0] * ub[j0, j]], [0], p.rx, p.ry, p.cosg
            )
        return np.real(w)


def _tail_log_integral(lam_min, a, z):
    """integral_0^{lam_min} lam (f+ - f-)(lam) dlam in closed form for
    f(lam) = 1/(lam^2 (a log lam + z)):

        (-2i/a) [ atan((a log lam_min + Re z)/Im z) + sign(a/Im z) pi/2 ].
    """
    re_z, im_z = float(np.real(z)), float(np.imag(z))
    if im_z == 0 or a == 0:
        return 0.0 + 0.0j
    q1 = (a * math.log(lam_min) + re_z) / im_z
    return (-2j / a) * (math.atan(q1) + math.copysign(math.pi / 2, a / im_z))


# ----------------------------------------------------------------------
# public operations


def spectral_density(ws, lam: float, pairs, channels: int = 3, zdata=None):
    """[R_V^+ - R_V^-](lam^2) at the pairs with both boundary values
    computed honestly (the production path exploits conjugacy instead)."""
    eng = _DensityEngine(ws, zdata, pairs, channels)
    rho_free = eng.free_density(lam)
    if ws is None:
        return rho_free.astype(complex)
    cp = eng.correction(lam, +1)
    cm = eng.correction(lam, -1)
    return rho_free - (cp - cm)


def _filon_grid(req: PropagatorRequest, classification: str):
    lam_min = req.lam_min
    if req.multiplier.kind == "wavesin":
        lam_min = min(lam_min, 0.05 / float(np.max(req.times)))
    edges = oscquad.dyadic_edges(lam_min, req.lambda1, req.top_panels)
    return oscquad.FilonGrid(edges, req.multiplier.vmap(), order=req.order), lam_min


def stone_evolve(ws, zdata, req: PropagatorRequest) -> TimeSeries:
    """Propagator kernel values at the requested times and pairs."""
    classification = zdata.classification if zdata is not None else "free"
    grid, lam_min = _filon_grid(req, classification)
    eng = _DensityEngine(ws, zdata, req.pairs, req.channels)

    nodes = grid.all_nodes
    chi = kernels.smooth_cutoff(nodes, req.lambda1)
    meas = req.multiplier.measure_factor(nodes)
    amps = np.empty((nodes.size, len(req.pairs)), dtype=complex)
    for i, lam in enumerate(nodes):
        amps[i] = eng.density(lam) * chi[i] * meas[i]
    grid.load_amplitude(amps)

    # closed-form resonance tail below the panelization
    tail_w = None
    if classification in ("FirstKind", "ThirdKind"):
        a, zc = eng.resonance_scalar_constants()
        jtail = _tail_log_integral(lam_min, a, zc)
        tail_w = -eng.resonance_weight() * jtail  # density ~ -W (f+ - f-)

    nt = req.times.size
    values = np.zeros((nt, len(req.pairs)), dtype=complex)
    err = np.zeros((nt, len(req.pairs)))
    for it, t in enumerate(req.times):
        acc = np.zeros(len(req.pairs), dtype=complex)
        e = 0.0
        for coef, sign in req.multiplier.parts():
            val, est = grid.integrate(t, sign=sign)
            acc = acc + coef * np.atleast_1d(val)
            e += abs(coef) * est
        if tail_w is not None:
            acc = acc + req.multiplier.zero_limit(t) * tail_w
        values[it] = STONE_PREFACTOR * acc
        err[it] = abs(STONE_PREFACTOR) * e
    return TimeSeries(
        times=req.times, pair_ids=[p.pid for p in req.pairs], values=values,
        err_est=err, multiplier=req.multiplier.kind, classification=classification,
    )


def resonance_leading_series(ws, zdata, req: PropagatorRequest) -> TimeSeries:
    """The resonance channel's leading term of the flow.

    Integrates the model density -W(x,y) (f+ - f-)(lam), with f the
    threshold scalar 1/(lam^2 (a log lam + z)), through the same Filon
    panels; its size is O(1/log t) and subtracting it from the full flow
    exposes the O(1/t)-and-below remainder menu.
    """
    if zdata is None or zdata.classification not in ("FirstKind", "ThirdKind"):
        raise ValueError("leading term defined for resonance classifications")
    grid, lam_min = _filon_grid(req, zdata.classification)
    eng = _DensityEngine(ws, zdata, req.pairs, req.channels)
    a, zc = eng.resonance_scalar_constants()
    nodes = grid.all_nodes
    chi = kernels.smooth_cutoff(nodes, req.lambda1)
    meas = req.multiplier.measure_factor(nodes)
    amps = np.empty((nodes.size, len(req.pairs)), dtype=complex)
    for i, lam in enumerate(nodes):
        amps[i] = eng.density(lam, part="resonance") * chi[i] * meas[i]
    grid.load_amplitude(amps)
    jtail = _tail_log_integral(lam_min, a, zc)
    tail_w = -eng.resonance_weight() * jtail
    nt = req.times.size
    values = np.zeros((nt, len(req.pairs)), dtype=complex)
    err = np.zeros((nt, len(req.pairs)))
    for it, t in enumerate(req.times):
        acc = np.zeros(len(req.pairs), dtype=complex)
        e = 0.0
        for coef, sign in req.multiplier.parts():
            val, est = grid.integrate(t, sign=sign)
            acc = acc + coef * np.atleast_1d(val)
            e += abs(coef) * est
        acc = acc + req.multiplier.zero_limit(t) * tail_w
        values[it] = STONE_PREFACTOR * acc
        err[it] = abs(STONE_PREFACTOR) * e
    return TimeSeries(
        times=req.times, pair_ids=[p.pid for p in req.pairs], values=values,
        err_est=err, multiplier=req.multiplier.kind,
        classification=f"{zdata.classification}-leading",
    )


def born_term(ws, k: int, req: PropagatorRequest) -> TimeSeries:
    """Stone-type integral of the k-th term R0 (V R0)^k of the expansion
    in powers of the potential (k = 0 is the free flow)."""
    if not 0 <= k <= 3:
        raise ValueError("k must be 0..3")
    grid, lam_min = _filon_grid(req, "free")
    nodes = grid.all_nodes
    chi = kernels.smooth_cutoff(nodes, req.lambda1)
    meas = req.multiplier.measure_factor(nodes)
    amps = np.empty((nodes.size, len(req.pairs)), dtype=complex)
    if k == 0:
        d = np.array([p.distance for p in req.pairs])
        for i, lam in enumerate(nodes):
            amps[i] = kernels.free_resolvent_difference(lam, d) * chi[i] * meas[i]
    else:
        g = ws.grid
        vv = np.asarray(ws.potential(g.nodes))
        rx = np.array([p.rx for p in req.pairs])
        ry = np.array([p.ry for p in req.pairs])
        nch = min(req.channels, ws.channels, 7)
        for i, lam in enumerate(nodes):
            tot = np.zeros(len(req.pairs), dtype=complex)
            for sign in (+1, -1):
                pt = SpectralPoint(lam, sign)
                for ell in range(nch):
                    kern = lambda a, b: kernels.channel_kernel(ell, pt, a, b)
                    amat = discretize.assemble(kern, g)
                    ahat_x = kern(rx[:, None], g.nodes[None, :]) * g.sqrtw
                    ahat_y = kern(ry[:, None], g.nodes[None, :]) * g.sqrtw
                    chain = ahat_y.T
                    for _ in range(k - 1):
                        chain = amat @ (vv[:, None] * chain)
                    vals = ahat_x @ (vv[:, None] * chain)
                    for j, p in enumerate(req.pairs):
                        tot[j] += sign * kernels.resum_channels(
                            [vals[j, j]], [ell], p.rx, p.ry, p.cosg
                        )
            amps[i] = tot * chi[i] * meas[i]
    grid.load_amplitude(amps)
    nt = req.times.size
    values = np.zeros((nt, len(req.pairs)), dtype=complex)
    err = np.zeros((nt, len(req.pairs)))
    for it, t in enumerate(req.times):
        acc = np.zeros(len(req.pairs), dtype=complex)
        e = 0.0
        for coef, sign in req.multiplier.parts():
            val, est = grid.integrate(t, sign=sign)
            acc = acc + coef * np.atleast_1d(val)
            e += abs(coef) * est
        values[it] = STONE_PREFACTOR * acc
        err[it] = abs(STONE_PREFACTOR) * e
    return TimeSeries(
        times=req.times, pair_ids=[p.pid for p in req.pairs], values=values,
        err_est=err, multiplier=req.multiplier.kind,
        classification=f"born{k}",
    )


def eig_oracle(
    ws,
    req: PropagatorRequest,
    box_radius: float | None = None,
    step: float = 0.05,
    ac_only: bool = True,
    bound_floor: float = 5e-3,
) -> TimeSeries:
    """Box-diagonalization cross-check of the cutoff flow.

    Diagonalizes the flattened channel Hamiltonians with a Dirichlet wall,
    sums mult(t, sqrt(E)) chi(sqrt(E)) over the spectrum, and resums the
    channels.  Valid for t below box_radius / 4, before wall reflections
    pollute the continuum approximation.

    ``ac_only`` drops genuine bound states (E below -bound_floor).  Modes
    inside the floor band are kept: at a zero-energy threshold the box
    discretization displaces a continuum-edge mode to slightly negative
    energy, and that mode carries the threshold spectral mass.  The
    potential enters cell-averaged (pointwise sampling would shift a well
    edge by step/2 and detune thresholds), and the centrifugal barrier is
    discretized so the regular zero-energy branch r^{nu+1/2} is exact.
    """
    tmax = float(np.max(req.times))
    rbox = box_radius or 4.0 * tmax
    if tmax > rbox / 4.0:
        raise StaleOracleError(
            f"t = {tmax} beyond the box horizon {rbox / 4.0}"
        )
    r = np.arange(step, rbox, step)
    n = r.size
    emax = (2 * req.lambda1) ** 2 * 1.05
    if ws is None:
        vvals = np.zeros(n)
    else:
        gx, gw = np.polynomial.legendre.leggauss(4)
        cells = r[:, None] + 0.5 * step * gx[None, :]
        vvals = np.asarray(ws.potential(cells)) @ (gw / 2.0)
    nch = min(req.channels, 7)
    rx = np.array([p.rx for p in req.pairs])
    ry = np.array([p.ry for p in req.pairs])
    nt = req.times.size
    values = np.zeros((nt, len(req.pairs)), dtype=complex)
    for ell in range(nch):
        nu = ell + 1
        up = (r + step) ** (nu + 0.5)
        um = np.maximum(r - step, 0.0) ** (nu + 0.5)
        barrier = ((up + um) / r ** (nu + 0.5) - 2.0) / step**2
        diag = 2.0 / step**2 + barrier + vvals
        off = np.full(n - 1, -1.0 / step**2)
        lo = -bound_floor if ac_only else -np.max(np.abs(vvals)) - 1.0
        evals, evecs = eigh_tridiagonal(diag, off, select="v", select_range=(lo, emax))
        lamj = np.sqrt(np.maximum(evals, 0.0))
        chij = kernels.smooth_cutoff(lamj, req.lambda1)
        keep = chij > 0
        evals, evecs, lamj, chij = evals[keep], evecs[:, keep], lamj[keep], chij[keep]
        ux = np.empty((len(req.pairs), evecs.shape[1]))
        uy = np.empty_like(ux)
        for j in range(evecs.shape[1]):
            ux[:, j] = np.interp(rx, r, evecs[:, j])
            uy[:, j] = np.interp(ry, r, evecs[:, j])
        for it, t in enumerate(req.times):
            mult = req.multiplier.scalar(t, lamj)
            flat = (ux * (mult * chij)[None, :] * uy).sum(axis=1) / step
            for jp, p in enumerate(req.pairs):
                values[it, jp] += kernels.resum_channels(
                    [flat[jp]], [ell], p.rx, p.ry, p.cosg
                )
    return TimeSeries(
        times=req.times, pair_ids=[p.pid for p in req.pairs], values=values,
        err_est=np.full((nt, len(req.pairs)), np.nan), multiplier=req.multiplier.kind,
        classification="oracle",
    )
