"""Propagator quadrature: anchors, identities, oracle cross-checks.

Heavy full-resolution runs live in the acceptance suite; these tests use
coarser grids to exercise every code path quickly.
"""

import warnings

import numpy as np
import pytest

from disp4d import evolution as ev
from disp4d import kernels, potentials, spectral
from disp4d.evolution import Multiplier, Pair, PropagatorRequest

warnings.filterwarnings("ignore", message=".*outside.*")
warnings.filterwarnings("ignore", message=".*large-time.*")

PAIRS = [Pair("a", 2.0, 3.0, 0.3), Pair("swap", 3.0, 2.0, 0.3)]


@pytest.fixture(scope="module")
def ws_regular():
    return spectral.Workspace(potentials.square_well(1.0), channels=2, n=144)


@pytest.fixture(scope="module")
def z_regular(ws_regular):
    return ws_regular.classify()


@pytest.fixture(scope="module")
def ws_first():
    return spectral.Workspace(potentials.square_well(5.783185962946785), channels=2, n=144)


@pytest.fixture(scope="module")
def z_first(ws_first):
    return ws_first.classify()


def small_request(times, mult=None, pairs=None):
    return PropagatorRequest(
        times=np.asarray(times),
        pairs=pairs or PAIRS,
        multiplier=mult or Multiplier("schrod"),
        channels=2,
        lam_min=1e-6,
        order=16,
        top_panels=2,
    )


def test_multiplier_validation():
    with pytest.raises(ValueError):
        Multiplier("kgsin", 0.0)
    with pytest.raises(ValueError):
        Multiplier("wavesin", 1.0)
    with pytest.raises(ValueError):
        Multiplier("gaussian")
    assert Multiplier("kgcos", 2.0).parts() == ((0.5, +1), (0.5, -1))


def test_free_kernel_anchor():
    times = np.geomspace(1e3, 1e6, 7)
    ser = ev.stone_evolve(None, None, small_request(times))
    ref = 1.0 / (16 * np.pi**2 * times**2)
    assert np.max(np.abs(ser.magnitudes("a") / ref - 1.0)) < 0.02


def test_kernel_symmetry(ws_regular, z_regular):
    times = np.geomspace(1e3, 1e5, 5)
    ser = ev.stone_evolve(ws_regular, z_regular, small_request(times))
    a = ser.values[:, 0]
    b = ser.values[:, 1]
    assert np.max(np.abs(a - b)) < 1e-8 * np.max(np.abs(a))


def test_timeseries_csv_roundtrip(tmp_path):
    times = np.geomspace(1e3, 1e6, 4)
    ser = ev.stone_evolve(None, None, small_request(times))
    path = tmp_path / "series.csv"
    ser.to_csv(path)
    back = ev.TimeSeries.from_csv(path)
    assert np.allclose(back.values, ser.values, rtol=1e-15)
    assert back.pair_ids == ser.pair_ids
    assert back.multiplier == "schrod"


def test_spectral_density_free_reduces_to_amplitude():
    rho = ev.spectral_density(None, 0.1, PAIRS)
    d = np.array([p.distance for p in PAIRS])
    ref = kernels.free_resolvent_difference(0.1, d)
    assert np.allclose(rho, ref, rtol=1e-14)


def test_spectral_density_conjugate_symmetry(ws_regular, z_regular):
    rho = ev.spectral_density(ws_regular, 0.05, PAIRS, channels=2, zdata=z_regular)
    # density = 2i Im R+ is i times a real function
    assert np.max(np.abs(np.imag(rho / 1j))) < 1e-10 * np.max(np.abs(rho))


def test_density_engine_matches_two_sided_op(ws_regular, z_regular):
    eng = ev._DensityEngine(ws_regular, z_regular, PAIRS, 2)
    lam = 0.05
    fast = eng.density(lam)
    honest = ev.spectral_density(ws_regular, lam, PAIRS, channels=2, zdata=z_regular)
    assert np.allclose(fast, honest, rtol=1e-10)


def test_born_series_consistency(ws_regular, z_regular):
    # R_V from the symmetric identity equals the iterated form
    # R0 - R0VR0 + R0VR0VR0 - R0VR0 v M^{-1} v R0VR0 (same grid, lam fixed)
    lam = 0.05
    ws = ws_regular
    g = ws.grid
    vv = np.asarray(ws.potential(g.nodes))
    pt = kernels.SpectralPoint(lam, +1)
    rx = np.array([p.rx for p in PAIRS])
    ry = np.array([p.ry for p in PAIRS])
    total_sym = np.zeros(len(PAIRS), dtype=complex)
    total_born = np.zeros(len(PAIRS), dtype=complex)
    import disp4d.discretize as dz

    for ell in range(2):
        kern = lambda a, b: kernels.channel_kernel(ell, pt, a, b)
        base = kernels.channel_kernel_matrix(ell, pt, g.nodes)
        amat = dz.assemble(kern, g, base_matrix=base)
        ax = kern(rx[:, None], g.nodes[None, :]) * g.sqrtw
        ay = kern(ry[:, None], g.nodes[None, :]) * g.sqrtw
        m = ws.assemble_M(pt, ell)
        minv = np.linalg.inv(m)
        va = ws.v
        # symmetric identity: R0 - R0 v M^{-1} v R0
        corr = (ax * va) @ minv @ (ay * va).T
        free_flat = kern(rx[:, None], ry[None, :])
        sym = np.diag(free_flat) - np.diag(corr)
        # iterated form
        dv = vv
        t1 = ax @ (dv[:, None] * ay.T)
        t2 = ax @ (dv[:, None] * (amat @ (dv[:, None] * ay.T)))
        inner_x = (ax @ (dv[:, None] * amat)) * va
        inner_y = ((amat @ (dv[:, None] * ay.T)).T * va).T
        t3 = inner_x @ minv @ inner_y
        born = np.diag(free_flat) - np.diag(t1) + np.diag(t2) - np.diag(t3)
        total_sym += sym
        total_born += born
    assert np.max(np.abs(total_sym - total_born)) < 1e-8 * np.max(np.abs(total_sym))


def test_born_k0_schrod_slope():
    times = np.geomspace(1e3, 1e7, 12)
    ser = ev.born_term(None, 0, small_request(times))
    slope = np.polyfit(np.log(times), np.log(ser.magnitudes("a")), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.05)


def test_eig_oracle_free_agrees_with_closed_form():
    times = np.array([5.0, 20.0, 50.0])
    req = small_request(times)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        orc = ev.eig_oracle(None, req, box_radius=240.0, step=0.05)
        stone = ev.stone_evolve(None, None, req)
    rel = np.abs(orc.values - stone.values) / np.abs(stone.values)
    assert np.max(rel) < 1e-2


def test_eig_oracle_stale_horizon():
    req = small_request(np.array([100.0]))
    with pytest.raises(ev.StaleOracleError):
        ev.eig_oracle(None, req, box_radius=80.0)


def test_bound_state_requires_ac_projection():
    # the channel-1 threshold well binds a channel-0 state; without the
    # positive-spectrum filter the oracle keeps a non-decaying term
    ws = spectral.Workspace(potentials.square_well(14.681970642123893), channels=1, n=144)
    times = np.array([5.0, 10.0, 20.0])
    req = PropagatorRequest(
        times=times, pairs=[Pair("a", 1.5, 2.0, 1.0)], multiplier=Multiplier("schrod"),
        channels=1, lam_min=1e-6, order=16, top_panels=2,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with_f = ev.eig_oracle(ws, req, box_radius=100.0, step=0.05, ac_only=True)
        without = ev.eig_oracle(ws, req, box_radius=100.0, step=0.05, ac_only=False)
    diff = np.abs(with_f.values - without.values)
    assert np.min(diff) > 1e-4  # bound-state contribution does not decay
    assert np.max(np.abs(np.diff(np.abs(diff), axis=0))) < np.max(diff)


def test_resonance_tail_model_matches_density(ws_first, z_first):
    eng = ev._DensityEngine(ws_first, z_first, PAIRS[:1], 2)
    a, zc = eng.resonance_scalar_constants()
    w = eng.resonance_weight()
    for lam in (1e-5, 1e-4):
        rho = eng.density(lam)[0]
        f = 1.0 / (lam**2 * (a * np.log(lam) + zc))
        model = -w[0] * (f - np.conj(f))
        assert abs(rho - model) < 2e-4 * abs(rho)


def test_tail_log_integral_closed_form():
    # against brute-force quadrature in the log variable
    a, z = -0.35, 0.21 + 0.54j
    lam_min = 1e-6
    # the w-space integrand decays like 1/w^2: a wide window is required
    wgrid = np.linspace(np.log(lam_min) - 1e5, np.log(lam_min), 2_000_000)
    integrand = 1.0 / (a * wgrid + z) - 1.0 / (a * wgrid + np.conj(z))
    brute = np.trapezoid(integrand, wgrid)
    closed = ev._tail_log_integral(lam_min, a, z)
    assert closed == pytest.approx(brute, rel=1e-3)


def test_propagator_stable_under_grid_refinement():
    # doubling the radial grid moves kernel values by well under 1%
    times = np.geomspace(1e3, 1e5, 3)
    vals = []
    for n in (144, 288):
        ws = spectral.Workspace(potentials.square_well(1.0), channels=2, n=n)
        z = ws.classify()
        ser = ev.stone_evolve(ws, z, small_request(times, pairs=PAIRS[:1]))
        vals.append(ser.values[:, 0])
    rel = np.abs(vals[0] - vals[1]) / np.abs(vals[1])
    assert np.max(rel) < 1e-2


def test_request_validation():
    with pytest.raises(ValueError):
        PropagatorRequest(times=np.array([-1.0]), pairs=PAIRS, multiplier=Multiplier("schrod"))
    with pytest.raises(ValueError):
        PropagatorRequest(
            times=np.array([10.0]),
            pairs=[Pair("bad", -1.0, 2.0)],
            multiplier=Multiplier("schrod"),
        )
