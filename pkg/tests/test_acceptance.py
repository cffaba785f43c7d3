"""Acceptance criteria, one test per criterion, stated tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v -s`` to get one PASS/FAIL
line per criterion.  The criteria marked PRIMARY in the build plan map to
tests 01..11 below; the known-unattainable sub-clause of criterion 9 (the
free Klein-Gordon term's pointwise slope; see the decisions ledger) is a
strict expected failure with its companion upper-bound check passing.
"""

import time
import warnings

import numpy as np
import pytest

from disp4d import decayfit, evolution as ev, kernels, oscint, potentials, spectral
from disp4d.evolution import Multiplier, Pair, PropagatorRequest
from disp4d.kernels import SpectralPoint

warnings.filterwarnings("ignore")

C_L0 = 5.783185962946785
C_L1 = 14.681970642123893
C_L2 = 26.374616427163247
TW_RADII = (1.0, 2.2)
TW_FROZEN = (35.818705629160, 3.454850199907)

PAIRS2 = [Pair("a", 2.0, 3.0, 0.3), Pair("b", 2.5, 3.5, -0.4)]

_t0 = time.time()


def _report(num, name, ok, detail=""):
    mark = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:>3s} {name:<34s} {mark}  {detail} "
          f"[t+{time.time() - _t0:7.1f}s]")
    return ok


# -- shared fixtures ----------------------------------------------------


@pytest.fixture(scope="module")
def ws_regular():
    return spectral.Workspace(potentials.square_well(1.0), channels=3)


@pytest.fixture(scope="module")
def z_regular(ws_regular):
    return ws_regular.classify()


@pytest.fixture(scope="module")
def ws_first():
    return spectral.Workspace(potentials.square_well(C_L0), channels=3)


@pytest.fixture(scope="module")
def z_first(ws_first):
    return ws_first.classify()


@pytest.fixture(scope="module")
def ws_second1():
    return spectral.Workspace(potentials.square_well(C_L1), channels=3)


@pytest.fixture(scope="module")
def ws_second2():
    return spectral.Workspace(potentials.square_well(C_L2), channels=3)


@pytest.fixture(scope="module")
def first_series(ws_first, z_first):
    """FirstKind Schrodinger series on a 4x4 radius grid, t in [1e4, 1e10]."""
    radii = [2.0, 2.6, 3.4, 4.4]
    pairs = [
        Pair(f"g{i}{j}", rx, ry, 0.4)
        for i, rx in enumerate(radii)
        for j, ry in enumerate(radii)
    ]
    times = np.geomspace(1e4, 1e10, 16)
    req = PropagatorRequest(times=times, pairs=pairs, multiplier=Multiplier("schrod"))
    return radii, ev.stone_evolve(ws_first, z_first, req)


# -- criteria -----------------------------------------------------------


def test_criterion_01_free_kernel_anchor():
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(None, None, req)
    ref = 1.0 / (16 * np.pi**2 * times**2)
    dev = np.max(np.abs(np.abs(ser.values) / ref[:, None] - 1.0))
    assert _report("01", "free-kernel anchor 1/(16 pi^2 t^2)", dev <= 0.02,
                   f"max dev {dev:.2%} <= 2%")


def test_criterion_02_regular_rate(ws_regular, z_regular):
    assert z_regular.classification == "Regular"
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(ws_regular, z_regular, req)
    slope = decayfit.loglog_slope(times, ser.magnitudes("a"))
    assert _report("02", "regular well slope -2 +/- 0.05",
                   abs(slope + 2.0) <= 0.05, f"slope {slope:.4f}")


def test_criterion_03_first_kind(z_first, first_series, ws_first):
    assert z_first.classification == "FirstKind"
    radii, ser = first_series
    times = ser.times

    # compensated flatness within 25 percent of the median
    comp = ser.magnitudes("g00") * np.log(times)
    med = np.median(comp)
    flat_ok = comp.max() <= 1.25 * med and comp.min() >= 0.75 * med

    # remainder after removing the resonance leading term (the component
    # whose magnitude is the fitted 1/log t law), times t, stays bounded
    model = decayfit.expected_models("FirstKind")
    radgrid = [2.0, 2.6, 3.4, 4.4]
    req_lead = PropagatorRequest(
        times=times,
        pairs=[Pair("g00", radgrid[0], radgrid[0], 0.4)],
        multiplier=Multiplier("schrod"),
    )
    lead = ev.resonance_leading_series(ws_first, z_first, req_lead)
    rem = np.abs(ser.values[:, ser.pair_ids.index("g00")] - lead.values[:, 0])
    rt = rem * times
    early = np.max(rt[times <= 1e6])
    late = np.max(rt[times >= 1e8])
    bounded_ok = late <= 3.0 * early

    # rank-one structure of the 1/log coefficients against psi (x) psi
    cmat = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            fit = decayfit.fit_magnitudes(times, ser.magnitudes(f"g{i}{j}"), model)
            cmat[i, j] = fit.coefficients["1/log"]
    lead, s2_ratio = decayfit.rank_one_factor(cmat)
    rr = np.asarray(radii)
    psi_vals = np.abs(z_first.resonance_psi(rr) / rr**1.5)
    u = np.abs(lead) / np.linalg.norm(lead)
    p = psi_vals / np.linalg.norm(psi_vals)
    psi_ok = s2_ratio <= 0.05 and np.max(np.abs(u - p)) <= 0.05

    ok = flat_ok and bounded_ok and psi_ok
    assert _report(
        "03", "first kind: log law + rank one", ok,
        f"comp band [{comp.min()/med:.3f},{comp.max()/med:.3f}], "
        f"rem*t late/early {late/early:.2f}, s2/s1 {s2_ratio:.3f}, "
        f"|u-psi| {np.max(np.abs(u-p)):.3f}",
    )


def test_criterion_04_second_kind_l1(ws_second1):
    z = ws_second1.classify()
    assert z.classification == "SecondKind"
    m1 = z.moments[0]["m1"]
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(ws_second1, z, req)
    slope = decayfit.loglog_slope(times, ser.magnitudes("a"))
    ok = abs(m1) > 1e-3 and abs(slope + 1.0) <= 0.05
    assert _report("04", "second kind (l=1): slope -1", ok,
                   f"slope {slope:.4f}, |m1| {abs(m1):.3f}")


def test_criterion_05_eigenvalue_cancellation(ws_second2):
    z = ws_second2.classify()
    assert z.classification == "SecondKind"
    m = z.moments[0]
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(ws_second2, z, req)
    slope = decayfit.loglog_slope(times, ser.magnitudes("a"))
    ok = abs(m["m0"]) <= 1e-8 and abs(m["m1"]) <= 1e-8 and abs(slope + 2.0) <= 0.1
    assert _report("05", "eigenvalue cancellation: slope -2", ok,
                   f"slope {slope:.4f}, m0 {m['m0']:.1e}, m1 {m['m1']:.1e}")


def test_criterion_06_third_kind():
    c1, c2 = potentials.tune_two_well()
    assert abs(c1 - TW_FROZEN[0]) < 1e-5 and abs(c2 - TW_FROZEN[1]) < 1e-5
    ws = spectral.Workspace(potentials.two_well(c1, c2, TW_RADII), channels=3)
    z = ws.classify()
    assert z.classification == "ThirdKind"
    pairs = [Pair("a", 5.0, 6.5, 0.3)]
    times = np.geomspace(1e4, 1e10, 16)
    req = PropagatorRequest(times=times, pairs=pairs, multiplier=Multiplier("schrod"))
    ser = ev.stone_evolve(ws, z, req)
    model = decayfit.expected_models("ThirdKind")
    fit = decayfit.fit_magnitudes(times, ser.magnitudes("a"), model)
    tmid = np.sqrt(times[0] * times[-1])
    log_part = abs(fit.coefficients["1/log"]) / np.log(tmid)
    scale = np.interp(tmid, times, ser.magnitudes("a"))
    ok = fit.dominant == "1/log" and log_part >= 0.3 * scale
    assert _report("06", "third kind: 1/log component", ok,
                   f"dominant {fit.dominant}, log share {log_part/scale:.2f}")


def test_criterion_07_expansion_suite(ws_regular, ws_first, z_first, ws_second2):
    rep = ws_regular.expansion_report("Mexp", lams=np.geomspace(1e-3, 1e-1, 12))
    floors = {"order0": 1.5, "order1": 1.5, "order2": 3.5, "order3": 5.5}
    slopes = {r["name"]: r["slope"] for r in rep["records"]}
    mexp_ok = all(slopes[k] >= v for k, v in floors.items())

    a, zc, r2 = ws_first.fit_f_log_model(z_first)
    f_ok = r2 >= 0.999

    z2 = ws_second2.classify()
    rep2 = ws_second2.expansion_report(
        "second", zdata=z2, lams=np.geomspace(1e-4, 3e-2, 8)
    )
    d2_ok = rep2["records"][0]["rel_at_smallest"] <= 1e-2

    rep3 = ws_second2.expansion_report("cancel", zdata=z2)
    pe_ok = rep3["records"][0]["norm"] <= 1e-8

    ok = mexp_ok and f_ok and d2_ok and pe_ok
    assert _report(
        "07", "expansion suite", ok,
        f"slopes {[round(slopes[k],2) for k in floors]}, R2 {r2:.6f}, "
        f"D2 rel {rep2['records'][0]['rel_at_smallest']:.1e}, "
        f"PeVx {rep3['records'][0]['norm']:.1e}",
    )


def test_criterion_08_oracle_equivalence(ws_regular, z_regular, ws_first, z_first):
    times = np.geomspace(1.0, 200.0, 8)
    worst = 0.0
    for ws, z in ((ws_regular, z_regular), (ws_first, z_first)):
        req = PropagatorRequest(
            times=times, pairs=PAIRS2, multiplier=Multiplier("schrod")
        )
        stone = ev.stone_evolve(ws, z, req)
        # the box bias in the threshold energy enters the kernel like t * dE,
        # so the step is chosen with the t-horizon in mind (dE ~ h^2)
        oracle = ev.eig_oracle(ws, req, box_radius=800.0, step=0.0125)
        rel = np.max(np.abs(stone.values - oracle.values) / np.abs(stone.values))
        worst = max(worst, float(rel))
    assert _report("08", "stone vs eigendecomposition oracle", worst <= 1e-2,
                   f"worst rel {worst:.2%}")


@pytest.mark.xfail(
    strict=True,
    reason="the cutoff free Klein-Gordon term decays like t^-2 pointwise at "
    "fixed pairs; the t^{-3/2} rate is a uniform upper bound, not attained "
    "on any fixed pair (see the decisions ledger); the literal slope window "
    "-1.5 +/- 0.05 therefore cannot be met",
)
def test_criterion_09a_kg_born_slope_as_stated():
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2[:1], multiplier=Multiplier("kgsin", 1.0))
    ser = ev.born_term(None, 0, req)
    slope = decayfit.loglog_slope(times, ser.magnitudes("a"))
    _report("09a", "KG free term slope -1.5 (as stated)",
            abs(slope + 1.5) <= 0.05, f"slope {slope:.3f}")
    assert abs(slope + 1.5) <= 0.05


def test_criterion_09a_companion_kg_born_bound():
    # the claim the estimate actually makes: |K(t)| <~ t^{-3/2}
    times = np.geomspace(1e3, 1e7, 16)
    req = PropagatorRequest(times=times, pairs=PAIRS2[:1], multiplier=Multiplier("kgsin", 1.0))
    ser = ev.born_term(None, 0, req)
    ratios = ser.magnitudes("a") * times**1.5
    ok = np.all(ratios <= ratios[0] * 1.05)
    assert _report("09a*", "KG free term obeys t^-3/2 bound", bool(ok),
                   f"sup ratio {ratios.max():.2e} at t0, decreasing")


def test_criterion_09_kg_wave(ws_first, z_first):
    # phase-locked times keep the sin(t m) prefactor at its extremum
    ks = np.unique(np.round(np.geomspace(1e4, 1e10, 12) / (2 * np.pi)).astype(np.int64))
    times = 2 * np.pi * ks + np.pi / 2
    req_kg = PropagatorRequest(times=times, pairs=PAIRS2[:1],
                               multiplier=Multiplier("kgsin", 1.0))
    ser_kg = ev.stone_evolve(ws_first, z_first, req_kg)
    comp = ser_kg.magnitudes("a") * np.log(times)
    med = np.median(comp)
    flat_ok = comp.max() <= 1.25 * med and comp.min() >= 0.75 * med

    req_wv = PropagatorRequest(times=times, pairs=PAIRS2[:1],
                               multiplier=Multiplier("wavesin", 0.0))
    ser_wv = ev.stone_evolve(ws_first, z_first, req_wv)
    s_kg = decayfit.loglog_slope(times, ser_kg.magnitudes("a"))
    s_wv = decayfit.loglog_slope(times, ser_wv.magnitudes("a"))
    diff_ok = abs((s_wv - s_kg) - 1.0) <= 0.1
    ok = flat_ok and diff_ok
    assert _report(
        "09", "KG flatness + wave/KG slope gap", ok,
        f"comp band [{comp.min()/med:.3f},{comp.max()/med:.3f}], "
        f"slopes wave {s_wv:.3f} kg {s_kg:.3f}",
    )


def test_criterion_10_lemma_suite():
    recs = oscint.verify_all()
    lemmas_ok = all(r["passed"] for r in recs)
    controls = oscint.negative_controls()
    controls_ok = all(r["passed"] for r in controls)
    dim_ok = (
        kernels.dimension_reduction_check(SpectralPoint(0.3, +1), 1.7) <= 1e-6
        and kernels.dimension_reduction_check(SpectralPoint(0.05, +1), 10.0) <= 1e-6
    )
    spatial = oscint.spatial_integral_check()
    spatial_ok = spatial["rel_gap"] <= 0.05
    ok = lemmas_ok and controls_ok and dim_ok and spatial_ok
    assert _report(
        "10", "oscillatory + spatial lemma suite", ok,
        f"{sum(r['passed'] for r in recs)}/{len(recs)} lemmas, "
        f"MC gap {spatial['rel_gap']:.2%}",
    )


def test_criterion_11_structural_invariants(ws_first, z_first, ws_second2):
    z2 = ws_second2.classify()
    checks = []
    # S1 D0 = D0 S1 = S1
    for z, ws in ((z_first, ws_first), (z2, ws_second2)):
        for ell, d0 in z.d0.items():
            s1 = sum(
                np.outer(kv.vec, kv.vec) for kv in z.s1 if kv.ell == ell
            )
            if np.ndim(s1) == 0:
                continue
            checks.append(np.linalg.norm(s1 @ d0 - s1, 2) < 1e-8)
            checks.append(np.linalg.norm(d0 @ s1 - s1, 2) < 1e-8)
    # P S2 = 0
    for kv in z2.s2:
        ov = 0.0 if kv.ell != 0 else abs(kv.vec @ ws_second2.vtilde)
        checks.append(ov < 1e-8 * np.linalg.norm(ws_second2.vtilde))
    # S1 = -S1 v G0 w
    kv = z_first.s1[0]
    rhs = -(kv.vec @ ws_first._vkv(0, 0)) * ws_first.u_sign
    checks.append(np.linalg.norm(kv.vec - rhs) < 1e-6)
    # rank inequality
    checks.append(z_first.rank_s1 <= z_first.rank_s2 + 1)
    checks.append(z2.rank_s1 <= z2.rank_s2 + 1)
    # conjugacy of the +/- objects
    pt = SpectralPoint(0.05, +1)
    mp = ws_first.assemble_M(pt, 0)
    mm = ws_first.assemble_M(SpectralPoint(0.05, -1), 0)
    checks.append(np.max(np.abs(mm - np.conj(mp))) == 0.0)
    invp = np.linalg.inv(mp)
    invm = np.linalg.inv(mm)
    checks.append(np.max(np.abs(invm - np.conj(invp))) < 1e-10 * np.max(np.abs(invp)))
    g1p = kernels.g_coeff(1, pt)
    checks.append(g1p == np.conj(kernels.g_coeff(1, SpectralPoint(0.05, -1))))
    ok = all(checks)
    assert _report("11", "structural invariants", ok,
                   f"{sum(checks)}/{len(checks)} checks")
