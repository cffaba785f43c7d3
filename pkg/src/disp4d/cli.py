"""Command-line front end: classify -> tune -> evolve -> fit -> verify -> report.

Runs are driven by a flat INI config (sections below); every command
writes its resolved configuration next to its outputs so a run can be
reproduced byte-for-byte from the artifacts alone.

    [potential]  family = square_well | gaussian | two_well | sampled
                 c / c1, c2 / width / table, radius / r1, r2, decay_class
    [grid]       n, order, grading, rmax (or "auto")
    [model]      channels, lambda1
    [evolve]     multiplier, mass, tmin, tmax, tpoints, pairs (rx:ry:cos
                 separated by ';'), lam_min, cheb_order, phase_locked
    [fit]        basis = auto | comma list, weight = none | log
    [tune]       channel, bracket = lo, hi
    [verify]     lemmas = all | comma list
    [run]        seed, jobs

Outputs: classification JSON, coupling tables, TimeSeries CSV (columns
t, pair_id, re, im, abs, err_est, multiplier, classification), fit JSON,
lemma tables (JSON + CSV) and a markdown report binding the verdict to
the expected and measured rates.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import traceback
import warnings
from pathlib import Path

import numpy as np

from . import decayfit, evolution, oscint, potentials, spectral
from .evolution import Multiplier, Pair, PropagatorRequest

__all__ = ["main", "RunConfig"]

_POTENTIAL_KEYS = {
    "square_well": ("c", "radius"),
    "gaussian": ("c", "width"),
    "two_well": ("c1", "c2", "r1", "r2"),
    "sampled": ("table", "decay_class"),
}

DEFAULTS = {
    "grid": {"n": "240", "order": "12", "grading": "graded-at-0", "rmax": "auto"},
    "model": {"channels": "3", "lambda1": "0.25"},
    "evolve": {
        "multiplier": "schrod",
        "mass": "0.0",
        "tmin": "1e3",
        "tmax": "1e7",
        "tpoints": "24",
        "pairs": "2.0:3.0:0.3;1.5:2.5:-0.2",
        "lam_min": "1e-7",
        "cheb_order": "24",
        "phase_locked": "auto",
    },
    "fit": {"basis": "auto", "weight": "none"},
    "tune": {"channel": "0", "bracket": "4.0, 8.0"},
    "verify": {"lemmas": "all"},
    "run": {"seed": "1234", "jobs": "1"},
}


class RunConfig:
    """Parsed + defaulted configuration with round-trip emission."""

    def __init__(self, parser: configparser.ConfigParser):
        self.cp = configparser.ConfigParser()
        for sec, opts in DEFAULTS.items():
            self.cp[sec] = dict(opts)
        for sec in parser.sections():
            if not self.cp.has_section(sec):
                self.cp[sec] = {}
            for key, val in parser[sec].items():
                self.cp[sec][key] = val
        if not self.cp.has_section("potential"):
            raise ValueError("config needs a [potential] section")

    @staticmethod
    def load(path) -> "RunConfig":
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise FileNotFoundError(path)
        return RunConfig(cp)

    def write_resolved(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            self.cp.write(fh)

    # -- typed accessors -------------------------------------------------

    def potential(self) -> potentials.PotentialSpec:
        sec = self.cp["potential"]
        fam = sec.get("family")
        if fam == "square_well":
            return potentials.square_well(
                sec.getfloat("c"), sec.getfloat("radius", 1.0)
            )
        if fam == "gaussian":
            return potentials.gaussian(sec.getfloat("c"), sec.getfloat("width", 1.0))
        if fam == "two_well":
            return potentials.two_well(
                sec.getfloat("c1"),
                sec.getfloat("c2"),
                (sec.getfloat("r1", 1.0), sec.getfloat("r2", 2.2)),
            )
        if fam == "sampled":
            return potentials.sampled(
                sec.get("table"), decay_class=sec.getfloat("decay_class", np.inf)
            )
        raise ValueError(f"unknown potential family {fam!r}")

    def workspace(self) -> spectral.Workspace:
        g, m = self.cp["grid"], self.cp["model"]
        rmax = None if g.get("rmax", "auto") == "auto" else g.getfloat("rmax")
        return spectral.Workspace(
            self.potential(),
            channels=m.getint("channels"),
            n=g.getint("n"),
            order=g.getint("order"),
            rmax=rmax,
            lambda1=m.getfloat("lambda1"),
            grading=g.get("grading"),
        )

    def pairs(self):
        out = []
        for i, tok in enumerate(self.cp["evolve"].get("pairs").split(";")):
            rx, ry, cosg = (float(x) for x in tok.strip().split(":"))
            out.append(Pair(f"p{i}", rx, ry, cosg))
        return out

    def times(self, mult: Multiplier):
        e = self.cp["evolve"]
        t = np.geomspace(e.getfloat("tmin"), e.getfloat("tmax"), e.getint("tpoints"))
        locked = e.get("phase_locked", "auto")
        if mult.kind.startswith("kg") and locked in ("auto", "yes", "true", "1"):
            phase = np.pi / 2 if mult.kind == "kgsin" else 0.0
            t = oscint.phase_locked_times(mult.mass, phase, t)
        return t

    def multiplier(self, override_kind=None, override_mass=None) -> Multiplier:
        e = self.cp["evolve"]
        kind = override_kind or e.get("multiplier")
        mass = e.getfloat("mass") if override_mass is None else override_mass
        if kind.startswith("wave"):
            mass = 0.0
        return Multiplier(kind, mass)

    def request(self, mult: Multiplier) -> PropagatorRequest:
        e, m = self.cp["evolve"], self.cp["model"]
        return PropagatorRequest(
            times=self.times(mult),
            pairs=self.pairs(),
            multiplier=mult,
            lambda1=m.getfloat("lambda1"),
            channels=m.getint("channels"),
            lam_min=e.getfloat("lam_min"),
            order=e.getint("cheb_order"),
        )


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_classify(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    ws = cfg.workspace()
    z = ws.classify()
    report = z.report_dict()
    rep = ws.expansion_report("Mexp", lams=np.geomspace(1e-3, 1e-1, 10))
    report["residual_exponents"] = {
        r["name"]: r["slope"] for r in rep["records"]
    }
    _dump(report, out / "classification.json")
    cfg.write_resolved(out / "resolved.ini")
    print(f"classification: {z.classification} "
          f"(rank S1 = {z.rank_s1}, rank S2 = {z.rank_s2})")
    return 0


def cmd_tune(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    sec = cfg.cp["tune"]
    ell = args.channel if args.channel is not None else sec.getint("channel")
    lo, hi = (float(x) for x in sec.get("bracket").split(","))
    fam = cfg.cp["potential"].get("family")
    if fam == "two_well":
        c1, c2 = potentials.tune_two_well()
        table = {"family": fam, "c1": c1, "c2": c2}
        print(f"two-well thresholds: c1* = {c1:.9f}, c2* = {c2:.9f}")
    else:
        radius = cfg.cp["potential"].getfloat("radius", 1.0)
        if fam == "square_well":
            factory = lambda c: potentials.square_well(c, radius)
        elif fam == "gaussian":
            width = cfg.cp["potential"].getfloat("width", 1.0)
            factory = lambda c: potentials.gaussian(c, width)
        else:
            raise ValueError(f"tuning not supported for family {fam!r}")
        res = potentials.tune_threshold(ell, factory, (lo, hi), certify=True)
        table = {
            "family": fam,
            "channel": ell,
            "coupling": res.coupling,
            "defect": res.defect,
            "sigma_ratio": res.sigma_ratio,
        }
        print(f"channel {ell} threshold: c* = {res.coupling:.9f} "
              f"(sigma ratio {res.sigma_ratio:.2e})")
    _dump(table, out / "tune.json")
    cfg.write_resolved(out / "resolved.ini")
    return 0


def cmd_evolve(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    mult = cfg.multiplier(args.multiplier, args.mass)
    ws = cfg.workspace()
    z = ws.classify()
    req = cfg.request(mult)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        series = evolution.stone_evolve(ws, z, req)
    series.to_csv(out / "series.csv")
    _dump(z.report_dict(), out / "classification.json")
    cfg.write_resolved(out / "resolved.ini")
    print(f"evolved {mult.kind} on {z.classification}: "
          f"{series.times.size} times x {len(series.pair_ids)} pairs "
          f"-> {out / 'series.csv'}")
    return 0


def cmd_fit(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    src = Path(args.series) if args.series else out / "series.csv"
    series = evolution.TimeSeries.from_csv(src)
    basis = cfg.cp["fit"].get("basis")
    # the moment data (needed to pick the eigenvalue-cancellation menu)
    # travels in the classification artifact next to the series
    m0, m1 = 1.0, 1.0
    cls_path = out / "classification.json"
    if cls_path.exists():
        cls = json.loads(cls_path.read_text())
        if cls.get("moments"):
            m0 = cls["moments"][0]["m0"]
            m1 = cls["moments"][0]["m1"]
    results = {}
    for pid in series.pair_ids:
        if basis == "auto":
            model = decayfit.expected_models(
                series.classification
                if series.classification in ("Regular", "FirstKind", "SecondKind", "ThirdKind")
                else "Regular",
                series.multiplier,
                m0=m0, m1=m1,
            )
        else:
            model = decayfit.RateModel(tuple(b.strip() for b in basis.split(",")))
        res = decayfit.fit_magnitudes(series.times, series.magnitudes(pid), model)
        results[pid] = res.to_dict()
    _dump(
        {"classification": series.classification, "multiplier": series.multiplier,
         "fits": results},
        out / "fit.json",
    )
    cfg.write_resolved(out / "resolved.ini")
    doms = {pid: r["dominant"] for pid, r in results.items()}
    print(f"fitted {len(results)} pairs; dominant terms: {doms}")
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    want = args.lemma or cfg.cp["verify"].get("lemmas")
    ids = list(oscint.REGISTRY) if want in ("all", None) else [
        w.strip() for w in want.split(",")
    ]
    records = [oscint.verify(i) for i in ids]
    controls = oscint.negative_controls()
    seed = cfg.cp["run"].getint("seed")
    spatial = oscint.spatial_integral_check(seed=seed)
    table = {"lemmas": records, "negative_controls": controls, "spatial": spatial}
    _dump(table, out / "lemmas.json")
    with open(out / "lemmas.csv", "w", encoding="utf-8") as fh:
        fh.write("lemma,sup_ratio,top_drift,passed\n")
        for r in records:
            fh.write(f"{r['lemma']},{r['sup_ratio']!r},{r['top_drift']!r},{r['passed']}\n")
    cfg.write_resolved(out / "resolved.ini")
    npass = sum(r["passed"] for r in records)
    print(f"lemma suite: {npass}/{len(records)} passed; "
          f"spatial MC gap {spatial['rel_gap']:.2%}")
    return 0 if npass == len(records) else 3


def cmd_report(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    lines = ["# Threshold and decay report", ""]
    cls_path = out / "classification.json"
    if cls_path.exists():
        cls = json.loads(cls_path.read_text())
        lines += [
            f"* classification: **{cls['classification']}** "
            f"(rank S1 = {cls['rank_s1']}, rank S2 = {cls['rank_s2']})",
            f"* resonance coefficient: {cls.get('resonance_coefficient')}",
            f"* moments: {cls.get('moments')}",
            "",
        ]
        expected = decayfit.expected_models(
            cls["classification"], m0=0.0,
            m1=(abs(cls["moments"][0]["m1"]) if cls.get("moments") else 1.0),
        )
        lines += [f"* expected rate menu: {', '.join(expected.basis)}", ""]
    fit_path = out / "fit.json"
    if fit_path.exists():
        fits = json.loads(fit_path.read_text())
        lines += ["| pair | dominant | slope | residual |", "| --- | --- | --- | --- |"]
        for pid, rec in fits["fits"].items():
            lines.append(
                f"| {pid} | {rec['dominant']} | {rec['slope']:.3f} "
                f"| {rec['residual']:.2e} |"
            )
        lines.append("")
    lem_path = out / "lemmas.json"
    if lem_path.exists():
        lem = json.loads(lem_path.read_text())
        npass = sum(r["passed"] for r in lem["lemmas"])
        lines.append(f"* lemma suite: {npass}/{len(lem['lemmas'])} passed")
    (out / "report.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"report -> {out / 'report.md'}")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "tune": cmd_tune,
    "evolve": cmd_evolve,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="disp4d",
        description="Zero-energy thresholds and dispersive decay on R^4",
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI config path")
    ap.add_argument("--out", default="runs/latest", help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="worker cap")
    ap.add_argument("--channel", type=int, default=None, help="channel for tune")
    ap.add_argument("--lemma", default=None, help="lemma id(s) for verify")
    ap.add_argument(
        "--multiplier", default=None,
        choices=list(evolution.MULTIPLIER_KINDS), help="override multiplier",
    )
    ap.add_argument("--mass", type=float, default=None, help="override mass")
    ap.add_argument("--series", default=None, help="input CSV for fit")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        np.random.seed(cfg.cp["run"].getint("seed") % 2**32)
        return COMMANDS[args.command](cfg, args)
    except Exception as exc:  # structured failure for scripting
        err = {
            "error": type(exc).__name__,
            "message": str(exc),
            "command": args.command,
        }
        print(json.dumps(err), file=sys.stderr)
        if args and getattr(args, "out", None):
            try:
                _outdir(args)
                _dump({**err, "traceback": traceback.format_exc()},
                      Path(args.out) / "error.json")
            except OSError:
                pass
        return 1


if __name__ == "__main__":
    sys.exit(main())
