"""Deterministic compensated-decay figures from series CSV and fit JSON."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["COMPENSATIONS", "PlotSpec", "SchemaError", "render"]

REQUIRED_COLUMNS = ("t", "pair_id", "abs", "multiplier", "classification")

# id -> (label, multiplier applied to |K(t)|)
COMPENSATIONS = {
    "none": ("|K(t)|", lambda t: np.ones_like(t)),
    "t2": ("|K(t)| t^2", lambda t: t**2),
    "tlogt": ("|K(t)| t log t", lambda t: t * np.log(t)),
    "logt": ("|K(t)| log t", lambda t: np.log(t)),
    "t": ("|K(t)| t", lambda t: t),
}

# fit-basis name -> callable, matching the numerical suite's menu
_BASIS = {
    "1": lambda t: np.ones_like(t),
    "1/log": lambda t: 1.0 / np.log(t),
    "1/t": lambda t: 1.0 / t,
    "1/(t log)": lambda t: 1.0 / (t * np.log(t)),
    "1/(t log2)": lambda t: 1.0 / (t * np.log(t) ** 2),
    "t^-3/2": lambda t: t**-1.5,
    "t^-2": lambda t: t**-2.0,
}


class SchemaError(ValueError):
    """Input artifact does not match the documented CSV/JSON contract."""


@dataclass(frozen=True)
class PlotSpec:
    series_csv: str
    out_path: str
    compensation: str = "none"
    fit_json: str | None = None
    logx: bool = True
    logy: bool = False
    pair_ids: tuple = ()

    def __post_init__(self):
        if self.compensation not in COMPENSATIONS:
            raise SchemaError(
                f"unknown compensation {self.compensation!r}; "
                f"choose from {sorted(COMPENSATIONS)}"
            )


def _load_series(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty CSV")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    pairs = list(dict.fromkeys(r["pair_id"] for r in rows))
    out = {}
    for pid in pairs:
        sel = [r for r in rows if r["pair_id"] == pid]
        t = np.array([float(r["t"]) for r in sel])
        mag = np.array([float(r["abs"]) for r in sel])
        order = np.argsort(t)
        out[pid] = (t[order], mag[order])
    meta = {
        "multiplier": rows[0]["multiplier"],
        "classification": rows[0]["classification"],
    }
    return out, meta


def _load_fit(path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "fits" not in data:
        raise SchemaError(f"{path}: missing 'fits' object")
    return data["fits"]


def _fit_curve(fit_record, t):
    total = np.zeros_like(t)
    for name, coef in fit_record.get("coefficients", {}).items():
        if name not in _BASIS:
            raise SchemaError(f"fit JSON references unknown basis {name!r}")
        total = total + coef * _BASIS[name](t)
    return total


def render(spec: PlotSpec) -> str:
    """Render the compensated series (and fit overlay) to a PNG.

    Deterministic: fixed canvas, fixed dpi, no timestamps or version
    strings in the PNG metadata.
    """
    series, meta = _load_series(spec.series_csv)
    fits = _load_fit(spec.fit_json) if spec.fit_json else {}
    label, comp = COMPENSATIONS[spec.compensation]

    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=120)
    wanted = spec.pair_ids or tuple(series)
    for pid in wanted:
        if pid not in series:
            raise SchemaError(f"pair {pid!r} not present in {spec.series_csv}")
        t, mag = series[pid]
        ax.plot(t, mag * comp(t), marker="o", markersize=3.0, linewidth=1.0,
                label=f"{pid}")
        if pid in fits:
            tt = np.geomspace(t.min(), t.max(), 200)
            ax.plot(tt, _fit_curve(fits[pid], tt) * comp(tt), linewidth=1.0,
                    linestyle="--", label=f"{pid} fit")
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(label)
    ax.set_title(f"{meta['multiplier']} on {meta['classification']}")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="png", metadata={"Software": ""})
    plt.close(fig)
    return str(out)
