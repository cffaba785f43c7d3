"""Compensated figures for the bundled reference wells (criteria 2-5 data)."""

import hashlib
from pathlib import Path

import pytest

from decayplots import PlotSpec, render

DATA = Path(__file__).parent / "data"

# well id -> the compensation that flattens its decay law
CASES = {
    "regular": "t2",
    "firstkind": "logt",
    "secondkind_l1": "t",
    "secondkind_l2": "t2",
}


@pytest.mark.parametrize("name,comp", sorted(CASES.items()))
def test_reference_well_renders_compensated(tmp_path, name, comp):
    series = DATA / f"{name}_series.csv"
    fit = DATA / f"{name}_fit.json"
    out = tmp_path / f"{name}_{comp}.png"
    res = render(
        PlotSpec(
            series_csv=str(series),
            fit_json=str(fit),
            out_path=str(out),
            compensation=comp,
        )
    )
    assert Path(res).stat().st_size > 5000


def test_reference_renders_byte_stable(tmp_path):
    series = DATA / "regular_series.csv"
    blobs = []
    for tag in ("x", "y"):
        out = tmp_path / f"{tag}.png"
        render(PlotSpec(series_csv=str(series), out_path=str(out), compensation="t2"))
        blobs.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert blobs[0] == blobs[1]
