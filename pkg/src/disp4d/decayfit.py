"""Rate fitting for propagator time series.

The admissible decay shapes form a small menu (constant, 1/log t, 1/t,
1/(t log t), 1/(t log^2 t), t^{-3/2}, t^{-2}); a fit is an ordinary
least-squares projection of |K(t)| onto a chosen subset, with the design
condition number reported because neighbouring menu entries only separate
over wide time ranges (log t must vary by a decent factor).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BASIS",
    "CollinearBasisError",
    "RateModel",
    "FitResult",
    "fit",
    "fit_magnitudes",
    "expected_models",
    "log_weight",
    "loglog_slope",
    "rank_one_factor",
]

BASIS = {
    "1": lambda t: np.ones_like(t),
    "1/log": lambda t: 1.0 / np.log(t),
    "1/t": lambda t: 1.0 / t,
    "1/(t log)": lambda t: 1.0 / (t * np.log(t)),
    "1/(t log2)": lambda t: 1.0 / (t * np.log(t) ** 2),
    "t^-3/2": lambda t: t**-1.5,
    "t^-2": lambda t: t**-2.0,
}


class CollinearBasisError(RuntimeError):
    """Design matrix too ill-conditioned; widen the time range."""


@dataclass(frozen=True)
class RateModel:
    basis: tuple
    weight: str | None = None  # None, "log" (1+log^+|x|) or "sqrt" (<x>^1/2)

    def __post_init__(self):
        if not self.basis:
            raise ValueError("basis must be nonempty")
        for name in self.basis:
            if name not in BASIS:
                raise ValueError(f"unknown basis element {name!r}")


@dataclass
class FitResult:
    coefficients: dict
    residual: float  # relative to the series sup
    dominant: str
    slope: float
    condition: float

    def to_dict(self):
        return {
            "coefficients": {k: float(v) for k, v in self.coefficients.items()},
            "residual": self.residual,
            "dominant": self.dominant,
            "slope": self.slope,
            "condition": self.condition,
        }


def log_weight(r):
    """w(x) = 1 + log^+ |x|."""
    r = np.asarray(r, dtype=float)
    return 1.0 + np.where(r > 1, np.log(np.maximum(r, 1.0)), 0.0)


def loglog_slope(times, mags):
    return float(np.polyfit(np.log(times), np.log(mags), 1)[0])


def fit_magnitudes(times, mags, model: RateModel) -> FitResult:
    times = np.asarray(times, dtype=float)
    mags = np.asarray(mags, dtype=float)
    if times.size < 12:
        raise ValueError("need at least 12 time samples")
    if np.log10(times.max() / times.min()) < 3:
        raise ValueError("time samples must span at least three decades")
    cols = [BASIS[name](times) for name in model.basis]
    design = np.stack(cols, axis=1)
    norms = np.linalg.norm(design, axis=0)
    cond = float(np.linalg.cond(design / norms))
    if cond > 1e10:
        raise CollinearBasisError(
            f"design condition {cond:.2e} > 1e10; widen the time range"
        )
    # weight rows by 1/|K|: the series spans many decades and the noise is
    # relative, so unweighted least squares would let the early times leak
    # into every coefficient
    w = 1.0 / np.maximum(np.abs(mags), 1e-300)
    coef, *_ = np.linalg.lstsq(design * w[:, None], mags * w, rcond=None)
    resid = np.linalg.norm(design @ coef - mags) / max(np.max(np.abs(mags)), 1e-300)
    tmid = float(np.sqrt(times.min() * times.max()))
    contrib = {
        name: abs(c * BASIS[name](np.array([tmid]))[0])
        for name, c in zip(model.basis, coef)
    }
    dominant = max(contrib, key=contrib.get)
    return FitResult(
        coefficients=dict(zip(model.basis, coef)),
        residual=float(resid),
        dominant=dominant,
        slope=loglog_slope(times, np.maximum(mags, 1e-300)),
        condition=cond,
    )


def fit(series, model: RateModel, pair=None, pair_radii=None) -> FitResult:
    """Fit one pair's |K(t)| onto the model basis.

    With a weighted model the series is divided by w(rx) w(ry) first,
    which is how the logarithmically weighted mapping bounds show up at
    the pointwise-kernel level.
    """
    mags = series.magnitudes(pair)
    if model.weight is not None:
        if pair_radii is None:
            raise ValueError("weighted fits need the pair radii")
        rx, ry = pair_radii
        w = log_weight if model.weight == "log" else lambda r: np.sqrt(
            1.0 + np.asarray(r) ** 2
        ) ** 0.5
        mags = mags / (w(np.array([rx]))[0] * w(np.array([ry]))[0])
    return fit_magnitudes(series.times, mags, model)


def expected_models(classification: str, multiplier_kind: str = "schrod",
                    m0: float = None, m1: float = None) -> RateModel:
    """Rate menu predicted for a classification (and moment data)."""
    if classification == "Regular":
        basis = ("t^-2",)
    elif classification in ("FirstKind", "ThirdKind"):
        basis = ("1/log", "1/t", "1/(t log)", "1/(t log2)")
    elif classification == "SecondKind":
        if m0 is not None and m1 is not None and abs(m0) < 1e-8 and abs(m1) < 1e-8:
            basis = ("t^-2",)
        else:
            basis = ("1/t",)
    else:
        raise ValueError(f"unknown classification {classification!r}")
    if multiplier_kind.startswith("kg"):
        basis = tuple(dict.fromkeys(basis + ("t^-3/2",)))
    return RateModel(basis=basis)


def rank_one_factor(coef_matrix):
    """Rank-one diagnostics of a coefficient matrix over an x-y pair grid.

    Returns (u, s2_over_s1): the leading factor (normalized, sign fixed)
    and the ratio of the second to the first singular value.
    """
    c = np.asarray(coef_matrix, dtype=float)
    u, s, vh = np.linalg.svd(c)
    lead = u[:, 0] * np.sqrt(s[0])
    if lead[np.argmax(np.abs(lead))] < 0:
        lead = -lead
    ratio = float(s[1] / s[0]) if s.size > 1 else 0.0
    return lead, ratio
