"""Curve fitting and finite-scale inequality checks.

Every fit reports its window and point count.  Verdicts are one of
``consistent``/``inconsistent``, ``matches``/``does-not-match``,
``admissible``/``excluded`` or ``inconclusive``; weak data is never forced
into a pass or fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .generators import GrowthCurve
from .profiles import ProfileCurve

DEFAULT_DROP = 0.25
EXPONENT_TOLERANCE = 0.15
LOG_POWERS = (0.0, 0.25, 1 / 3, 0.5, 1.0)
MODEL_ORDER = ("log", "power", "power_times_logpow")
TIE = 1e-9


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    rmse: float
    window: tuple[float, float]
    point_count: int
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.point_count < 3:
            raise InputError("a fit needs at least 3 points")


@dataclass(frozen=True)
class LogFit:
    coefficient: float
    intercept: float
    rmse: float
    window: tuple[float, float]
    point_count: int

    def __iter__(self):
        return iter((self.coefficient, self.intercept, self.rmse))


def curve_xy(curve) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(curve, ProfileCurve):
        return np.array(curve.sizes, dtype=float), np.array(curve.values, dtype=float)
    if isinstance(curve, GrowthCurve):
        return np.array(curve.radii, dtype=float), np.array(curve.counts, dtype=float)
    x, y = curve
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def select_window(x, y, window=None, positive=True):
    """Apply the fit window; default drops the smallest quarter of sizes."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    notes = []
    if positive:
        keep = (x > 0) & (y > 0)
        if not keep.all():
            notes.append(f"skipped {int((~keep).sum())} nonpositive points")
        x, y = x[keep], y[keep]
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    if window is None:
        drop = int(math.floor(DEFAULT_DROP * len(x)))
        x, y = x[drop:], y[drop:]
    else:
        lo, hi = window
        keep = (x >= lo) & (x <= hi)
        x, y = x[keep], y[keep]
    if len(x) < 3:
        raise InputError(f"need at least 3 points in the fit window, have {len(x)}")
    return x, y, notes


def _lstsq(X, Y):
    A = np.stack([X, np.ones_like(X)], axis=1)
    (a, b), *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = Y - (a * X + b)
    return float(a), float(b), float(np.sqrt(np.mean(res**2)))


def fit_points(x, y, window=None, min_slope: float | None = None) -> ExponentFit:
    """Least squares of ``log y`` on ``log x``; optionally with slope >= min_slope."""
    x, y, notes = select_window(x, y, window)
    lx, ly = np.log(x), np.log(y)
    a, b, rmse = _lstsq(lx, ly)
    if min_slope is not None and a < min_slope:
        a = float(min_slope)
        b = float(np.mean(ly - a * lx))
        rmse = float(np.sqrt(np.mean((ly - a * lx - b) ** 2)))
        notes.append(f"slope clamped to {min_slope}")
    return ExponentFit(a, b, rmse, (float(x[0]), float(x[-1])), len(x), tuple(notes))


def fit_power(curve, window=None, min_slope: float | None = None) -> ExponentFit:
    x, y = curve_xy(curve)
    return fit_points(x, y, window, min_slope)


def fit_log(curve, window=None) -> LogFit:
    """``value ~ a log v + b`` by ordinary least squares on raw values."""
    x, y = curve_xy(curve)
    x, y, _ = select_window(x, y, window)
    a, b, rmse = _lstsq(np.log(x), y)
    return LogFit(a, b, rmse, (float(x[0]), float(x[-1])), len(x))


def fit_exponential(curve, window=None) -> ExponentFit:
    """``log value ~ a * x + b`` (growth rate ``a`` for exponential growth)."""
    x, y = curve_xy(curve)
    x, y, notes = select_window(x, y, window)
    a, b, rmse = _lstsq(x, np.log(y))
    return ExponentFit(a, b, rmse, (float(x[0]), float(x[-1])), len(x), tuple(notes))


# ---------------------------------------------------------------------------
# model comparison


@dataclass(frozen=True)
class Candidate:
    model: str
    parameters: dict
    rmse: float  # residual RMS of log(value)


@dataclass(frozen=True)
class ModelComparison:
    candidates: tuple[Candidate, ...]
    winner: int

    @property
    def best(self) -> Candidate:
        return self.candidates[self.winner]


def fit_mixed(x, y, log_power: float, window=None):
    """``log y - beta log log x = alpha log x + c`` for fixed ``beta``; x > 1 only."""
    x, y, _ = select_window(x, y, window)
    keep = x > 1
    x, y = x[keep], y[keep]
    if len(x) < 3:
        raise InputError("mixed model needs 3 points with v > 1")
    lx = np.log(x)
    alpha, c, rmse = _lstsq(lx, np.log(y) - log_power * np.log(lx))
    return alpha, c, rmse


def compare_models(curve, window=None, min_power: float | None = None) -> ModelComparison:
    """Fit log, power and power-times-log-power models; compare in log space.

    The mixed model searches its log power over :data:`LOG_POWERS`.  Ties
    within 1e-9 go to the simpler model (log < power < mixed).
    """
    x, y = curve_xy(curve)
    xs, ys, _ = select_window(x, y, window)
    cands = []
    lf = fit_log((xs, ys), window=(xs[0], xs[-1]))
    pred = lf.coefficient * np.log(xs) + lf.intercept
    rmse = float(np.sqrt(np.mean((np.log(ys) - np.log(pred)) ** 2))) if np.all(pred > 0) else math.inf
    cands.append(Candidate("log", {"a": lf.coefficient, "b": lf.intercept}, rmse))
    pf = fit_points(xs, ys, window=(xs[0], xs[-1]), min_slope=min_power)
    cands.append(Candidate("power", {"alpha": pf.slope, "c": pf.intercept}, pf.rmse))
    best = None
    for beta in LOG_POWERS:
        try:
            alpha, c, r = fit_mixed(xs, ys, beta, window=(xs[0], xs[-1]))
        except InputError:
            continue
        if min_power is not None and alpha < min_power:
            continue
        if best is None or r < best[2] - TIE:
            best = (alpha, c, r, beta)
    if best is not None:
        cands.append(Candidate("power_times_logpow", {"alpha": best[0], "c": best[1], "beta": best[3]}, best[2]))
    low = min(c.rmse for c in cands)
    winner = next(i for i, c in enumerate(cands) if c.rmse <= low + TIE)
    return ModelComparison(tuple(cands), winner)


# ---------------------------------------------------------------------------
# growth


@dataclass(frozen=True)
class GrowthClass:
    kind: str  # polynomial / exponential / inconclusive
    degree: float | None
    polynomial_fit: ExponentFit | None
    exponential_fit: ExponentFit | None


def classify_growth(growth: GrowthCurve, window=None) -> GrowthClass:
    """Polynomial when ``log beta`` is better linear in ``log r`` than in ``r``."""
    x, y = curve_xy(growth)
    keep = x >= 1
    x, y = x[keep], y[keep]
    try:
        poly = fit_points(x, y, window)
        expo = fit_exponential((x, y), window)
    except InputError:
        return GrowthClass("inconclusive", None, None, None)
    kind = "polynomial" if poly.rmse <= expo.rmse else "exponential"
    return GrowthClass(kind, poly.slope, poly, expo)


# ---------------------------------------------------------------------------
# checks


def _fmt(x):
    if x is None:
        return "nan"
    return f"{x:.6f}"


@dataclass
class CheckReport:
    name: str
    statement: str
    verdict: str
    values: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"[{self.name}]", f"statement = {self.statement}"]
        for k, v in self.values.items():
            lines.append(f"{k} = {_fmt(v) if isinstance(v, float) else v}")
        lines.append(f"verdict = {self.verdict}")
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def csc_check(growth: GrowthCurve, j: ProfileCurve, slack: float = EXPONENT_TOLERANCE, rmse_threshold: float = 0.1, window=None) -> CheckReport:
    """Is the fitted exponent of ``j`` at most ``1 / D`` (+ slack) for growth degree ``D``?"""
    rep = CheckReport("csc", "growth >= r^D implies j(v) <= C v^(1/D)", "inconclusive")
    rep.values["slack"] = slack
    x, y = curve_xy(growth)
    keep = x >= 1
    try:
        gfit = fit_points(x[keep], y[keep], window)
    except InputError as exc:
        rep.notes.append(f"growth fit failed: {exc}")
        return rep
    rep.values["growth_degree"] = gfit.slope
    rep.values["growth_rmse"] = gfit.rmse
    if gfit.rmse > rmse_threshold:
        rep.notes.append(f"growth fit rmse {gfit.rmse:.3g} above {rmse_threshold}")
        return rep
    if gfit.slope <= 0:
        rep.notes.append("nonpositive growth degree")
        return rep
    try:
        jfit = fit_power(j)
    except InputError as exc:
        rep.notes.append(f"profile fit failed: {exc}")
        return rep
    bound = 1.0 / gfit.slope
    rep.values["j_exponent"] = jfit.slope
    rep.values["j_exponent_bound"] = bound + slack
    rep.verdict = "consistent" if jfit.slope <= bound + slack else "inconsistent"
    return rep


def product_sep_target(n: int, d: int) -> str:
    if n >= 3:
        return f"v^{1 - 1 / (d + n - 1):.6f}"
    if d == 0:
        return "log v"
    return f"v^{1 - 1 / d:.6f} (log v)^{1 / (d + 1):.6f}"


def product_sep_exponent_check(n: int, d: int, sep_curve: ProfileCurve, tolerance: float = EXPONENT_TOLERANCE, window=None) -> CheckReport:
    """Compare a separation curve of an H^n x P model with its predicted growth.

    n >= 3: fitted power against ``1 - 1/(d+n-1)``.  n = 2, d = 0: the target
    is logarithmic, read as power exponent 0.  n = 2, d >= 1: power exponent of
    the mixed model with the log power held at ``1/(d+1)``, against ``1 - 1/d``.
    """
    if n < 2 or d < 0:
        raise InputError("need n >= 2 and d >= 0")
    rep = CheckReport("product_sep", f"sep(v) ~ {product_sep_target(n, d)} for H^{n} x R^{d}", "inconclusive")
    rep.values["tolerance"] = tolerance
    sizes = [p.size for p in sep_curve.points if p.value > 0]
    if len(sizes) < 3 or sizes[-1] / sizes[0] < 16:
        rep.notes.append("size range max/min below 16")
        return rep
    try:
        cmp = compare_models(sep_curve, window)
        rep.values["model_winner"] = cmp.best.model
        for c in cmp.candidates:
            rep.values[f"rmse_{c.model}"] = c.rmse
        if n >= 3 or d == 0:
            target = 1 - 1 / (d + n - 1) if n >= 3 else 0.0
            fit = fit_power(sep_curve, window)
            estimate = fit.slope
        else:
            target = 1 - 1 / d
            estimate, _, _ = fit_mixed(*curve_xy(sep_curve), 1 / (d + 1), window)
    except InputError as exc:
        rep.notes.append(str(exc))
        return rep
    rep.values["target_exponent"] = target
    rep.values["fitted_exponent"] = float(estimate)
    rep.values["deviation"] = float(estimate - target)
    rep.verdict = "matches" if abs(estimate - target) <= tolerance else "does-not-match"
    return rep
