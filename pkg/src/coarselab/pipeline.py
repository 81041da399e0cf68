"""End-to-end check of a candidate group against a target ``H^n x R^d``.

A group that coarsely embeds into ``H^n x R^d`` must be virtually nilpotent
with growth degree at most ``n + d - 1``.  The pipeline measures growth,
isoperimetric and separation curves and reports which finite-scale
inequalities of that argument the data exhibits.  It is evidence at finite
scale, not a proof.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .analysis import EXPONENT_TOLERANCE, CheckReport, GrowthClass, classify_growth, csc_check, product_sep_exponent_check
from .errors import InputError, ResourceError
from .generators import GrowthCurve, SpaceSpec, cayley_ball, dyadic_hyperbolic_ball, growth_function
from .graph import DEFAULT_MAX_VERTICES, cartesian_product
from .isoperimetry import family_isoperimetric_lowerbound
from .profiles import ProfileCurve
from .separation import InequalityReport, lcg_inequality_report, separation_profile

VERDICTS = ("admissible", "excluded", "inconclusive")
MODEL_BOX_VOLUME = 20_000


@dataclass(frozen=True)
class PipelineConfig:
    group: SpaceSpec
    n: int
    d: int
    growth_radius: int = 24
    profile_radius: int = 8
    tolerance: float = EXPONENT_TOLERANCE
    max_vertices: int = DEFAULT_MAX_VERTICES

    def __post_init__(self):
        if not self.group.is_group:
            raise InputError(f"pipeline candidate must be a group, got {self.group.kind}")
        if self.n < 2 or self.d < 0:
            raise InputError("target needs n >= 2 and d >= 0")
        if self.growth_radius < 4 or self.profile_radius < 2:
            raise InputError("growth_radius must be >= 4 and profile_radius >= 2")

    @property
    def degree_bound(self) -> int:
        return self.n + self.d - 1


@dataclass
class PipelineResult:
    config: PipelineConfig
    verdict: str
    growth_class: GrowthClass
    checks: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    reason: str = ""

    def to_text(self) -> str:
        c = self.config
        g = self.growth_class
        deg = "nan" if g.degree is None else f"{g.degree:.6f}"
        lines = [
            "# finite-scale evidence, not proof",
            f"candidate = {c.group.describe()}",
            f"target = H^{c.n} x R^{c.d}",
            f"growth class = {g.kind}",
            f"growth degree d′ vs n+d−1 = {deg} vs {c.degree_bound}",
            f"tolerance = {c.tolerance}",
            f"verdict = {self.verdict}",
            f"reason = {self.reason}",
            "",
        ]
        return "\n".join(lines) + "\n".join(ch.to_text() for ch in self.checks)

    def fit_rows(self) -> list[tuple[str, str, str]]:
        """``(check, key, value)`` rows for the machine-readable fits table."""
        rows = [("pipeline", "verdict", self.verdict), ("pipeline", "growth_class", self.growth_class.kind)]
        if self.growth_class.degree is not None:
            rows.append(("pipeline", "growth_degree", f"{self.growth_class.degree:.6f}"))
        rows.append(("pipeline", "degree_bound", str(self.config.degree_bound)))
        for ch in self.checks:
            if isinstance(ch, InequalityReport):
                rows.append(("lcg_inequality", "verdict", ch.verdict))
                rows.append(("lcg_inequality", "log_K_slope", "nan" if ch.slope is None else f"{ch.slope:.6f}"))
                continue
            rows.append((ch.name, "verdict", ch.verdict))
            for k, v in ch.values.items():
                rows.append((ch.name, k, f"{v:.6f}" if isinstance(v, float) else str(v)))
        return rows


@contextmanager
def _stage(name: str):
    try:
        yield
    except ResourceError as exc:
        raise ResourceError(f"stage {name}: {exc}", budget=exc.budget, stage=name) from None


def growth_verdict(growth_class: GrowthClass, n: int, d: int, tolerance: float = EXPONENT_TOLERANCE) -> tuple[str, str]:
    """Verdict from growth alone; the other curves are supporting evidence."""
    bound = n + d - 1
    if growth_class.kind == "exponential":
        return "excluded", "growth is not polynomial, so no degree bound can hold"
    if growth_class.kind != "polynomial" or growth_class.degree is None:
        return "inconclusive", "growth could not be classified"
    D = growth_class.degree
    if D <= bound + tolerance:
        return "admissible", f"growth degree {D:.3f} within {bound} + {tolerance}"
    return "excluded", f"growth degree {D:.3f} exceeds {bound} + {tolerance}"


def pipeline_verdict(
    config: PipelineConfig,
    growth: GrowthCurve,
    j: ProfileCurve,
    sep: ProfileCurve,
    model_sep: ProfileCurve | None,
) -> PipelineResult:
    """Pure function of the curves: refitting saved curves gives the same result."""
    gclass = classify_growth(growth)
    verdict, reason = growth_verdict(gclass, config.n, config.d, config.tolerance)
    checks: list = [lcg_inequality_report(j, sep), csc_check(growth, j)]
    if model_sep is not None:
        checks.append(product_sep_exponent_check(config.n, config.d, model_sep, config.tolerance))
    else:
        checks.append(CheckReport("product_sep", "target model curve", "inconclusive", notes=["no model curve"]))
    curves = {"growth": growth, "iso": j, "sep": sep}
    if model_sep is not None:
        curves["model_sep"] = model_sep
    return PipelineResult(config, verdict, gclass, checks, curves, reason)


def model_separation_curve(n: int, d: int, max_volume: int = MODEL_BOX_VOLUME, max_vertices: int = DEFAULT_MAX_VERTICES) -> ProfileCurve | None:
    """Separation of horosphere boxes times fibre cubes in ``H^n x Z^d``.

    Boxes of side ``s`` sit on the bottom level of the dyadic model with an
    ``s``-cube in the fibre, for ``s`` growing in half-octave steps from 2
    up to the largest power of two whose box volume stays within
    ``max_volume``.
    """
    dims = n - 1 + d
    top = 2
    while (2 * top) ** dims <= max_volume:
        top *= 2
    if top ** dims > max_volume:
        return None
    levels = int(math.log2(top)) + 1
    H = dyadic_hyperbolic_ball(n, levels, 1, max_vertices=max_vertices)
    G, lo_f = H, []
    if d:
        P = cayley_ball(SpaceSpec("ZPower", d=d), top // 2, max_vertices)
        G = cartesian_product(H, P, max_vertices)
        lo_f = [-(top // 2)] * d
    sides = sorted({round(2 ** (k / 2)) for k in range(2, 2 * int(math.log2(top)) + 1)})
    boxes = []
    for s in sides:
        lo = [0] * (n - 1) + [0] + lo_f
        hi = [s - 1] * (n - 1) + [0] + [x + s - 1 for x in lo_f]
        boxes.append((np.array(lo), np.array(hi)))
    return separation_profile(G, strategy="family_boxes", boxes=boxes)


def theorem_pipeline(config: PipelineConfig) -> PipelineResult:
    """Measure all curves for ``config`` and assemble the verdict."""
    with _stage("growth"):
        growth = growth_function(config.group, config.growth_radius, config.max_vertices)
    with _stage("ball"):
        G = cayley_ball(config.group, config.profile_radius, config.max_vertices)
    with _stage("isoperimetry"):
        j = family_isoperimetric_lowerbound(G, "balls", root=0)
    with _stage("separation"):
        sep = separation_profile(G, strategy="family_balls", root=0)
    with _stage("model"):
        model_sep = model_separation_curve(config.n, config.d, max_vertices=config.max_vertices)
    return pipeline_verdict(config, growth, j, sep, model_sep)
