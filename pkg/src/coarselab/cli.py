"""Command-line front end.

Each experiment writes a fresh run directory under the output root (``--out``,
else ``$COARSELAB_OUT``, else ``./runs``) holding CSV curves, text reports,
SVG plots, the canonical config and ``manifest.json``.  Existing run
directories are never touched; a repeated run gets a numbered sibling.

Exit status: 0 ok, 2 bad input or config, 3 budget exceeded, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .analysis import classify_growth, fit_power
from .config import KINDS, ExperimentConfig, config_text, load_config, parse_config_text
from .errors import CoarseLabError, InputError, ResourceError
from .generators import SpaceSpec, build, dyadic_index, growth_function, read_growth_csv, write_growth_csv
from .graph import BoundedDegreeGraph, write_graph
from .isoperimetry import exact_isoperimetric_profile, family_isoperimetric_lowerbound
from .pipeline import PipelineConfig, theorem_pipeline
from .plotting import loglog_figure
from .profiles import read_curve_csv, write_curve_csv
from .regmap import horospherical_embedding, read_map, read_report_csv, verify_regular, write_map, write_report_csv
from .separation import separation_profile

OUT_ENV = "COARSELAB_OUT"
MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# helpers


def resolve_root(G: BoundedDegreeGraph, spec: SpaceSpec, text: str) -> int | None:
    """``center``, ``host`` (no root), a vertex index, or ``label:a,b,...``."""
    text = text.strip()
    if text == "host":
        return None
    if text == "center":
        if spec.kind == "DyadicHyperbolic":
            return dyadic_index(spec.levels, spec.width, spec.n, (spec.width // 2,) * (spec.n - 1), spec.levels - 1)
        return 0
    if text.startswith("label:"):
        try:
            key = tuple(int(x) for x in text[6:].split(","))
        except ValueError:
            raise InputError(f"bad root label {text!r}") from None
        if G.labels is None or key not in G.label_index:
            raise InputError(f"no vertex with label {key}")
        return G.label_index[key]
    try:
        v = int(text)
    except ValueError:
        raise InputError(f"root must be center, host, an index or label:..., got {text!r}") from None
    if not 0 <= v < G.vertex_count:
        raise InputError(f"root {v} outside 0..{G.vertex_count - 1}")
    return v


def parse_boxes(text: str):
    """``"lo..hi, lo..hi"`` with space-separated coordinates."""
    boxes = []
    for part in text.split(","):
        if not part.strip():
            continue
        lo, sep, hi = part.partition("..")
        if not sep:
            raise InputError(f"box {part.strip()!r} is not of the form 'lo..hi'")
        try:
            boxes.append((np.array([int(x) for x in lo.split()]), np.array([int(x) for x in hi.split()])))
        except ValueError:
            raise InputError(f"box {part.strip()!r} has non-integer coordinates") from None
    return boxes


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _fresh_dir(root: str, name: str) -> str:
    os.makedirs(root, exist_ok=True)
    path = os.path.join(root, name)
    k = 2
    while True:
        try:
            os.mkdir(path)
            return path
        except FileExistsError:
            path = os.path.join(root, f"{name}-{k}")
            k += 1


def _profile_plot(curve, path, title, ylabel):
    x, y = curve.sizes, curve.values
    fits = {}
    try:
        fit = fit_power(curve)
        fits[curve.kind] = (fit.slope, fit.intercept)
    except InputError:
        pass
    loglog_figure({curve.kind: (x, y)}, path, title, "size v", ylabel, fits)


def _tagged(curve, cfg):
    curve.metadata["seed"] = str(cfg.seed)
    return curve


# ---------------------------------------------------------------------------
# experiments: each writes into ``rd`` and returns nothing


def _run_generate(cfg: ExperimentConfig, rd: str) -> None:
    G = build(cfg.space(), cfg.budget_vertices)
    write_graph(G, os.path.join(rd, "graph.txt"))
    with open(os.path.join(rd, "summary.txt"), "w") as fh:
        fh.write(f"name = {G.name}\nvertices = {G.vertex_count}\nedges = {G.edge_count}\n")
        fh.write(f"degree_bound = {'none' if G.degree_bound is None else G.degree_bound}\n")


def _run_growth(cfg, rd):
    spec = cfg.space()
    g = growth_function(spec, cfg.params["max_radius"], cfg.budget_vertices)
    write_growth_csv(g, os.path.join(rd, "growth.csv"), {"seed": cfg.seed})
    cls = classify_growth(g)
    fits = {"growth": (cls.degree, cls.polynomial_fit.intercept)} if cls.polynomial_fit else {}
    loglog_figure({"growth": (g.radii, g.counts)}, os.path.join(rd, "growth.svg"), f"growth of {spec.describe()}", "radius r", "ball size", fits)


def _run_iso(cfg, rd):
    spec, p = cfg.space(), cfg.params
    G = build(spec, cfg.budget_vertices)
    root = resolve_root(G, spec, p["root"])
    if p["method"] == "exact":
        curve = exact_isoperimetric_profile(G, p["max_size"], root=root, translation_invariant=p["translation_invariant"])
    elif p["method"] in ("balls", "boxes", "sublevel"):
        curve = family_isoperimetric_lowerbound(G, p["method"], root=0 if root is None else root, interior=p["interior"], max_size=p["max_size"])
    else:
        raise InputError(f"unknown iso method {p['method']!r}; expected exact, balls, boxes or sublevel")
    write_curve_csv(_tagged(curve, cfg), os.path.join(rd, "iso.csv"))
    _profile_plot(curve, os.path.join(rd, "iso.svg"), f"isoperimetric profile of {spec.describe()}", "j(v)")


def _run_sep(cfg, rd):
    spec, p = cfg.space(), cfg.params
    G = build(spec, cfg.budget_vertices)
    root = resolve_root(G, spec, p["root"])
    boxes = parse_boxes(p["boxes"]) if p["boxes"] else None
    curve = separation_profile(
        G, list(p["sizes"]) or None, p["strategy"], root, boxes=boxes,
        subset_budget=cfg.budget_subsets, exact_budget=cfg.budget_exact,
    )
    write_curve_csv(_tagged(curve, cfg), os.path.join(rd, "sep.csv"))
    _profile_plot(curve, os.path.join(rd, "sep.svg"), f"separation profile of {spec.describe()}", "sep(v)")


def _report_outputs(report, rd, title, seed):
    write_report_csv(report, os.path.join(rd, "regmap.csv"))
    t = [a for a, _ in report.compression]
    r = [b for _, b in report.compression]
    loglog_figure({"rho_minus": (t, r)}, os.path.join(rd, "compression.svg"), title, "domain distance t", "rho_minus(t)", logy=False)


def _run_regmap(cfg, rd):
    p = cfg.params
    dom = build(cfg.space("domain"), cfg.budget_vertices)
    cod = build(cfg.space("codomain"), cfg.budget_vertices)
    f = read_map(cfg.resolve_path(p["map"]), dom, cod)
    rep = verify_regular(f, sample=p["sample"], seed=cfg.seed)
    _report_outputs(rep, rd, "compression", cfg.seed)


def _run_embed(cfg, rd):
    p = cfg.params
    f = horospherical_embedding(p["n"], p["d"], p["radius"], max_vertices=cfg.budget_vertices)
    write_map(f, os.path.join(rd, "map.txt"))
    rep = verify_regular(f, sample=p["sample"], seed=cfg.seed)
    _report_outputs(rep, rd, f"horospherical embedding n={p['n']} d={p['d']} R={p['radius']}", cfg.seed)


def _run_pipeline(cfg, rd):
    p = cfg.params
    pc = PipelineConfig(cfg.space(), p["n"], p["d"], p["growth_radius"], p["profile_radius"], p["tolerance"], cfg.budget_vertices)
    res = theorem_pipeline(pc)
    with open(os.path.join(rd, "verdict.txt"), "w") as fh:
        fh.write(res.to_text())
    with open(os.path.join(rd, "fits.csv"), "w") as fh:
        fh.write("check,key,value\n")
        fh.writelines(f"{a},{b},{c}\n" for a, b, c in res.fit_rows())
    g = res.curves["growth"]
    write_growth_csv(g, os.path.join(rd, "growth.csv"), {"seed": cfg.seed})
    for key in ("iso", "sep", "model_sep"):
        if key in res.curves:
            c = _tagged(res.curves[key], cfg)
            write_curve_csv(c, os.path.join(rd, f"{key}.csv"))
            _profile_plot(c, os.path.join(rd, f"{key}.svg"), f"{key} ({c.source})", key)


RUNNERS = {
    "generate": _run_generate,
    "growth": _run_growth,
    "iso-profile": _run_iso,
    "sep-profile": _run_sep,
    "regmap-verify": _run_regmap,
    "embed": _run_embed,
    "pipeline": _run_pipeline,
}


def _manifest(cfg: ExperimentConfig, text: str, rd: str) -> dict:
    import matplotlib
    import scipy

    artifacts = {}
    for name in sorted(os.listdir(rd)):
        if name != MANIFEST:
            artifacts[name] = _file_digest(os.path.join(rd, name))
    params = {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.params.items()}
    return {
        "tool": "coarselab",
        "version": __version__,
        "software": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
        "kind": cfg.kind,
        "seed": cfg.seed,
        "budgets": {"vertices": cfg.budget_vertices, "subsets": cfg.budget_subsets, "exact": cfg.budget_exact},
        "parameters": params,
        "spaces": {name: asdict(spec) for name, spec in sorted(cfg.spaces.items())},
        "config": cfg.raw,
        "config_sha256": _digest(text),
        "artifacts": artifacts,
    }


def execute(cfg: ExperimentConfig, out_root: str) -> str:
    """Run ``cfg`` into a new directory under ``out_root``; return its path."""
    text = config_text(cfg.raw)
    rd = _fresh_dir(out_root, f"{cfg.kind}-{_digest(text)[:10]}")
    with open(os.path.join(rd, "config.cfg"), "w") as fh:
        fh.write(text)
    try:
        RUNNERS[cfg.kind](cfg, rd)
    except ResourceError as exc:
        if exc.stage is None:
            exc.stage = cfg.kind
        raise
    with open(os.path.join(rd, MANIFEST), "w") as fh:
        json.dump(_manifest(cfg, text, rd), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rd


def load_any(path: str) -> ExperimentConfig:
    """A config file, or a manifest (or run directory) to re-run."""
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST)
    if path.endswith(".json"):
        try:
            with open(path) as fh:
                manifest = json.load(fh)
            raw = manifest["config"]
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read manifest {path}: {exc}") from None
        cfg = parse_config_text(config_text(raw), path)
        cfg.base_dir = os.path.dirname(os.path.abspath(path))
        return cfg
    return load_config(path)


def _override(cfg: ExperimentConfig, args) -> ExperimentConfig:
    exp = cfg.raw.setdefault("experiment", {})
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        exp["seed"] = str(args.seed)
    if getattr(args, "budget_vertices", None) is not None:
        if args.budget_vertices <= 0:
            raise InputError("--budget-vertices must be positive")
        cfg.budget_vertices = args.budget_vertices
        exp["budget_vertices"] = str(args.budget_vertices)
    return cfg


# ---------------------------------------------------------------------------
# report


def render_report(rd: str) -> str:
    """Summary of a run directory; a pure function of its files."""
    mpath = os.path.join(rd, MANIFEST)
    if not os.path.exists(mpath):
        raise InputError(f"{rd}: no {MANIFEST}; not a run directory")
    try:
        with open(mpath) as fh:
            manifest = json.load(fh)
    except ValueError as exc:
        raise InputError(f"{mpath}: unreadable manifest: {exc}") from None
    lines = [f"run: {manifest.get('kind', '?')}  seed={manifest.get('seed', '?')}"]
    for name, spec in sorted(manifest.get("spaces", {}).items()):
        lines.append(f"space {name}: {spec.get('kind')}")
    for name in sorted(manifest.get("artifacts", {})):
        path = os.path.join(rd, name)
        if name == "verdict.txt":
            lines.append("")
            lines.append("== verdict ==")
            with open(path) as fh:
                lines.append(fh.read().rstrip("\n"))
        elif name == "growth.csv":
            g = read_growth_csv(path)
            cls = classify_growth(g)
            lines.append("")
            lines.append(f"== {name} ==")
            lines.append(f"radii 0..{g.radii[-1] if g.radii else '-'}; truncated={str(g.truncated).lower()}")
            if cls.degree is None:
                lines.append("growth: inconclusive")
            else:
                lines.append(f"growth: {cls.kind}, log-log slope {cls.degree:.6f}")
        elif name == "regmap.csv":
            r = read_report_csv(path)
            lines.append("")
            lines.append(f"== {name} ==")
            lines.append(f"lipschitz={r.lipschitz} multiplicity={r.multiplicity} regular_constant={r.regular_constant}")
            lines.append(f"compression ({'exact' if r.compression_exact else f'{r.sources} sampled sources'}): "
                         + " ".join(f"{t}:{v}" for t, v in r.compression))
        elif name.endswith(".csv") and name != "fits.csv":
            c = read_curve_csv(path)
            lines.append("")
            lines.append(f"== {name} ==")
            lines.append(f"{c.kind} curve, {len(c)} points, source {c.source}")
            try:
                fit = fit_power(c)
                lines.append(f"power fit: slope {fit.slope:.6f} over v in [{fit.window[0]:g}, {fit.window[1]:g}] ({fit.point_count} points)")
            except InputError:
                lines.append("power fit: inconclusive (too few points)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _space_args(p):
    g = p.add_argument_group("space")
    g.add_argument("--kind", required=True, help="space kind, e.g. ZPower, Heisenberg, DyadicHyperbolic")
    for name in ("d", "rank", "n", "radius", "levels", "width", "depth"):
        g.add_argument(f"--{name}", type=int)
    g.add_argument("--Q", help="four integers a,b,c,d (row major)")
    g.add_argument("--wrap", action="store_true")


def _space_raw(args) -> dict:
    raw = {"kind": args.kind}
    for name in ("d", "rank", "n", "radius", "levels", "width", "depth", "Q"):
        v = getattr(args, name, None)
        if v is not None:
            raw[name] = str(v)
    if getattr(args, "wrap", False):
        raw["wrap"] = "true"
    return raw


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coarselab", description="Coarse-geometry experiments on finite graph models.")
    ap.add_argument("--version", action="version", version=f"coarselab {__version__}")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./runs)")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--budget-vertices", type=int, dest="budget_vertices")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[shared], help="run an experiment from a config file or manifest")
    p.add_argument("config")

    p = sub.add_parser("generate", parents=[shared], help="build a finite model and write its graph file")
    _space_args(p)
    p = sub.add_parser("growth", parents=[shared], help="growth function of a group")
    _space_args(p)
    p.add_argument("--max-radius", type=int, required=True, dest="max_radius")
    p = sub.add_parser("iso", parents=[shared], help="isoperimetric profile")
    _space_args(p)
    p.add_argument("--method", default="exact", choices=["exact", "balls", "boxes", "sublevel"])
    p.add_argument("--max-size", type=int, required=True, dest="max_size")
    p.add_argument("--root", default="center")
    p.add_argument("--translation-invariant", action="store_true", dest="translation_invariant")
    p = sub.add_parser("sep", parents=[shared], help="separation profile")
    _space_args(p)
    p.add_argument("--strategy", default="family_balls", choices=["exact_tiny", "family_balls", "family_spectral", "family_boxes"])
    p.add_argument("--sizes", default="")
    p.add_argument("--root", default="center")
    p.add_argument("--boxes", default="")
    p = sub.add_parser("regmap", parents=[shared], help="verify a map file between two spaces")
    p.add_argument("config", help="config with kind = regmap-verify")
    p = sub.add_parser("embed", parents=[shared], help="horospherical embedding and its report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--sample", type=int, default=64)
    p = sub.add_parser("pipeline", parents=[shared], help="candidate group against a target H^n x R^d")
    _space_args(p)
    p.add_argument("--target-n", type=int, required=True, dest="target_n")
    p.add_argument("--target-d", type=int, required=True, dest="target_d")
    p.add_argument("--growth-radius", type=int, default=24, dest="growth_radius")
    p.add_argument("--profile-radius", type=int, default=8, dest="profile_radius")
    p.add_argument("--tolerance", type=float, default=0.15)

    p = sub.add_parser("report", help="summarise a run directory")
    p.add_argument("run_dir")
    return ap


def _raw_from_args(args) -> dict:
    c = args.command
    if c == "embed":
        return {"experiment": {"kind": "embed", "n": str(args.n), "d": str(args.d), "radius": str(args.radius), "sample": str(args.sample)}}
    exp = {"space": "main"}
    if c == "generate":
        exp["kind"] = "generate"
    elif c == "growth":
        exp.update(kind="growth", max_radius=str(args.max_radius))
    elif c == "iso":
        exp.update(kind="iso-profile", method=args.method, max_size=str(args.max_size), root=args.root,
                   translation_invariant=str(args.translation_invariant).lower())
    elif c == "sep":
        exp.update(kind="sep-profile", strategy=args.strategy, root=args.root)
        if args.sizes:
            exp["sizes"] = args.sizes
        if args.boxes:
            exp["boxes"] = args.boxes
    elif c == "pipeline":
        exp.update(kind="pipeline", n=str(args.target_n), d=str(args.target_d), growth_radius=str(args.growth_radius),
                   profile_radius=str(args.profile_radius), tolerance=str(args.tolerance))
    return {"experiment": exp, "space:main": _space_raw(args)}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            sys.stdout.write(render_report(args.run_dir))
            return 0
        if args.command in ("run", "regmap"):
            cfg = load_any(args.config)
            if args.command == "regmap" and cfg.kind != "regmap-verify":
                raise InputError(f"{args.config}: regmap needs kind = regmap-verify, found {cfg.kind}")
        else:
            cfg = parse_config_text(config_text(_raw_from_args(args)), f"<{args.command} arguments>")
        cfg = _override(cfg, args)
        out = args.out or os.environ.get(OUT_ENV) or "runs"
        rd = execute(cfg, out)
        print(rd)
        return 0
    except ResourceError as exc:
        where = f" [stage {exc.stage}]" if exc.stage else ""
        print(f"coarselab: resource budget exceeded{where}: {exc}", file=sys.stderr)
        return exc.exit_status
    except CoarseLabError as exc:
        print(f"coarselab: {exc}", file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["main", "execute", "render_report", "load_any", "KINDS"]
