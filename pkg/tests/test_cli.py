import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from coarselab import cli
from coarselab.config import load_config
from coarselab.errors import NumericError
from coarselab.generators import read_growth_csv
from coarselab.graph import read_graph
from coarselab.profiles import read_curve_csv
from coarselab.regmap import read_report_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out.strip(), err


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.cfg")))
def test_shipped_configs_parse(name):
    cfg = load_config(CONFIGS / name)
    assert cfg.kind in cli.KINDS


def test_growth_config_run(tmp_path, capsys):
    code, rd, _ = run(["run", CONFIGS / "lamplighter-growth.cfg", "--out", tmp_path], capsys)
    assert code == 0
    files = sorted(os.listdir(rd))
    assert files == ["config.cfg", "growth.csv", "growth.svg", "manifest.json"]
    g = read_growth_csv(os.path.join(rd, "growth.csv"))
    assert g.counts[1] == 4 and g.radii[-1] == 16
    manifest = json.loads(Path(rd, "manifest.json").read_text())
    assert manifest["kind"] == "growth" and manifest["seed"] == 0
    assert set(manifest["software"]) == {"python", "numpy", "scipy", "matplotlib"}
    assert set(manifest["artifacts"]) == {"config.cfg", "growth.csv", "growth.svg"}
    assert os.path.basename(rd).startswith("growth-")


def test_subcommands(tmp_path, capsys):
    out = ["--out", tmp_path]
    code, rd, _ = run(["generate", "--kind", "ZPower", "--d", "2", "--radius", "3", *out], capsys)
    assert code == 0
    G = read_graph(os.path.join(rd, "graph.txt"))
    assert G.vertex_count == 25
    code, rd, _ = run(["iso", "--kind", "ZPower", "--d", "2", "--radius", "9", "--max-size", "5", "--translation-invariant", *out], capsys)
    assert code == 0
    iso = read_curve_csv(os.path.join(rd, "iso.csv"))
    assert iso.values[-1] == pytest.approx(0.5)
    assert iso.metadata["seed"] == "0"
    code, rd, _ = run(["sep", "--kind", "ZPower", "--d", "2", "--radius", "6", "--strategy", "family_boxes", "--boxes", "0 0..1 1, 0 0..3 3", *out], capsys)
    assert code == 0
    sep = read_curve_csv(os.path.join(rd, "sep.csv"))
    assert sep.sizes == [4, 16] and sep.values == [2.0, 4.0]
    code, rd, _ = run(["sep", "--kind", "ZPower", "--d", "1", "--radius", "6", "--strategy", "exact_tiny", "--sizes", "2,5", *out], capsys)
    assert code == 0 and read_curve_csv(os.path.join(rd, "sep.csv")).values == [1.0, 1.0]
    code, rd, _ = run(["growth", "--kind", "Heisenberg", "--max-radius", "6", *out], capsys)
    assert code == 0 and read_growth_csv(os.path.join(rd, "growth.csv")).counts[-1] == 593
    code, rd, _ = run(["pipeline", "--kind", "ZPower", "--d", "2", "--target-n", "2", "--target-d", "1", "--growth-radius", "12", "--profile-radius", "5", *out], capsys)
    assert code == 0
    assert "verdict = admissible" in Path(rd, "verdict.txt").read_text()
    assert Path(rd, "fits.csv").read_text().startswith("check,key,value\n")


def test_embed_then_regmap_verify(tmp_path, capsys):
    code, rd, _ = run(["embed", "--n", "2", "--d", "0", "--radius", "5", "--out", tmp_path], capsys)
    assert code == 0
    rep = read_report_csv(os.path.join(rd, "regmap.csv"))
    assert (rep.lipschitz, rep.multiplicity) == (1, 1)
    cfg = tmp_path / "verify.cfg"
    cfg.write_text(
        f"[experiment]\nkind = regmap-verify\ndomain = line\ncodomain = h2\nmap = {rd}/map.txt\n"
        "[space:line]\nkind = ZPower\nd = 1\nradius = 5\n"
        "[space:h2]\nkind = DyadicHyperbolic\nn = 2\nlevels = 5\nwidth = 1\n"
    )
    code, rd2, _ = run(["regmap", cfg, "--out", tmp_path], capsys)
    assert code == 0
    assert read_report_csv(os.path.join(rd2, "regmap.csv")) == rep
    code, _, err = run(["regmap", CONFIGS / "grid-iso.cfg", "--out", tmp_path], capsys)
    assert code == 2 and "regmap-verify" in err


def test_missing_kind_exits_2_naming_field(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[experiment]\nspace = g\n")
    code, _, err = run(["run", bad, "--out", tmp_path], capsys)
    assert code == 2
    assert "kind" in err and f"{bad}:1:1" in err


def test_budget_exceeded_exits_3(tmp_path, capsys):
    code, _, err = run(["generate", "--kind", "FreeGroup", "--radius", "10", "--budget-vertices", "100", "--out", tmp_path], capsys)
    assert code == 3
    assert "stage generate" in err


def test_numeric_failure_exits_4(tmp_path, capsys, monkeypatch):
    def boom(cfg, rd):
        raise NumericError("eigensolver did not converge", residual=1.0)

    monkeypatch.setitem(cli.RUNNERS, "growth", boom)
    code, _, err = run(["run", CONFIGS / "lamplighter-growth.cfg", "--out", tmp_path], capsys)
    assert code == 4 and "converge" in err


def test_bad_override_and_root(tmp_path, capsys):
    code, _, _ = run(["generate", "--kind", "ZPower", "--budget-vertices", "0", "--out", tmp_path], capsys)
    assert code == 2
    code, _, err = run(["iso", "--kind", "ZPower", "--max-size", "3", "--root", "label:9,9", "--out", tmp_path], capsys)
    assert code == 2 and "label" in err


def test_report_is_deterministic_and_read_only(tmp_path, capsys):
    code, rd, _ = run(["run", CONFIGS / "lamplighter-growth.cfg", "--out", tmp_path], capsys)
    before = {p.name: p.read_bytes() for p in Path(rd).iterdir()}
    code1, out1, _ = run(["report", rd], capsys)
    code2, out2, _ = run(["report", rd], capsys)
    assert code1 == code2 == 0 and out1 == out2
    assert "growth: exponential" in out1
    assert {p.name: p.read_bytes() for p in Path(rd).iterdir()} == before
    code, _, err = run(["report", tmp_path], capsys)
    assert code == 2 and "manifest" in err


def test_runs_are_append_only(tmp_path, capsys):
    _, rd1, _ = run(["run", CONFIGS / "lamplighter-growth.cfg", "--out", tmp_path], capsys)
    first = {p.name: p.read_bytes() for p in Path(rd1).iterdir()}
    _, rd2, _ = run(["run", CONFIGS / "lamplighter-growth.cfg", "--out", tmp_path], capsys)
    assert rd2 == rd1 + "-2"
    assert {p.name: p.read_bytes() for p in Path(rd1).iterdir()} == first


def test_manifest_rerun_is_byte_identical(tmp_path, capsys):
    _, rd1, _ = run(["run", CONFIGS / "grid-iso.cfg", "--out", tmp_path / "a"], capsys)
    _, rd2, _ = run(["run", os.path.join(rd1, "manifest.json"), "--out", tmp_path / "b"], capsys)
    m1 = json.loads(Path(rd1, "manifest.json").read_text())
    m2 = json.loads(Path(rd2, "manifest.json").read_text())
    assert m1["artifacts"] == m2["artifacts"]
    assert Path(rd1, "iso.csv").read_bytes() == Path(rd2, "iso.csv").read_bytes()
    assert Path(rd1, "iso.svg").read_bytes() == Path(rd2, "iso.svg").read_bytes()
    assert os.path.basename(rd1) == os.path.basename(rd2)


def test_env_var_sets_output_root(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    code, rd, _ = run(["generate", "--kind", "ZPower", "--radius", "2"], capsys)
    assert code == 0 and rd.startswith(str(tmp_path / "env"))


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "coarselab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("coarselab ")
