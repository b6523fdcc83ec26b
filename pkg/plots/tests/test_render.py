import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from render import NoDataToPlot, PlotJob, SchemaMismatch, render

RENDER = Path(__file__).resolve().parents[1] / "render.py"


def write_theta(path: Path, thetas, intervals=((-1.1, -0.6),)):
    lines = ["# schema=svarsoft.theta-draws.v1"]
    for lo, hi in intervals:
        lines.append(f"# interval={lo},{hi}")
    lines.append("draw_index,theta,branch")
    for d, t in enumerate(thetas):
        lines.append(f"{d},{t!r},rotation")
    path.write_text("\n".join(lines) + "\n")


def write_irf(path: Path):
    lines = ["# schema=svarsoft.irf.v1", "variable,shock,horizon,alpha,median,cr_lo,cr_hi"]
    for v in ("y1", "y2"):
        for s in ("s1", "s2"):
            for h in range(4):
                mid = 0.5 * h if v == "y1" else -0.2 * h
                lines.append(f"{v},{s},{h},0.68,{mid!r},{mid - 0.3!r},{mid + 0.3!r}")
    path.write_text("\n".join(lines) + "\n")


def write_isodraw(path: Path):
    lines = ["# schema=svarsoft.isodraw.v1", "# d=189", "# m_draws=20713", "delta,epsilon"]
    for d in np.linspace(0.01, 0.5, 20):
        lines.append(f"{d!r},{1.0 / (1 + 10 * d)!r}")
    path.write_text("\n".join(lines) + "\n")


def write_conddraws(path: Path):
    rng = np.random.default_rng(0)
    lines = ["# schema=svarsoft.conddraws.v1", "variable,shock,sampler,draw_index,value"]
    for v in ("y1", "y2"):
        for s in ("s1", "s2"):
            for label in ("soft-sign", "accept-reject"):
                for d, x in enumerate(rng.standard_normal(200)):
                    lines.append(f"{v},{s},{label},{d},{x!r}")
    path.write_text("\n".join(lines) + "\n")


class TestRender:
    def test_theta_hist_checksum_matches_input(self, tmp_path):
        src = tmp_path / "theta.csv"
        thetas = np.random.default_rng(1).uniform(-1.1, -0.6, 500)
        write_theta(src, thetas)
        out = tmp_path / "hist.png"
        digest = render(PlotJob(kind="theta-hist", inputs=[src], output=out))
        want = hashlib.sha256(
            np.array([float(repr(t)) for t in thetas]).tobytes()
        ).hexdigest()
        assert digest == want
        assert out.stat().st_size > 1000

    def test_rerender_byte_identical(self, tmp_path):
        src = tmp_path / "theta.csv"
        write_theta(src, np.random.default_rng(2).uniform(-1.1, -0.6, 300))
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render(PlotJob(kind="theta-hist", inputs=[src], output=a))
        render(PlotJob(kind="theta-hist", inputs=[src], output=b))
        assert a.read_bytes() == b.read_bytes()

    def test_irf_panel(self, tmp_path):
        src = tmp_path / "irf.csv"
        write_irf(src)
        out = tmp_path / "panel.png"
        digest = render(PlotJob(kind="irf-panel", inputs=[src], output=out))
        assert len(digest) == 64
        assert out.exists()

    def test_cond_hist_grid(self, tmp_path):
        src = tmp_path / "cond.csv"
        write_conddraws(src)
        out = tmp_path / "grid.png"
        render(PlotJob(kind="cond-hist-grid", inputs=[src], output=out))
        assert out.exists()

    def test_iso_draw(self, tmp_path):
        src = tmp_path / "iso.csv"
        write_isodraw(src)
        out = tmp_path / "iso.png"
        render(PlotJob(kind="iso-draw", inputs=[src], output=out))
        assert out.exists()

    def test_schema_mismatch(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("# schema=svarsoft.draws.v1\ndraw_index,theta,branch\n0,0.5,rotation\n")
        with pytest.raises(SchemaMismatch):
            render(PlotJob(kind="theta-hist", inputs=[src], output=tmp_path / "x.png"))

    def test_missing_schema_line(self, tmp_path):
        src = tmp_path / "none.csv"
        src.write_text("draw_index,theta\n0,0.5\n")
        with pytest.raises(SchemaMismatch):
            render(PlotJob(kind="theta-hist", inputs=[src], output=tmp_path / "x.png"))

    def test_no_data(self, tmp_path):
        src = tmp_path / "empty.csv"
        src.write_text("# schema=svarsoft.theta-draws.v1\ndraw_index,theta,branch\n")
        with pytest.raises(NoDataToPlot):
            render(PlotJob(kind="theta-hist", inputs=[src], output=tmp_path / "x.png"))


class TestCli:
    def test_cli_prints_checksum(self, tmp_path):
        src = tmp_path / "theta.csv"
        write_theta(src, np.random.default_rng(3).uniform(-1.1, -0.6, 100))
        out = tmp_path / "h.png"
        res = subprocess.run(
            [sys.executable, str(RENDER), "--job", "theta-hist",
             "--in", str(src), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert res.returncode == 0
        assert any(l.startswith("values-sha256=") for l in res.stdout.splitlines())

    def test_cli_schema_error_exit(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("# schema=wrong.v9\nx\n1\n")
        res = subprocess.run(
            [sys.executable, str(RENDER), "--job", "theta-hist",
             "--in", str(src), "--out", str(tmp_path / "x.png")],
            capture_output=True, text=True,
        )
        assert res.returncode == 1
        assert "SchemaMismatch" in res.stderr
