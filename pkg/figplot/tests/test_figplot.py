"""Tests for the sweep-CSV figure renderer."""

import json
import os
import subprocess
import sys

import pytest

from figplot import (
    FigureError,
    FigureSpec,
    PANEL_X_LABELS,
    Y_LABEL,
    load_panel_series,
    read_sweep_series,
    render_panel,
    sidecar_path,
)
from figplot.cli import main

SWEEP_HEADER = "axis,value,sse_bits,opt_q,opt_M,fp_iters,runtime_ms"


def sweep_csv(tmp_path, name, axis, points, header=SWEEP_HEADER, comment=True):
    lines = []
    if comment:
        lines.append("# config_hash=0123456789ab seed=0 version=0.1.0")
    lines.append(header)
    for value, sse in points:
        lines.append(f"{axis},{value},{sse},1,1,12,0")
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return str(p)


class TestReadSweepSeries:
    def test_parses_points_and_skips_comment(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "doppler",
                         [(0.05, 5.25), (0.2, 3.125)])
        series = read_sweep_series(path)
        assert series.axis == "doppler"
        assert series.x == (0.05, 0.2)
        assert series.y == (5.25, 3.125)

    def test_works_without_comment_line(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 2.0)], comment=False)
        assert read_sweep_series(path).x == (1.0,)

    def test_missing_sse_column_named(self, tmp_path):
        header = "axis,value,opt_q,opt_M,fp_iters,runtime_ms"
        p = tmp_path / "bad.csv"
        p.write_text(header + "\nn_t,1,1,1,12,0\n")
        with pytest.raises(FigureError, match="missing column 'sse_bits'"):
            read_sweep_series(str(p))

    def test_missing_value_column_named(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("axis,sse_bits\nn_t,1.0\n")
        with pytest.raises(FigureError, match="missing column 'value'"):
            read_sweep_series(str(p))

    def test_no_data_rows(self, tmp_path):
        path = sweep_csv(tmp_path, "empty.csv", "n_t", [])
        with pytest.raises(FigureError, match="no data rows"):
            read_sweep_series(path)

    def test_mixed_axis_rejected(self, tmp_path):
        p = tmp_path / "mix.csv"
        p.write_text(SWEEP_HEADER + "\nn_t,1,2.0,1,1,9,0\ndoppler,0.1,2.0,1,1,9,0\n")
        with pytest.raises(FigureError, match="mixed axis"):
            read_sweep_series(str(p))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FigureError, match="does not exist"):
            read_sweep_series(str(tmp_path / "nope.csv"))

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(SWEEP_HEADER + "\nn_t,one,2.0,1,1,9,0\n")
        with pytest.raises(FigureError, match="non-numeric"):
            read_sweep_series(str(p))


class TestFigureSpec:
    def test_unknown_panel_rejected(self, tmp_path):
        with pytest.raises(FigureError, match="unknown panel"):
            FigureSpec(csvs=("a.csv",), panel="q_max", labels=("a",), out="o.png")

    def test_label_count_must_match(self):
        with pytest.raises(FigureError, match="2 labels for 1 CSVs"):
            FigureSpec(csvs=("a.csv",), panel="n_t", labels=("a", "b"), out="o.png")

    def test_needs_a_csv(self):
        with pytest.raises(FigureError, match="at least one"):
            FigureSpec(csvs=(), panel="n_t", labels=(), out="o.png")

    def test_default_axis_labels(self):
        spec = FigureSpec(csvs=("a.csv",), panel="pathloss_db", labels=("a",),
                          out="o.png")
        assert spec.resolved_x_label() == PANEL_X_LABELS["pathloss_db"]
        assert spec.resolved_y_label() == Y_LABEL

    def test_axis_label_override(self):
        spec = FigureSpec(csvs=("a.csv",), panel="n_t", labels=("a",),
                          out="o.png", x_label="antennas", y_label="rate")
        assert spec.resolved_x_label() == "antennas"
        assert spec.resolved_y_label() == "rate"


class TestRenderPanel:
    def test_single_series_writes_image_and_sidecar(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "rician", [(0.0, 3.0), (4.0, 3.5)])
        out = str(tmp_path / "fig" / "rician.png")
        spec = FigureSpec(csvs=(path,), panel="rician", labels=("default",),
                          out=out)
        payload = render_panel(spec)
        assert os.path.getsize(out) > 0
        assert len(payload["series"]) == 1
        with open(sidecar_path(out)) as fh:
            assert json.load(fh) == payload

    def test_two_series(self, tmp_path):
        a = sweep_csv(tmp_path, "a.csv", "doppler", [(0.05, 5.0), (0.2, 3.0)])
        b = sweep_csv(tmp_path, "b.csv", "doppler", [(0.05, 4.0), (0.2, 2.5)])
        spec = FigureSpec(csvs=(a, b), panel="doppler", labels=("nt2", "nt1"),
                          out=str(tmp_path / "d.png"))
        payload = render_panel(spec)
        assert [s["label"] for s in payload["series"]] == ["nt2", "nt1"]
        assert payload["series"][1]["y"] == [4.0, 2.5]

    def test_sidecar_sorted_keys_and_trailing_newline(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 1.0)])
        out = str(tmp_path / "n.png")
        render_panel(FigureSpec(csvs=(path,), panel="n_t", labels=("a",), out=out))
        raw = open(sidecar_path(out), "rb").read()
        assert raw.endswith(b"\n")
        # sorted keys put panel before series before the labels
        assert raw.index(b'"panel"') < raw.index(b'"series"')
        assert raw.index(b'"series"') < raw.index(b'"x_label"')

    def test_rerun_sidecar_is_byte_identical(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 1.5), (2, 2.25)])
        out1 = str(tmp_path / "one.png")
        out2 = str(tmp_path / "two.png")
        for out in (out1, out2):
            render_panel(FigureSpec(csvs=(path,), panel="n_t", labels=("a",),
                                    out=out))
        assert open(sidecar_path(out1), "rb").read() == \
            open(sidecar_path(out2), "rb").read()

    def test_axis_mismatch_rejected(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "doppler", [(0.1, 2.0)])
        spec = FigureSpec(csvs=(path,), panel="n_t", labels=("a",),
                          out=str(tmp_path / "o.png"))
        with pytest.raises(FigureError, match="holds axis 'doppler'"):
            load_panel_series(spec)

    def test_creates_output_directory(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 1.0)])
        out = str(tmp_path / "deep" / "nest" / "o.png")
        render_panel(FigureSpec(csvs=(path,), panel="n_t", labels=("a",), out=out))
        assert os.path.exists(out)


class TestCli:
    def test_success_reports_series_count(self, tmp_path, capsys):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 1.0), (2, 2.0)])
        out = str(tmp_path / "o.png")
        rc = main(["--panel", "n_t", "--csv", path, "--labels", "base",
                   "--out", out])
        assert rc == 0
        assert "(1 series)" in capsys.readouterr().out
        assert os.path.exists(sidecar_path(out))

    def test_missing_column_exits_two(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("axis,value\nn_t,1\n")
        rc = main(["--panel", "n_t", "--csv", str(p), "--labels", "a",
                   "--out", str(tmp_path / "o.png")])
        assert rc == 2
        assert "missing column 'sse_bits'" in capsys.readouterr().err

    def test_label_mismatch_exits_two(self, tmp_path, capsys):
        path = sweep_csv(tmp_path, "a.csv", "n_t", [(1, 1.0)])
        rc = main(["--panel", "n_t", "--csv", path, "--labels", "a", "b",
                   "--out", str(tmp_path / "o.png")])
        assert rc == 2
        assert "labels" in capsys.readouterr().err

    def test_module_invocation(self, tmp_path):
        path = sweep_csv(tmp_path, "a.csv", "rician", [(0.0, 2.0)])
        out = str(tmp_path / "o.png")
        proc = subprocess.run(
            [sys.executable, "-m", "figplot.cli", "--panel", "rician",
             "--csv", path, "--labels", "a", "--out", out],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert os.path.exists(out)


SWEEP_YAML = """\
k: 2
n_t: {n_t}
n_r: 4
q_max: 2
users:
  f_d: 0.1
mc:
  seed: 1
sweep:
  axis: {axis}
  values: [{values}]
"""

# panel -> (axis values, per-series base n_t)
PANEL_RUNS = {
    "n_t": ("1, 2", (2,)),
    "doppler": ("0.1, 0.3", (2, 1)),
    "rician": ("0.0, 4.0", (2,)),
    "pathloss_db": ("-20.0, 0.0", (2,)),
}


@pytest.fixture(scope="module")
def panel_csvs(tmp_path_factory):
    """Real sweep CSVs for all four panels, produced through the CLI."""
    root = tmp_path_factory.mktemp("panels")
    produced = {}
    for axis, (values, n_ts) in PANEL_RUNS.items():
        paths, labels = [], []
        for n_t in n_ts:
            cfg = root / f"{axis}_nt{n_t}.yaml"
            cfg.write_text(SWEEP_YAML.format(n_t=n_t, axis=axis, values=values))
            out = root / f"{axis}_nt{n_t}.csv"
            proc = subprocess.run(
                [sys.executable, "-m", "agingmimo.expcli", "sweep",
                 "--config", str(cfg), "--out", str(out), "--threads", "2"],
                capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            paths.append(str(out))
            labels.append(f"n_t={n_t}")
        produced[axis] = (tuple(paths), tuple(labels),
                          tuple(float(v) for v in values.split(", ")))
    return produced


class TestFourPanels:
    """End-to-end: every figure panel renders from real experiment output."""

    def test_each_panel_has_expected_series(self, panel_csvs, tmp_path):
        for axis, (paths, labels, values) in panel_csvs.items():
            out = str(tmp_path / f"{axis}.png")
            rc = main(["--panel", axis, "--csv", *paths,
                       "--labels", *labels, "--out", out])
            assert rc == 0
            with open(sidecar_path(out)) as fh:
                payload = json.load(fh)
            assert len(payload["series"]) == len(paths)
            for series in payload["series"]:
                assert series["x"] == list(values)
                assert all(y > 0 for y in series["y"])
            assert os.path.getsize(out) > 0

    def test_doppler_panel_two_curves(self, panel_csvs, tmp_path):
        paths, labels, _ = panel_csvs["doppler"]
        assert len(paths) == 2
        out = str(tmp_path / "doppler.png")
        main(["--panel", "doppler", "--csv", *paths, "--labels", *labels,
              "--out", out])
        with open(sidecar_path(out)) as fh:
            payload = json.load(fh)
        assert [s["label"] for s in payload["series"]] == ["n_t=2", "n_t=1"]

    def test_rerun_sidecars_byte_match(self, panel_csvs, tmp_path):
        for axis, (paths, labels, _) in panel_csvs.items():
            outs = [str(tmp_path / f"{axis}_{i}.png") for i in (0, 1)]
            for out in outs:
                rc = main(["--panel", axis, "--csv", *paths,
                           "--labels", *labels, "--out", out])
                assert rc == 0
            first = open(sidecar_path(outs[0]), "rb").read()
            second = open(sidecar_path(outs[1]), "rb").read()
            assert first == second
