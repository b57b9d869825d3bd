import json
import os
import subprocess
import sys

import pytest

from percolab_figures import plots
from percolab_figures.cli import (cluster_scatter_main, growth_loglog_main,
                                  phase_curve_main)
from percolab_figures.io import FormatError

HEADER = "lambda,R,L,trials,crossings,p_hat,ci_low,ci_high,seed"

SMALL_CSV = f"""# seed=3 config_sha256=deadbeef
{HEADER}
0.1,1,30,50,2,0.04,0.011,0.135,3
0.2,1,30,50,11,0.22,0.127,0.353,3
0.4,1,30,50,39,0.78,0.647,0.873,3
0.1,1,60,50,0,0,0,0.0712,3
0.2,1,60,50,6,0.12,0.0562,0.24,3
0.4,1,60,50,44,0.88,0.76,0.944,3
"""


def _write(tmp_path, text, name):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_single_row_plot(tmp_path):
    csv = _write(tmp_path, f"# h\n{HEADER}\n0.5,1,20,100,50,0.5,0.4,0.6,1\n",
                 "one.csv")
    out = str(tmp_path / "one.png")
    assert phase_curve_main([csv, out]) == 0
    assert os.path.getsize(out) > 0


def test_two_window_series(tmp_path):
    csv = _write(tmp_path, SMALL_CSV, "sweep.csv")
    out = str(tmp_path / "sweep.png")
    assert phase_curve_main([csv, out]) == 0
    assert os.path.getsize(out) > 0


def test_malformed_csv_exit_code_with_row(tmp_path, capsys):
    text = f"{HEADER}\n0.1,1,30,50,2,0.04,0.011,0.135,3\n0.2,1,oops\n"
    csv = _write(tmp_path, text, "bad.csv")
    assert phase_curve_main([csv, str(tmp_path / "bad.png")]) == 1
    assert "row 3" in capsys.readouterr().err


def test_wrong_header_rejected(tmp_path):
    csv = _write(tmp_path, "a,b,c\n1,2,3\n", "hdr.csv")
    with pytest.raises(FormatError, match="contract"):
        plots.plot_phase_curve(csv, str(tmp_path / "x.png"))


def test_identical_inputs_identical_images(tmp_path):
    csv = _write(tmp_path, SMALL_CSV, "sweep.csv")
    a = str(tmp_path / "a.png")
    b = str(tmp_path / "b.png")
    plots.plot_phase_curve(csv, a)
    plots.plot_phase_curve(csv, b)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_cluster_scatter_empty_and_path(tmp_path):
    doc = {"points": [], "component_ids": [], "sizes": [],
           "crossing": False, "max_extent": 0.0, "L": 5.0,
           "n_components": 0}
    j = _write(tmp_path, json.dumps(doc), "empty.json")
    out = str(tmp_path / "empty.png")
    assert cluster_scatter_main([j, out]) == 0
    assert os.path.getsize(out) > 0

    doc = {"points": [[0, 0], [1.5, 0], [3.0, 0]],
           "component_ids": [0, 0, 0], "sizes": [3], "crossing": False,
           "max_extent": 5.0, "L": 5.0, "n_components": 1}
    j = _write(tmp_path, json.dumps(doc), "path.json")
    assert cluster_scatter_main([j, str(tmp_path / "path.png")]) == 0


def test_cluster_scatter_requires_coordinates(tmp_path, capsys):
    doc = {"component_ids": [0], "sizes": [1], "crossing": False,
           "max_extent": 0.0, "n_components": 1}
    j = _write(tmp_path, json.dumps(doc), "nopts.json")
    assert cluster_scatter_main([j, str(tmp_path / "x.png")]) == 1
    assert "snapshot" in capsys.readouterr().err


def test_growth_loglog(tmp_path):
    rows = "\n".join(f"{n},{2 * n * n + 2 * n + 1}" for n in range(1, 17))
    csv = _write(tmp_path, f"# h\nn,size\n{rows}\n", "growth.csv")
    out = str(tmp_path / "growth.png")
    assert growth_loglog_main([csv, out]) == 0
    assert os.path.getsize(out) > 0


def test_secondary_acceptance_invariance_csv(tmp_path):
    """[SECONDARY] render the invariance-experiment CSV produced by the
    primary CLI; the embedded self-test checks series ordering."""
    cfg = """
[space]
kind = "cayley"
group = "z2-standard"
L = 24.0
padding = 3.0

[space2]
kind = "cayley"
group = "z2-king"
L = 6.0

[map]
kind = "z2-generator-change"

[model]
lambda = 2.0
R = 3.0

[run]
command = "invariance"
seed = 9
trials = 20
windows = [8.0, 12.0]
"""
    cfgp = _write(tmp_path, cfg, "inv.toml")
    out = str(tmp_path / "invout")
    proc = subprocess.run(
        [sys.executable, "-m", "percolab.cli", "invariance", "-c", cfgp,
         "--out", out], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    csv = os.path.join(out, "invariance_rows.csv")
    png = str(tmp_path / "invariance.png")
    assert phase_curve_main([csv, png]) == 0
    assert os.path.getsize(png) > 0
