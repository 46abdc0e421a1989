import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from band_counter import records
from band_counter.annulus import count_annulus
from band_counter.cli import run
from band_counter.halfline import splitting_sweep
from band_counter.predictions import r_tilde_sq
from band_counter.strip import count_strip
from band_counter.svg import HEIGHT, PAD, WIDTH

SVG = "{http://www.w3.org/2000/svg}"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def last_json(err: str) -> dict:
    return json.loads(err.strip().splitlines()[0])


def test_strip_count_golden(capsys):
    code, out, err = call(capsys, "strip-count", "--L", "1", "--h", "0.01", "--bc", "dn", "--out", "csv")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[:5] == ["m", "lambda0", "lambda0_over_h", "below", "ambiguous"]
    result = count_strip(1.0, 0.01)
    assert out == records.count_csv(result)
    summary = last_json(err)
    assert summary["schema_version"] == 1
    assert summary["count"] == result.count
    assert summary["predicted"] == 50.0
    assert summary["ratio"] == result.ratio


def test_strip_count_csv_round_trip(capsys):
    code, out, err = call(capsys, "strip-count", "--L", "1", "--h", "0.02", "--bc", "nn")
    assert code == 0
    back = records.read_count(out, last_json(err))
    assert back == count_strip(1.0, 0.02, "PureNN")


def test_annulus_count_plot(capsys, tmp_path):
    svg = tmp_path / "band.svg"
    code, out, err = call(capsys, "annulus-count", "--R", "0.5", "--h", "0.005", "--plot", str(svg))
    assert code == 0
    assert out == records.count_csv(count_annulus(0.5, 0.005))
    root = ET.parse(svg).getroot()
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    assert root.find(f"{SVG}polyline") is not None
    hline = root.find(f"{SVG}line[@class='hline']")
    vline = root.find(f"{SVG}line[@class='vline']")
    assert hline is not None and vline is not None
    _, rows = records.read_table(out)
    xs = [2 * int(r[0]) * 0.005 for r in rows]
    x0, x1 = min(xs), max(xs)
    expected_x = PAD + (r_tilde_sq(0.5) - x0) / (x1 - x0) * (WIDTH - 2 * PAD)
    assert float(vline.get("x1")) == pytest.approx(expected_x, abs=0.01)
    expected_y = HEIGHT - PAD - (1.0 - 0.0) / (3.0 - 0.0) * (HEIGHT - 2 * PAD)
    assert float(hline.get("y1")) == pytest.approx(expected_y, abs=0.01)


def test_halfline_sweep_matches_library(capsys):
    code, out, _ = call(capsys, "halfline-sweep", "--kind", "neu", "--ratios", "-2.5,-3,-3.5,-4", "--h", "1")
    assert code == 0
    header, rows = records.read_table(out)
    assert header == ["ratio", "mu0", "splitting", "predicted", "rel_error"]
    table = splitting_sweep("neu", [-2.5, -3, -3.5, -4], 1.0)
    assert [float(r[0]) for r in rows] == [-2.5, -3.0, -3.5, -4.0]
    for row, res in zip(rows, table):
        assert float(row[1]) == res.mu0
        assert float(row[2]) == res.splitting
        assert float(row[3]) == res.predicted_splitting
        assert float(row[4]) == res.relative_error


def test_band_scan(capsys):
    code, out, _ = call(capsys, "band-scan", "--geometry", "strip", "--h", "0.05")
    assert code == 0
    header, rows = records.read_table(out)
    assert header[:3] == ["m", "lambda0", "lambda1"]
    assert all(float(r[2]) > float(r[1]) for r in rows)


def test_convergence(capsys):
    code, out, _ = call(capsys, "convergence", "--geometry", "annulus", "--R", "0.5", "--m", "35", "--h", "0.01",
                        "--scheme", "standard", "--levels", "4")
    assert code == 0
    _, rows = records.read_table(out)
    assert len(rows) == 4
    ratios = [float(r[4]) for r in rows[2:]]
    assert all(3.5 < q < 4.5 for q in ratios)


def test_predict(capsys):
    code, out, err = call(capsys, "predict", "--formula", "StripDN", "--L", "1", "--h", "0.01")
    assert code == 0
    assert last_json(err)["predicted"] == 50.0
    code, _, err = call(capsys, "predict", "--formula", "HalflineDirSplit", "--h", "1", "--xi", "-4")
    assert code == 0 and last_json(err)["predicted"] > 0


def test_oracle_check_deterministic(capsys):
    a = call(capsys, "oracle-check", "--count", "15", "--seed", "5")
    b = call(capsys, "oracle-check", "--count", "15", "--seed", "5")
    assert a[0] == 0
    assert a == b
    assert last_json(a[2])["failures"] == 0


def test_jobs_do_not_change_output(capsys):
    a = call(capsys, "annulus-count", "--R", "0.3", "--h", "0.01", "--jobs", "1")
    b = call(capsys, "annulus-count", "--R", "0.3", "--h", "0.01", "--jobs", "2")
    assert a == b


def test_out_dir_and_json(capsys, tmp_path):
    code, out, err = call(capsys, "strip-count", "--h", "0.05", "--out", "json", "--out-dir", str(tmp_path))
    assert code == 0 and out == "" and err == ""
    body = json.loads((tmp_path / "strip_count.json").read_text())
    summary = json.loads((tmp_path / "strip_count.summary.json").read_text())
    assert body["schema_version"] == summary["schema_version"] == 1
    assert body["count"] == summary["count"]


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["strip-count"], "--h"),
        (["strip-count", "--h", "-1"], "--h"),
        (["strip-count", "--h", "0.01", "--bc", "xx"], "--bc"),
        (["annulus-count", "--R", "1.5", "--h", "0.01"], "--R"),
        (["halfline-sweep", "--kind", "neu", "--ratios", "-1,-3"], "--ratios"),
        (["predict", "--formula", "HalflineNeuSplit", "--h", "1"], "--xi"),
        (["oracle-check", "--jobs", "0"], "--jobs"),
    ],
)
def test_usage_errors(capsys, argv, flag):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert flag in err


def test_unknown_subcommand(capsys):
    code, _, _ = call(capsys, "nonsense")
    assert code == 2


def test_solver_error_exit_code(capsys):
    code, _, err = call(capsys, "strip-count", "--h", "0.9")
    assert code == 1
    assert "error" in err


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "band_counter.cli", "predict", "--formula", "StripNN", "--h", "0.01"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "formula_id,h,predicted,window_lo,window_hi"
    assert "\r" not in proc.stdout
