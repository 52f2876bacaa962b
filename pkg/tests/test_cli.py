import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from adatom_relax import closed_form_rstar
from adatom_relax.cli import run
from adatom_relax.io import config_hash

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def test_solve_matches_closed_form():
    rep = report("equilibria", "solve", "--density", "quadratic:1", "--n", 2, "--rho", 1, "--m", 1)
    R = rep["result"]["solution"]["R"]
    assert R == pytest.approx(closed_form_rstar(1.0, 1.0, 1.0), rel=1e-8)
    assert rep["result"]["closed_form_R"] == pytest.approx(R, rel=1e-8)
    assert rep["result"]["solution"]["kind"] == "interior-minimum"


def test_envelope_half_quadratic():
    rep = report("envelope", "--density", "halfquad")
    assert rep["result"]["s0"] == pytest.approx(math.sqrt(2), abs=1e-9)
    assert rep["result"]["theta"] == pytest.approx(math.sqrt(2), abs=1e-9)


@pytest.mark.parametrize(
    "spec",
    ['{"kind": "quadratic",, }', '{"kind": "nonsense"}', "quadratic:abc", "@/no/such/file.json"],
)
def test_malformed_density_exit_2(spec):
    code, out, err = call("envelope", "--density", spec)
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


def test_json_error_reports_line_and_column():
    code, _, err = call("envelope", "--density", '{"kind": "quadratic",, }')
    assert code == 2
    assert "<string>:1:22:" in err


def test_bad_csv_reports_position(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n0,0\n1,oops\n1,1\n")
    code, _, err = call("geometry", "mass", "--polygon", p)
    assert code == 2
    assert "bad.csv:3:2:" in err


def test_numeric_error_exit_3_verbatim():
    code, out, err = call("relax", "wriggle", "--polygon", SAMPLES / "unit_square.csv", "--r", 0.5, "--k", 8)
    assert code == 3
    assert out == ""
    assert "DomainError: r must be at least 1" in err


def test_missing_file_and_bad_tolerance():
    assert call("geometry", "mass", "--polygon", "/no/such.csv")[0] == 2
    assert call("envelope", "--density", "halfquad", "--tol", "s0_rtol=-1")[0] == 2
    assert call("envelope", "--density", "halfquad", "--tol", "bogus=1")[0] == 2
    assert call("frobnicate")[0] == 2


def test_report_carries_hash_and_tolerances():
    rep = report("envelope", "--density", "halfquad", "--tol", "s0_rtol=1e-10")
    assert rep["tolerances"]["s0_rtol"] == 1e-10
    assert rep["config_hash"] == config_hash({"command": rep["command"], **rep["config"]})
    assert rep["provenance"]["s0"] == "compute_s0"


REPLAYS = [
    ["envelope", "--density", "halfquad", "--csv", "{d}/env.csv"],
    ["equilibria", "sweep", "--gamma", "0.5,1,2", "--m", "1", "--csv", "{d}/sweep.csv"],
    ["lsc", "sweep", "--density", "quadratic:1", "--samples", "2000", "--csv", "{d}/lsc.csv"],
    ["relax", "wriggle", "--polygon", str(SAMPLES / "unit_square.csv"), "--r", "1.5", "--k", "16", "--csv", "{d}/w.csv"],
    ["relax", "dirac", "--measure", str(SAMPLES / "uniform_square.json"), "--psi", "halfquad", "--k", "2,3",
     "--sweep-csv", "{d}/dirac.csv"],
]


@pytest.mark.parametrize("argv", REPLAYS, ids=lambda a: "-".join(a[:2]))
def test_replay_is_byte_identical(tmp_path, argv):
    args = [a.format(d=tmp_path) for a in argv]
    csv = Path(args[args.index(next(a for a in args if a.endswith(".csv") and str(tmp_path) in a))])
    first = call(*args)
    csv_first = csv.read_bytes()
    second = call(*args)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    assert csv.read_bytes() == csv_first


def test_svg_replay(tmp_path):
    args = ["lsc", "sawtooth", "--density", "quadratic:1", "--k", "4,8", "--out-svg", tmp_path / "s.svg"]
    report(*args)
    first = (tmp_path / "s.svg").read_bytes()
    report(*args)
    assert (tmp_path / "s.svg").read_bytes() == first


def test_report_file_and_sweep_columns(tmp_path):
    out = tmp_path / "rep.json"
    code, stdout, _ = call("relax", "recover", "--measure", SAMPLES / "circle_with_atom.json", "--psi", "halfquad",
                           "--k", "16,32", "--sweep-csv", tmp_path / "rec.csv", "--report-json", out)
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["command"] == "relax recover"
    header = (tmp_path / "rec.csv").read_text().splitlines()[0]
    assert header == "k,perimeter,energy,weakstar_distance"


def test_geometry_energy_sample():
    rep = report("geometry", "energy", "--polygon", SAMPLES / "circle_512_2s0.csv", "--psi", "halfquad")
    res = rep["result"]
    P = 2 * 512 * math.sin(math.pi / 512)
    # u = 2 sqrt(2) = 2 s0: psi(u) = 5 and the envelope gives 2 psi(s0) = 4
    assert res["energy_F"] == pytest.approx(5 * P, rel=1e-12)
    assert res["energy_Fbar"] == pytest.approx(4 * P, rel=1e-12)


def test_mincheck_command():
    rep = report("relax", "mincheck", "--density", "quadratic:1", "--samples", "20")
    assert rep["result"]["passed"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "adatom_relax", "envelope", "--density", "halfquad"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["s0"] == pytest.approx(math.sqrt(2), abs=1e-9)
    assert "done in" in proc.stderr
