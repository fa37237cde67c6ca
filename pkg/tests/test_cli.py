import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import jsonschema
import pytest

from bubblediamond.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_graph(capsys, schema):
    code, out, _ = run(capsys, "graph", "--b", "2", "--level", "2", "--edges")
    data = json.loads(out)
    jsonschema.validate(data, schema("graph"))
    assert code == 0 and data["vertex_count"] == 12 and data["total_multiplicity"] == 16
    _, out, _ = run(capsys, "graph", "--b", "2", "--level", "0")
    assert json.loads(out)["vertex_count"] == 2


@pytest.mark.parametrize("argv", [
    ["graph", "--b", "1", "--level", "2"],
    ["graph", "--b", "2", "--level", "-1"],
    ["spectrum", "--b", "2", "--level", "1", "--flavor", "robin"],
    ["spectrum", "--b", "2", "--level", "0", "--flavor", "dirichlet"],
    ["gaps", "--b", "2", "--scale", "0"],
    ["verify", "--perturb", "nonsense"],
    ["nosuchcommand"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_spectrum(capsys, schema):
    _, out, _ = run(capsys, "spectrum", "--b", "2", "--level", "1", "--flavor", "dirichlet")
    data = json.loads(out)
    jsonschema.validate(data, schema("spectrum"))
    assert [e["value"] for e in data["entries"]] == pytest.approx([1 / 3, 5 / 3])
    code, out, _ = run(capsys, "spectrum", "--b", "3", "--level", "2", "--method", "both")
    data = json.loads(out)
    jsonschema.validate(data, schema("spectrum"))
    assert code == 0 and data["passed"] and data["hausdorff_distance"] < 1e-8
    _, out, _ = run(capsys, "spectrum", "--b", "2", "--level", "2", "--flavor", "dirichlet", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sum(int(r["multiplicity"]) for r in rows) == 10


def test_ids_csv_round_trip(capsys):
    _, out, _ = run(capsys, "ids", "--b", "4", "--level", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 242
    xs = [float(r["x"]) for r in rows]
    exact = [Fraction(r["N_exact"]) for r in rows]
    assert xs == sorted(xs) and exact == sorted(exact) and exact[-1] == 1
    assert all(float(r["N"]) == float(e) for r, e in zip(rows, exact))
    assert all(format(x, ".17g") == r["x"] for x, r in zip(xs, rows))


def test_ids_json(capsys, schema):
    _, out, _ = run(capsys, "ids", "--b", "2", "--level", "3", "--measure", "limit", "--format", "json")
    data = json.loads(out)
    jsonschema.validate(data, schema("ids"))
    assert data["steps"][-1]["N"] == {"num": 1, "den": 1}


def test_gaps(capsys, schema):
    _, out, _ = run(capsys, "gaps", "--b", "2", "--scale", "1")
    data = json.loads(out)
    jsonschema.validate(data, schema("gaps"))
    assert [(g["label_numerator"], g["label_denominator"]) for g in data["gaps"]] == [(3, 8), (5, 8)]
    _, out, _ = run(capsys, "gaps", "--b", "2", "--scale", "2")
    gs = json.loads(out)["gaps"]
    assert len(gs) == 6
    assert all(a["interval"][1] < c["interval"][0] for a, c in zip(gs, gs[1:]))
    labels = [Fraction(g["label_numerator"], g["label_denominator"]) for g in gs]
    assert labels == sorted(set(labels))


def test_compact(capsys, schema):
    _, out, _ = run(capsys, "compact", "--b", "2", "--depth", "3", "--scale", "2")
    data = json.loads(out)
    jsonschema.validate(data, schema("compact"))
    values = [e["value"] for e in data["eigenvalues"]]
    assert values[0] == 0.0 and values[1] == pytest.approx(2 * data["T_at_2"])
    assert data["multiplier"] == {"num": 10, "den": 1}
    assert all(abs(g["ratio"] - g["min_ratio"]) < 1e-8 for g in data["gaps"])


def test_verify_default(capsys, schema):
    code, out, _ = run(capsys, "verify", "--b", "2", "--level", "2")
    data = json.loads(out)
    jsonschema.validate(data, schema("verify"))
    assert code == 0 and data["passed"]


def test_verify_detects_perturbation(capsys):
    code, out, _ = run(capsys, "verify", "--b", "2", "--level", "2", "--perturb", "2:1/1000")
    failed = {c["name"] for c in json.loads(out)["checks"] if c["status"] == "fail"}
    assert code == 2
    assert {"schur-identity", "oracle-neumann"} <= failed


def test_verify_oracle_cap(capsys):
    code, out, err = run(capsys, "verify", "--b", "6", "--level", "5", "--oracle")
    assert code == 0 and "warning" in err
    assert any(c["status"] == "skipped" for c in json.loads(out)["checks"])


def test_output_file_and_determinism(capsys, tmp_path):
    path = tmp_path / "g.json"
    assert main(["gaps", "--b", "3", "--scale", "3", "--output", str(path)]) == 0
    first = path.read_bytes()
    assert main(["gaps", "--b", "3", "--scale", "3", "--output", str(path)]) == 0
    assert path.read_bytes() == first
    _, a, _ = run(capsys, "compact", "--b", "3", "--depth", "2")
    _, c, _ = run(capsys, "compact", "--b", "3", "--depth", "2")
    assert a == c


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bubblediamond.cli", "gaps", "--b", "2", "--scale", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["scale"] == 1
