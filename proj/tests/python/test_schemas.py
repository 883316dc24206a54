import csv
import json
import math
import os
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import vdlab

ROOT = Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "docs" / "schemas"
CONFIG_DIR = Path(os.environ.get("VDLAB_CONFIG_DIR", ROOT / "configs"))


def expected_columns(schema, probes):
    out = []
    for col in schema["columns"]:
        if "repeat" in col:
            out += [col["name"].format(k=k + 1) for k in range(probes)]
        else:
            out.append(col["name"])
    return out


def parse_cell(text, kind):
    if kind == "integer":
        return int(text)
    if kind == "float":
        return float(text)
    return text


@pytest.fixture(scope="module")
def all_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("all")
    code, log = vdlab.run(str(CONFIG_DIR / "default.cfg"), str(out), ["run.experiment=all", "physics.lambda0=0"])
    return out, code, log


def test_report_matches_schema(all_run):
    out, code, _ = all_run
    assert code == 0
    schema = json.loads((SCHEMAS / "report.schema.json").read_text())
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert report["manifest"]["experiment"] == "all"
    assert [t["experiment"] for t in report["tables"]] == sorted(vdlab.experiments())
    for name in vdlab.experiments():
        jsonschema.validate(json.loads((out / name / "report.json").read_text()), schema)


def test_every_table_matches_its_csv_schema(all_run):
    out, _, _ = all_run
    schema = json.loads((SCHEMAS / "csv-schemas.json").read_text())["tables"]
    report = json.loads((out / "report.json").read_text())
    probes = len(dict(report["manifest"]["config"].items())["physics.probes"].split(","))
    seen = set()
    for entry in report["tables"]:
        name = Path(entry["file"]).name
        seen.add(name)
        table = schema[name]
        assert table["experiment"] == entry["experiment"]
        with open(out / entry["file"], newline="") as f:
            rows = list(csv.reader(f))
        header, body = rows[0], rows[1:]
        assert header == expected_columns(table, probes) == entry["columns"]
        assert len(body) == entry["rows"] > 0
        kinds = []
        for col in table["columns"]:
            kinds += [col] * (probes if "repeat" in col else 1)
        for row in body:
            assert len(row) == len(header)
            for text, col in zip(row, kinds):
                value = parse_cell(text, col["type"])
                if "values" in col:
                    assert value in col["values"]
                if col["type"] == "float" and math.isfinite(value):
                    assert "%.17g" % value == text
    assert seen == set(schema)


def test_missing_column_is_detectable(all_run):
    out, _, _ = all_run
    schema = json.loads((SCHEMAS / "csv-schemas.json").read_text())["tables"]["dispersion.csv"]
    header = (out / "dispersion-scan" / "dispersion.csv").read_text().splitlines()[0].split(",")
    assert header == expected_columns(schema, 0)
    assert header[:-1] != expected_columns(schema, 0)


def test_convergence_slope_is_second_order(all_run):
    out, _, _ = all_run
    with open(out / "convergence-suite" / "convergence.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    groups = {}
    for r in rows:
        groups.setdefault((r["quantity"], r["seed"]), []).append((float(r["h"]), float(r["residual"])))
    assert groups
    for pts in groups.values():
        pts.sort(reverse=True)
        h, e = np.log([p[0] for p in pts[1:]]), np.log([p[1] for p in pts[1:]])
        slope = np.polyfit(h, e, 1)[0]
        assert 1.9 <= slope <= 2.1


def test_zero_coupling_neutrino_rows_are_flat(all_run):
    out, _, _ = all_run
    with open(out / "neutrino-limit" / "neutrino.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert rows[-1]["kind"] == "extrapolated"
    assert float(rows[-1]["m"]) == 0.0
    for r in rows:
        assert all(float(v) == 0.0 for k, v in r.items() if k.startswith("M_probe"))


def test_dispersion_rest_point(all_run):
    out, _, _ = all_run
    with open(out / "dispersion-scan" / "dispersion.csv", newline="") as f:
        rows = [r for r in csv.DictReader(f) if float(r["m"]) == 0.0 and float(r["M"]) > 0.0]
    assert rows
    mu = float(rows[0]["M"])
    for r in rows:
        assert float(r["E_closed"]) == pytest.approx(math.hypot(float(r["k"]), mu), rel=1e-15)
        assert float(r["E_closed"]) >= mu
