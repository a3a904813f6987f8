"""Service endpoints: wire formats, domain errors, and the verify tree."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from haarlab import __version__
from haarlab.ensembles import unitarity_defect
from haarlab.serialize import matrix_from_dict
from haarlab.service import app

client = TestClient(app)


def test_health():
    r = client.get("/api/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


def test_sample_returns_unitaries():
    req = {"n": 3, "count": 2, "seed": 5, "method": "qr"}
    r = client.post("/api/sample", json=req)
    assert r.status_code == 200
    body = r.json()
    assert len(body["matrices"]) == 2
    for mdl in body["matrices"]:
        u = matrix_from_dict(mdl)
        assert u.shape == (3, 3)
        assert unitarity_defect(u) <= 1e-12
    assert body["meta"]["method"] == "qr"
    # equal requests produce byte-equal responses
    assert r.content == client.post("/api/sample", json=req).content


def test_sample_truncation_and_errors():
    r = client.post("/api/sample", json={"n": 5, "m": 2, "scaled": True, "count": 3})
    assert r.status_code == 200
    blocks = [matrix_from_dict(m) for m in r.json()["matrices"]]
    assert all(b.shape == (2, 2) for b in blocks)
    assert client.post("/api/sample", json={"n": 4, "scaled": True}).status_code == 400
    assert client.post("/api/sample", json={"n": 4, "m": 4}).status_code == 400
    assert client.post("/api/sample", json={"n": 0}).status_code == 422


def test_entries_endpoint():
    r = client.post("/api/entries", json={"n": 8, "samples": 3000, "k_list": [1], "seed": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["name"] == "entries"
    assert body["reports"][0]["statistic"] == "entry_abs_moment(k=1)"
    assert body["reports"][0]["estimate"][1] == 0.0
    assert isinstance(body["passed"], bool)


def test_correlation_endpoint():
    r = client.post("/api/correlation", json={"n": 4, "samples": 5000, "seed": 2})
    assert r.status_code == 200
    stats = [rep["statistic"] for rep in r.json()["reports"]]
    assert stats == ["pearson(|U_11|^2,|U_22|^2)", "pearson(decorrelated control)"]


def test_traces_endpoint_builds_pairs():
    req = {"n_list": [4], "samples": 2000, "powers": [1, 2], "k_max": 1,
           "mixed": [{"a": [1], "b": [1]}], "seed": 3}
    r = client.post("/api/traces", json=req)
    assert r.status_code == 200
    labels = {rep["statistic"] for rep in r.json()["reports"]}
    assert labels == {"abs_trace_moment(k=1,l=1)", "abs_trace_moment(k=1,l=2)",
                      "mixed_trace_moment(a=1;b=1)"}


def test_eigenpowers_endpoint():
    ok = client.post("/api/eigenpowers", json={"n": 3, "m": 5, "samples": 2000, "seed": 4})
    assert ok.status_code == 200 and ok.json()["meta"]["hypothesis_met"]
    low = client.post("/api/eigenpowers", json={"n": 3, "m": 2, "samples": 100})
    assert low.status_code == 400
    assert "allow_low_power" in low.json()["detail"]


def test_truncate_endpoint_dispatch():
    single = client.post("/api/truncate", json={"n_list": [16], "m": 1, "samples": 3000})
    assert single.status_code == 200
    assert single.json()["name"] == "truncation"
    multi = client.post("/api/truncate",
                        json={"n_list": [16, 64], "m": 2, "samples": 2000, "seed": 5})
    assert multi.status_code == 200
    assert multi.json()["name"] == "truncation_convergence"
    assert multi.json()["meta"]["coupled_reference"] is True
    bad = client.post("/api/truncate",
                      json={"n_list": [16, 64], "m": 2, "samples": 100, "scaled": False})
    assert bad.status_code == 400
    assert client.post("/api/truncate", json={"n_list": [], "m": 1}).status_code == 422


def test_density_weyl_and_errors():
    r = client.post("/api/density", json={"kind": "weyl", "n": 2,
                                          "angles": [[0.0, 3.141592653589793]]})
    assert r.status_code == 200
    pt = r.json()["points"][0]
    assert pt["value"] == pytest.approx(2.0)
    assert pt["measure"] == "per-dz"
    assert client.post("/api/density", json={"kind": "weyl", "n": 2}).status_code == 400
    assert client.post("/api/density", json={"kind": "wigner"}).status_code == 422


def test_density_truncated_reports_constant_and_null_log():
    req = {"kind": "truncated", "n": 4, "m": 1, "points": [[[1.0, 0.0]], [[0.0, 0.0]]]}
    r = client.post("/api/density", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["meta"]["constant"] == pytest.approx(3 / np.pi)
    boundary, center = body["points"]
    assert boundary["value"] == 0.0 and boundary["log_value"] is None
    assert center["value"] == pytest.approx(3 / np.pi)


def test_density_ginibre_and_cdf():
    r = client.post("/api/density", json={"kind": "ginibre", "m": 1, "points": [[[0.0, 0.0]]]})
    assert r.json()["points"][0]["value"] == pytest.approx(1 / np.pi)
    r = client.post("/api/density", json={"kind": "entry_cdf", "n": 2, "x": [0.0, 1.0, 2.0]})
    values = [v["value"] for v in r.json()["cdf"]]
    assert values == pytest.approx([0.0, 0.5, 1.0])
    assert client.post("/api/density", json={"kind": "entry_cdf", "n": 2,
                                             "x": [3.0]}).status_code == 400


def test_formulas_endpoint():
    r = client.post("/api/formulas", json={"ns": [4], "ks": [1], "ls": [1]})
    assert r.status_code == 200
    rows = r.json()["rows"]
    kinds = {row["kind"] for row in rows}
    assert kinds == {"entry_abs_moment", "diagonal_product_leading",
                     "limit_trace_moment", "complex_normal_moment"}
    assert client.post("/api/formulas", json={"ns": [4], "ks": [-1], "ls": [1]}).status_code == 400


_CRITERIA = ["unitarity", "entry_law", "entry_moments", "correlation", "trace_clt",
             "trace_independence", "eigenvalue_powers", "truncation_density",
             "ginibre_limit", "quadrature_oracle"]

# criteria that stay decisive at the scaled-down sample budget used here;
# truncation_density needs the full N for its 1 percent integral gate
_ROBUST = set(_CRITERIA) - {"truncation_density"}


def test_verify_endpoint_structure_and_determinism():
    req = {"suite": "full", "seed": 3, "samples": 2000, "streams": 2}
    r = client.post("/api/verify", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["suite"] == "full"
    assert [c["name"] for c in body["criteria"]] == _CRITERIA
    for crit in body["criteria"]:
        assert crit["checks"], crit["name"]
        if crit["name"] in _ROBUST:
            assert crit["passed"], crit["name"]
    assert body["meta"]["samples_base"] == 2000
    assert body["meta"]["streams"] == 2
    # replay: equal request, equal bytes
    assert r.content == client.post("/api/verify", json=req).content
