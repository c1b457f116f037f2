from roughlab.services import registry

MINIMAL = """\
ideal density
sequence {
  piece full { atom 0 prob 1 - 1/n atom 1 prob 1/n }
}
target { atom 0 prob 1 }
query metric at 2
query limit r 0
"""


def test_health(client):
    res = client.get("/health")
    assert res.status_code == 200
    body = res.json()
    assert body["success"] is True
    assert body["data"]["status"] == "ok"


def test_metric_of_distance_law(client):
    res = client.post("/metric", json={"law": "{ atom 0 prob 1/2 atom 3 prob 1/2 }"})
    assert res.status_code == 200
    assert res.json()["data"]["rho"] == "1/2"


def test_metric_of_two_laws(client):
    res = client.post("/metric", json={"x": "{ atom 0 prob 1 }", "y": "{ atom 1 prob 1 }"})
    assert res.json()["data"]["rho"] == "1"
    law = "{ atom 0 prob 1/2 atom 5 prob 1/2 }"
    res = client.post("/metric", json={"x": law, "y": law, "coupling": "diagonal"})
    assert res.json()["data"]["rho"] == "0"


def test_diagonal_needs_identical_laws(client):
    res = client.post("/metric", json={"x": "{ atom 0 prob 1 }", "y": "{ atom 1 prob 1 }", "coupling": "diagonal"})
    assert res.status_code == 422
    body = res.json()
    assert body["success"] is False
    assert body["data"]["code"] == "invalid_coupling"


def test_metric_needs_one_form(client):
    res = client.post("/metric", json={})
    assert res.status_code == 422
    assert res.json()["success"] is False


def test_density(client):
    res = client.post("/sets/density", json={"set": "ap(2,1)"})
    assert res.status_code == 200
    assert res.json()["data"] == {"set": "ap(2,1)", "kind": "exact", "value": "1/2"}


def test_ideal_member(client):
    res = client.post("/sets/ideal-member", json={"ideal": "summable", "set": "powers(2)"})
    data = res.json()["data"]
    assert data["answer"] == "in"
    assert data["certificate"]["rule"] == "convergent_tail"
    res = client.post("/sets/ideal-member", json={"ideal": "fin", "set": "ap(2,1)"})
    assert res.json()["data"]["answer"] == "not_in"


def test_run(client):
    res = client.post("/run", json={"spec": MINIMAL})
    assert res.status_code == 200
    body = res.json()
    assert body["message"] == "2 queries run."
    metric, limit = body["data"]["results"]
    assert metric["result"]["rho"] == "1/2"
    assert limit["result"]["answer"] == "yes"


def test_run_syntax_error(client):
    res = client.post("/run", json={"spec": "ideal density\nsequence {\n  piece ap(2 1) { atom 0 prob 1 }\n}\n"})
    assert res.status_code == 400
    body = res.json()
    assert body["data"]["code"] == "syntax_error"
    assert body["message"].startswith("3:14:")


def test_run_semantic_error(client):
    res = client.post("/run", json={"spec": MINIMAL.replace("prob 1/n }", "prob 1/(2*n) }")})
    assert res.status_code == 422
    assert res.json()["data"]["code"] == "semantic_error"


def test_oversized_payload(client):
    res = client.post("/run", json={"spec": "#" * 300_000})
    assert res.status_code == 413
    assert res.json()["success"] is False


def test_reproduce_one(client):
    res = client.get("/reproduce/quarter-mass")
    assert res.status_code == 200
    data = res.json()["data"]
    assert data["passed"] is True
    assert {row["id"] for row in data["rows"]} == {"quarter-mass"}
    assert all("pass" in row for row in data["rows"])


def test_reproduce_all(client):
    data = client.get("/reproduce").json()["data"]
    assert data["passed"] is True
    assert {row["id"] for row in data["rows"]} == set(registry.entry_ids())


def test_unknown_registry_id(client):
    res = client.get("/reproduce/nope")
    assert res.status_code == 404
    assert res.json()["data"]["code"] == "unknown_registry_id"
