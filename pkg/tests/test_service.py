from fastapi.testclient import TestClient

from wfsound.service import NetModel, app

from util import diamond

client = TestClient(app)


def _net_payload():
    return NetModel.from_net(diamond()).model_dump()


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_analyze_endpoint():
    response = client.post("/analyze", json={
        "net": _net_payload(), "property": "gen-sound"})
    assert response.status_code == 200
    body = response.json()
    assert body["outcome"] == "Sound"
    assert "stage_timings_ms" in body


def test_analyze_rejects_bad_property():
    response = client.post("/analyze", json={
        "net": _net_payload(), "property": "bogus"})
    assert response.status_code == 422


def test_analyze_rejects_invalid_net():
    payload = _net_payload()
    payload["final_place"] = None
    response = client.post("/analyze", json={
        "net": payload, "property": "gen-sound"})
    assert response.status_code == 422


def test_generate_endpoint_round_trip():
    response = client.post("/generate", json={"family": "nc", "c": 3})
    assert response.status_code == 200
    net = NetModel(**response.json()).to_net()
    assert net.initial_place == "i" and net.final_place == "f"

    response = client.post("/generate", json={
        "family": "dnf", "dnf": "x1 | !x1"})
    assert response.status_code == 200

    response = client.post("/generate", json={"family": "nc"})
    assert response.status_code == 422


def test_reduce_endpoint():
    response = client.post("/reduce", json=_net_payload())
    assert response.status_code == 200
    body = response.json()
    assert len(body["net"]["places"]) <= len(diamond().places)
    assert body["trace"]
