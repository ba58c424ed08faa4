import pytest
from fastapi.testclient import TestClient

from main import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_solve_endpoint(client, small_problem_config):
    response = client.post("/api/v1/solve", json=small_problem_config)
    assert response.status_code == 200
    body = response.json()
    assert 0.405 <= body["ground_state"]["lambda_squared"] <= 0.495
    assert "lambda" in body["ground_state"]
    assert len(body["u"]) == 96
    assert body["admissibility"]["cond_q_ok"]


def test_check_endpoint(client, small_problem_config):
    small_problem_config["p"]["height"]["value"] = 0.4
    response = client.post("/api/v1/check", json=small_problem_config)
    assert response.status_code == 200
    body = response.json()
    assert not body["ok"]
    assert not body["admissibility"]["cond_p_ok"]
    assert body["confined_measure"] > 0


def test_optimize_endpoint(client, small_problem_config):
    small_problem_config["optimize"] = {"start": "schwarz"}
    response = client.post("/api/v1/optimize", json=small_problem_config)
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["converged"]
    assert body["report"]["iterations"] == 1
    assert len(body["q_final"]) == 96


def test_invalid_config_is_unprocessable(client, small_problem_config):
    small_problem_config["q"]["height"]["unit"] = "parsec"
    assert client.post("/api/v1/solve", json=small_problem_config).status_code == 422
    assert client.post("/api/v1/solve", json={"mesh": {"kind": "hexagon"}}).status_code == 422


def test_custom_start_is_cli_only(client, small_problem_config):
    small_problem_config["optimize"] = {"start": "csv:/tmp/run"}
    assert client.post("/api/v1/optimize", json=small_problem_config).status_code == 422


def test_solver_failure_is_a_server_error(client, small_problem_config):
    small_problem_config["solver"] = {"max_outer": 1}
    assert client.post("/api/v1/solve", json=small_problem_config).status_code == 500
