import json
import time
from dataclasses import replace

import pytest
from fastapi.testclient import TestClient

from dinechat.config import AppConfig, ServiceConfig
from dinechat.explain import answer_question
from dinechat.gateway import CompletionParams, SimulatedClock
from dinechat.questions import QuestionSpec
from dinechat.service import create_app


@pytest.fixture
def client(tmp_path):
    config = replace(AppConfig(),
                     service=ServiceConfig(data_dir=str(tmp_path),
                                           backend="oracle"))
    app = create_app(config, clock=SimulatedClock())
    with TestClient(app) as c:
        yield c


def make_session(client):
    response = client.post("/v1/sessions")
    assert response.status_code == 201
    return response.json()["session_id"]


def test_healthz_reports_version(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"
    assert response.json()["version"]


def test_ask_routes_single_timestep_question_to_type_a(client):
    session = make_session(client)
    response = client.post(f"/v1/sessions/{session}/ask", json={
        "question": "Which adaptation action did the system choose at "
                    "timestep 5?",
        "trace_id": "reference-21",
    })
    assert response.status_code == 200
    body = response.json()
    assert body["question_type"] == "A"
    assert body["timesteps_used"] == [5]
    assert "AddServer" in body["answers"][0]
    assert body["usage"]["prompt_tokens"] > 0


def test_ask_unknown_trace_is_404(client):
    session = make_session(client)
    response = client.post(f"/v1/sessions/{session}/ask", json={
        "question": "Why?", "trace_id": "nope"})
    assert response.status_code == 404


def test_ask_unknown_session_is_404(client):
    response = client.post("/v1/sessions/deadbeef/ask", json={
        "question": "Why?", "trace_id": "reference-21"})
    assert response.status_code == 404


def test_ask_budget_rejection_carries_token_math(client):
    session = make_session(client)
    response = client.post(f"/v1/sessions/{session}/ask", json={
        "question": "Why was a server added at timestep 5?",
        "trace_id": "reference-21",
        "params": {"max_token": 4090},
    })
    assert response.status_code == 422
    body = response.json()
    assert body["reply_budget"] == 4090
    assert body["request_token_limit"] == 4096
    assert body["estimated_prompt_tokens"] > 0


def test_ask_exhausted_budget_is_429_with_retry_after(tmp_path):
    # a small per-minute cap on a non-advancing clock exhausts quickly
    config = replace(
        AppConfig(),
        service=ServiceConfig(data_dir=str(tmp_path), backend="oracle"),
        gateway=replace(AppConfig().gateway, tokens_per_minute=2000))
    with TestClient(create_app(config, clock=SimulatedClock())) as client:
        session = make_session(client)
        status = None
        for _ in range(10):
            response = client.post(f"/v1/sessions/{session}/ask", json={
                "question": "Which adaptation action did the system choose "
                            "at timestep 5?",
                "trace_id": "reference-21",
            })
            status = response.status_code
            if status == 429:
                break
        assert status == 429
        assert float(response.headers["Retry-After"]) > 0
        assert response.json()["retry_after_seconds"] > 0


def test_ask_echoes_prompts_that_rerender_byte_identically(client, description,
                                                           reference_trace,
                                                           oracle_gateway):
    session = make_session(client)
    request = {
        "question": "Why did the system choose AddServer at timestep 5?",
        "trace_id": "reference-21",
        "strategy": "engineered",
    }
    response = client.post(f"/v1/sessions/{session}/ask", json=request)
    echoed = response.json()["prompts"]

    outcome = answer_question(
        QuestionSpec(text=request["question"]), reference_trace,
        oracle_gateway, description, params=CompletionParams(),
        strategy="engineered")
    rebuilt = [
        {"stage": i + 1,
         "messages": [{"role": m.role, "text": m.text} for m in seq.messages]}
        for i, seq in enumerate(outcome.prompts)
    ]
    assert echoed == rebuilt


def test_ask_with_ground_truth_grades_answers(client):
    session = make_session(client)
    response = client.post(f"/v1/sessions/{session}/ask", json={
        "question": "Which adaptation action did the system choose at "
                    "timestep 5?",
        "trace_id": "reference-21",
        "ground_truth": {"kind": "chosen_action", "timestep": 5},
    })
    grading = response.json()["grading"]
    assert grading["grades"] == [1]


def test_session_records_are_appended(client):
    session = make_session(client)
    for question in ("Why at timestep 5?", "Why at timestep 9?"):
        client.post(f"/v1/sessions/{session}/ask", json={
            "question": question, "trace_id": "reference-21"})
    view = client.get(f"/v1/sessions/{session}").json()
    assert len(view["entries"]) == 2
    assert view["entries"][0]["request"]["question"] == "Why at timestep 5?"


def test_traces_listing_includes_reference(client):
    traces = client.get("/v1/traces").json()
    ids = [t["trace_id"] for t in traces]
    assert "reference-21" in ids
    entry = traces[ids.index("reference-21")]
    assert entry["timesteps"] == 21
    assert len(entry["uncertain_timesteps"]) == 15


def test_dines_slice_endpoint(client):
    response = client.get("/v1/traces/reference-21/dines?from=0&to=20")
    assert response.status_code == 200
    records = json.loads(response.text)
    assert len(records) == 21
    assert all("relative_reward_channel_dominance" in r for r in records)
    assert client.get("/v1/traces/reference-21/dines?from=50&to=60") \
        .status_code == 422
    assert client.get("/v1/traces/missing/dines").status_code == 404


def test_experiment_endpoint_runs_async(client):
    created = client.post("/v1/experiments", json={
        "backend": "oracle", "repetitions": 6})
    assert created.status_code == 202
    experiment_id = created.json()["experiment_id"]
    deadline = time.time() + 60
    while time.time() < deadline:
        response = client.get(f"/v1/experiments/{experiment_id}/report")
        if response.status_code != 409:
            break
        time.sleep(0.05)
    assert response.status_code == 200
    cells = response.json()["cells"]
    assert len(cells) == 16
    assert all(c["mean_fidelity"] == 1.0 for c in cells.values())
    assert client.get("/v1/experiments/nope/report").status_code == 404


def test_restart_keeps_persisted_sessions_and_traces(tmp_path):
    config = replace(AppConfig(),
                     service=ServiceConfig(data_dir=str(tmp_path),
                                           backend="oracle"))
    with TestClient(create_app(config, clock=SimulatedClock())) as client:
        session = make_session(client)
        client.post(f"/v1/sessions/{session}/ask", json={
            "question": "Why at timestep 5?", "trace_id": "reference-21"})
    with TestClient(create_app(config, clock=SimulatedClock())) as client:
        view = client.get(f"/v1/sessions/{session}")
        assert view.status_code == 200
        assert len(view.json()["entries"]) == 1
        assert "reference-21" in [t["trace_id"]
                                  for t in client.get("/v1/traces").json()]
