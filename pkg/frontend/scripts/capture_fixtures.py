"""Capture UI test fixtures from the real service running the mock backend.

Builds the mock script first: each prompt the scripted session produces is
digested and mapped to the deterministic answer computed from its own DINE
payload. The service is then restarted on the mock backend and the full
three-question transcript, trace list, and record list are frozen as JSON
fixtures for the frontend tests.

Run from the repo root: ``python3 frontend/scripts/capture_fixtures.py``
"""

import json
import tempfile
from dataclasses import replace
from pathlib import Path

from fastapi.testclient import TestClient

from dinechat import oracle
from dinechat.config import AppConfig, ServiceConfig
from dinechat.gateway import sequence_digest
from dinechat.prompts import Message, PromptSequence
from dinechat.service import create_app

FIXTURE_DIR = Path(__file__).parent.parent / "tests" / "fixtures"

SCRIPTED_REQUESTS = [
    {
        "question": "Why did the system choose AddServer at timestep 5?",
        "trace_id": "reference-21",
        "strategy": "engineered",
        "params": {"temperature": 0, "top_p": 1, "max_token": 350},
    },
    {
        "question": "How often was the decision-making uncertain between "
                    "timesteps 0 and 20?",
        "trace_id": "reference-21",
        "strategy": "engineered",
        "params": {"temperature": 0, "top_p": 1, "max_token": 350},
    },
    {
        "question": "How many web servers were active at timestep 3?",
        "trace_id": "reference-21",
        "strategy": "zero_shot",
        "params": {"temperature": 0, "top_p": 1, "max_token": 350},
    },
]


def rebuild(stage):
    return PromptSequence(
        [Message(m["role"], m["text"]) for m in stage["messages"]],
        None, "captured")


def run_session(backend, data_dir, mock_script=None):
    service = ServiceConfig(data_dir=str(data_dir), backend=backend,
                            mock_script=str(mock_script) if mock_script else "")
    app = create_app(replace(AppConfig(), service=service))
    transcript = []
    with TestClient(app) as client:
        session = client.post("/v1/sessions").json()["session_id"]
        for request in SCRIPTED_REQUESTS:
            response = client.post(f"/v1/sessions/{session}/ask", json=request)
            response.raise_for_status()
            transcript.append({"request": request, "response": response.json()})
        traces = client.get("/v1/traces").json()
        records = client.get("/v1/traces/reference-21/records").json()
    return transcript, traces, records


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        reference, _, _ = run_session("oracle", Path(tmp) / "a")

        script = {}
        for item in reference:
            for stage in item["response"]["prompts"]:
                sequence = rebuild(stage)
                script[sequence_digest(sequence)] = \
                    [oracle.answer_sequence(sequence)]
        script_path = FIXTURE_DIR / "mock_script.json"
        script_path.write_text(json.dumps(script, indent=2) + "\n")

        transcript, traces, records = run_session(
            "mock", Path(tmp) / "b", mock_script=script_path)

    for ref_item, mock_item in zip(reference, transcript):
        assert ref_item["response"]["answers"] == \
            mock_item["response"]["answers"], "mock transcript drifted"

    (FIXTURE_DIR / "transcript.json").write_text(
        json.dumps(transcript, indent=2) + "\n")
    (FIXTURE_DIR / "traces.json").write_text(
        json.dumps(traces, indent=2) + "\n")
    (FIXTURE_DIR / "records.json").write_text(
        json.dumps(records, indent=2) + "\n")
    print(f"fixtures written to {FIXTURE_DIR}")
    for item in transcript:
        body = item["response"]
        print(f"  {item['request']['question'][:55]!r} -> "
              f"type {body['question_type']}, {len(body['prompts'])} stage(s), "
              f"answer {body['answers'][0][:45]!r}")


if __name__ == "__main__":
    main()
