"""HTTP service exposing traces, the explanation pipeline, and experiments.

State lives under a data directory (``traces/``, ``sessions/``,
``experiments/``); the bundled 21-step reference trace is seeded into a fresh
directory so the service is usable immediately. Every ask response echoes the
exact prompt sequences that were sent, for auditability.
"""

import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__, assets, schemas
from .config import AppConfig
from .dines import encode_dines, slice_trace
from .errors import (BudgetError, ChainOfThoughtError, ConfigurationError,
                     NotFoundError, OutOfRangeError, RateLimitedError)
from .experiment import (ExperimentConfig, report_to_dict, run_experiment)
from .explain import answer_question
from .gateway import ChatGateway, CompletionParams, make_backend, make_gateway
from .grading import GroundTruthOracle, QuestionBankEntry, grade
from .questions import QuestionSpec
from .tracestore import TraceStore


class SessionStore:
    """Append-only per-session JSONL records."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def create(self):
        session_id = uuid.uuid4().hex
        (self.root / f"{session_id}.jsonl").touch()
        return session_id

    def exists(self, session_id):
        return (self.root / f"{session_id}.jsonl").exists()

    def append(self, session_id, request, response):
        line = json.dumps({"request": request, "response": response})
        with self._lock:
            with open(self.root / f"{session_id}.jsonl", "a") as fh:
                fh.write(line + "\n")

    def entries(self, session_id):
        path = self.root / f"{session_id}.jsonl"
        if not path.exists():
            raise NotFoundError(f"session not found: {session_id!r}")
        return [json.loads(line) for line in path.read_text().splitlines()
                if line.strip()]


class ExperimentRegistry:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._running = {}

    def start(self, experiment_id):
        with self._lock:
            self._running[experiment_id] = "running"
        (self.root / experiment_id).mkdir(parents=True, exist_ok=True)

    def finish(self, experiment_id, report_dict):
        path = self.root / experiment_id / "report.json"
        path.write_text(json.dumps(report_dict, indent=2))
        with self._lock:
            self._running[experiment_id] = "complete"

    def fail(self, experiment_id, error):
        path = self.root / experiment_id / "error.txt"
        path.write_text(str(error))
        with self._lock:
            self._running[experiment_id] = "failed"

    def status(self, experiment_id):
        with self._lock:
            if experiment_id in self._running:
                return self._running[experiment_id]
        if (self.root / experiment_id / "report.json").exists():
            return "complete"
        if (self.root / experiment_id).exists():
            return "failed" if (self.root / experiment_id / "error.txt").exists() \
                else "running"
        return None

    def report(self, experiment_id):
        path = self.root / experiment_id / "report.json"
        return json.loads(path.read_text())

    def exp_dir(self, experiment_id):
        return self.root / experiment_id


def _seed_reference_trace(store):
    if not store.exists(assets.REFERENCE_TRACE_ID):
        store.store(assets.load_reference_trace())


def create_app(config=None, backend=None, clock=None):
    config = config or AppConfig()
    data_dir = Path(config.service.data_dir)
    traces = TraceStore(data_dir / "traces")
    _seed_reference_trace(traces)
    sessions = SessionStore(data_dir / "sessions")
    experiments = ExperimentRegistry(data_dir / "experiments")
    if backend is None:
        backend = make_backend(config.service.backend, config=config.gateway,
                               mock_script=config.service.mock_script or None)
    gateway = ChatGateway(backend, clock=clock, config=config.gateway)
    description = assets.load_default_description()
    bank = assets.load_default_bank()

    app = FastAPI(title="dinechat", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    app.state.gateway = gateway
    app.state.traces = traces

    @app.get("/healthz", response_model=schemas.HealthInfo)
    def healthz():
        return schemas.HealthInfo(status="ok", version=__version__)

    @app.post("/v1/sessions", response_model=schemas.SessionCreated, status_code=201)
    def create_session():
        return schemas.SessionCreated(session_id=sessions.create())

    @app.get("/v1/sessions/{session_id}", response_model=schemas.SessionView)
    def session_view(session_id: str):
        try:
            entries = sessions.entries(session_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return schemas.SessionView(session_id=session_id, entries=entries)

    @app.post("/v1/sessions/{session_id}/ask", response_model=schemas.AskResponse)
    def ask(session_id: str, request: schemas.AskRequest):
        if not sessions.exists(session_id):
            raise HTTPException(status_code=404,
                                detail=f"session not found: {session_id!r}")
        try:
            trace = traces.load(request.trace_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        overrides = request.params or schemas.CompletionOverrides()
        params = CompletionParams(
            n=overrides.n, max_token=overrides.max_token,
            temperature=overrides.temperature, top_p=overrides.top_p,
            model=overrides.model)
        question = QuestionSpec(text=request.question, form=request.form,
                                options=tuple(request.options))
        try:
            outcome = answer_question(
                question, trace, gateway, description, params=params,
                strategy=request.strategy, extractor=request.extractor,
                block=False)
        except RateLimitedError as exc:
            return JSONResponse(
                status_code=429,
                headers={"Retry-After": f"{exc.wait_seconds:.3f}"},
                content={"detail": str(exc),
                         "retry_after_seconds": exc.wait_seconds})
        except BudgetError as exc:
            return JSONResponse(
                status_code=422,
                content={"detail": str(exc),
                         "estimated_prompt_tokens": exc.estimated,
                         "reply_budget": exc.reply_budget,
                         "request_token_limit": exc.limit})
        except OutOfRangeError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (ChainOfThoughtError, ConfigurationError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

        grading = None
        if request.ground_truth is not None or request.correct_option:
            entry = QuestionBankEntry(
                id="adhoc", text=request.question, form=request.form,
                style="what/which", question_type=outcome.question_type,
                truth=request.ground_truth.to_spec() if request.ground_truth else {},
                options=tuple(request.options),
                correct=request.correct_option or "")
            oracle = GroundTruthOracle(trace)
            marks, rationales = [], []
            for answer in outcome.answers:
                mark, rationale = grade(answer, entry, oracle)
                marks.append(mark)
                rationales.append(rationale)
            grading = schemas.GradingInfo(grades=marks, rationales=rationales)

        response = schemas.AskResponse(
            answers=outcome.answers,
            question_type=outcome.question_type,
            timesteps_used=list(outcome.timesteps),
            defaulted=outcome.defaulted,
            prompts=[
                schemas.PromptStage(
                    stage=i + 1,
                    messages=[schemas.PromptMessage(role=m.role, text=m.text)
                              for m in seq.messages])
                for i, seq in enumerate(outcome.prompts)
            ],
            usage=schemas.UsageInfo(
                prompt_tokens=outcome.usage.prompt_tokens,
                completion_tokens=outcome.usage.completion_tokens),
            grading=grading,
        )
        sessions.append(session_id, request.model_dump(mode="json"),
                        response.model_dump(mode="json"))
        return response

    @app.get("/v1/traces", response_model=list[schemas.TraceSummary])
    def list_traces():
        out = []
        for trace_id in traces.list_ids():
            trace = traces.load(trace_id)
            out.append(schemas.TraceSummary(
                trace_id=trace_id,
                timesteps=len(trace),
                description=trace.description,
                uncertain_timesteps=[r.timestep for r in trace.records
                                     if r.uncertain],
            ))
        return out

    @app.get("/v1/traces/{trace_id}/dines")
    def trace_dines(trace_id: str,
                    from_: int = Query(default=None, alias="from"),
                    to: int = Query(default=None)):
        try:
            trace = traces.load(trace_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        lo, hi = trace.timestep_range()
        lo = from_ if from_ is not None else lo
        hi = to if to is not None else hi
        try:
            records = slice_trace(trace, range(lo, hi + 1))
        except OutOfRangeError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        encoded = encode_dines(records)
        return Response(content=encoded, media_type="application/json")

    @app.get("/v1/traces/{trace_id}/records")
    def trace_records(trace_id: str):
        try:
            trace = traces.load(trace_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return [r.to_dict() for r in trace.records]

    @app.post("/v1/experiments", response_model=schemas.ExperimentCreated,
              status_code=202)
    def start_experiment(request: schemas.ExperimentRequest):
        try:
            trace = traces.load(request.trace_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        try:
            exp_config = ExperimentConfig(
                temperatures=tuple(request.temperatures),
                top_p_clusters=tuple(request.top_p_clusters),
                repetitions=request.repetitions,
                max_token=request.max_token)
            exp_gateway = make_gateway(request.backend, config=config.gateway,
                                       mock_script=config.service.mock_script
                                       or None)
        except ConfigurationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        experiment_id = uuid.uuid4().hex
        experiments.start(experiment_id)

        def run():
            try:
                report = run_experiment(
                    exp_config, trace, bank, exp_gateway, description,
                    exp_dir=experiments.exp_dir(experiment_id))
                experiments.finish(experiment_id, report_to_dict(report))
            except Exception as exc:   # surfaced through the status endpoint
                experiments.fail(experiment_id, exc)

        threading.Thread(target=run, daemon=True).start()
        return schemas.ExperimentCreated(experiment_id=experiment_id,
                                         status="running")

    @app.get("/v1/experiments/{experiment_id}/report")
    def experiment_report(experiment_id: str):
        status = experiments.status(experiment_id)
        if status is None:
            raise HTTPException(status_code=404,
                                detail=f"experiment not found: {experiment_id!r}")
        if status == "running":
            return JSONResponse(status_code=409,
                                content={"detail": "experiment still running"})
        if status == "failed":
            raise HTTPException(status_code=500, detail="experiment failed")
        return experiments.report(experiment_id)

    return app
