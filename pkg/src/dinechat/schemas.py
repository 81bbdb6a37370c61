"""Pydantic request/response models of the HTTP service."""

from typing import Optional

from pydantic import BaseModel, Field


class CompletionOverrides(BaseModel):
    n: int = Field(default=1, ge=1)
    max_token: int = Field(default=350, ge=1)
    temperature: float = Field(default=0.0, ge=0.0, le=2.0)
    top_p: float = Field(default=1.0, gt=0.0, le=1.0)
    model: str = "gpt-3.5-turbo"


class GroundTruthSpec(BaseModel):
    kind: str
    timestep: Optional[int] = None
    action: Optional[str] = None
    from_: Optional[int] = Field(default=None, alias="from")
    to: Optional[int] = None

    model_config = {"populate_by_name": True}

    def to_spec(self):
        spec = {"kind": self.kind}
        if self.timestep is not None:
            spec["timestep"] = self.timestep
        if self.action is not None:
            spec["action"] = self.action
        if self.from_ is not None:
            spec["from"] = self.from_
        if self.to is not None:
            spec["to"] = self.to
        return spec


class AskRequest(BaseModel):
    question: str
    trace_id: str
    form: str = "open"
    options: list[str] = Field(default_factory=list)
    params: Optional[CompletionOverrides] = None
    strategy: str = "engineered"
    extractor: str = "deterministic"
    ground_truth: Optional[GroundTruthSpec] = None
    correct_option: Optional[str] = None


class PromptMessage(BaseModel):
    role: str
    text: str


class PromptStage(BaseModel):
    stage: int
    messages: list[PromptMessage]


class UsageInfo(BaseModel):
    prompt_tokens: int
    completion_tokens: int


class GradingInfo(BaseModel):
    grades: list[int]
    rationales: list[str]


class AskResponse(BaseModel):
    answers: list[str]
    question_type: str
    timesteps_used: list[int]
    defaulted: bool
    prompts: list[PromptStage]
    usage: UsageInfo
    grading: Optional[GradingInfo] = None


class SessionCreated(BaseModel):
    session_id: str


class SessionEntry(BaseModel):
    request: AskRequest
    response: AskResponse


class SessionView(BaseModel):
    session_id: str
    entries: list[SessionEntry]


class TraceSummary(BaseModel):
    trace_id: str
    timesteps: int
    description: str
    uncertain_timesteps: list[int]


class ExperimentRequest(BaseModel):
    backend: str = "oracle"
    trace_id: str = "reference-21"
    repetitions: int = 54
    max_token: int = 350
    temperatures: list[float] = Field(default_factory=lambda: [0.0, 0.2, 0.5, 1.0])
    top_p_clusters: list[float] = Field(default_factory=lambda: [1.0, 0.8, 0.5])


class ExperimentCreated(BaseModel):
    experiment_id: str
    status: str


class HealthInfo(BaseModel):
    status: str
    version: str
