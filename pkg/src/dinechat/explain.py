"""End-to-end question answering: classify, select DINEs, prompt, complete.

Open trajectory questions under the engineered strategy run the two-stage
path: stage one retrieves the relevant timesteps, and its parsed reply is
injected into stage two. An unparseable stage-1 reply is retried once before
failing with both raw replies.
"""

from dataclasses import dataclass, field

from .errors import BudgetError, ChainOfThoughtError, ConfigurationError
from .gateway import CompletionParams, Usage
from .prompts import build_chain_of_thought, build_engineered, build_zero_shot
from .questions import classify, parse_timestep_list, select_dines
from .tokens import REQUEST_TOKEN_LIMIT, estimate_tokens

# headroom for the fixed template text around the DINE payload
TEMPLATE_MARGIN_TOKENS = 120


@dataclass
class AskOutcome:
    answers: list
    question_type: str
    timesteps: tuple
    defaulted: bool
    prompts: list                # one PromptSequence per stage, in order
    usage: Usage
    selection: object = None
    stage1_timesteps: list = field(default_factory=list)


def dine_token_budget(description, question, params,
                      limit=REQUEST_TOKEN_LIMIT):
    """Tokens left for the DINE payload after templates and the reply."""
    fixed = estimate_tokens(description.text) + estimate_tokens(question.text)
    budget = limit - params.max_token - fixed - TEMPLATE_MARGIN_TOKENS
    if budget < 1:
        raise BudgetError(
            f"description and question ({fixed} tokens) plus reply budget "
            f"({params.max_token}) leave no room for DINEs within the "
            f"{limit}-token request limit",
            estimated=fixed, reply_budget=params.max_token, limit=limit)
    return budget


def answer_question(question, trace, gateway, description, params=None,
                    strategy="engineered", extractor="deterministic",
                    block=True):
    """Run the full explanation pipeline for one question."""
    if strategy not in ("engineered", "zero_shot"):
        raise ConfigurationError(f"unknown strategy: {strategy!r}")
    params = params or CompletionParams()
    analysis = classify(question, trace, extractor=extractor,
                        gateway=gateway if extractor == "llm" else None,
                        params=params)
    budget = dine_token_budget(description, question, params)
    selection = select_dines(analysis, trace, budget)

    two_stage = (strategy == "engineered" and analysis.question_type == "B"
                 and question.form == "open")
    usage = Usage()
    prompts = []
    stage1_timesteps = []

    if two_stage:
        stage1, stage2_template = build_chain_of_thought(
            description, analysis, selection.encoded, question,
            reply_budget=params.max_token)
        prompts.append(stage1)
        stage1_params = CompletionParams(
            n=1, max_token=params.max_token, temperature=params.temperature,
            top_p=params.top_p, model=params.model)
        raw_replies = []
        parsed = None
        for _ in range(2):
            result = gateway.chat_complete(stage1, stage1_params, block=block)
            usage.prompt_tokens += result.usage.prompt_tokens
            usage.completion_tokens += result.usage.completion_tokens
            raw_replies.append(result.responses[0])
            parsed = parse_timestep_list(result.responses[0])
            if parsed is not None:
                break
        if parsed is None:
            raise ChainOfThoughtError(
                f"stage-1 reply is not a timestep list after retry: "
                f"{raw_replies!r}")
        stage1_timesteps = parsed
        sequence = stage2_template.render(parsed)
        prompts.append(sequence)
    elif strategy == "engineered":
        sequence = build_engineered(description, analysis, selection.encoded,
                                    question, reply_budget=params.max_token)
        prompts.append(sequence)
    else:
        sequence = build_zero_shot(description, selection.encoded, question,
                                   reply_budget=params.max_token,
                                   question_type=analysis.question_type)
        prompts.append(sequence)

    result = gateway.chat_complete(sequence, params, block=block)
    usage.prompt_tokens += result.usage.prompt_tokens
    usage.completion_tokens += result.usage.completion_tokens
    return AskOutcome(
        answers=result.responses,
        question_type=analysis.question_type,
        timesteps=analysis.timesteps,
        defaulted=analysis.defaulted,
        prompts=prompts,
        usage=usage,
        selection=selection,
        stage1_timesteps=stage1_timesteps,
    )
