"""Prompt assembly for the explanation pipeline.

The engineered strategy issues four messages: the system description, a
context line matching the question type, the DINE JSON wrapped in ``***``
delimiters, and the explainee's question. Open trajectory questions use a
two-stage variant: stage one asks for the relevant timesteps, stage two
injects the returned list ahead of the final question. Zero-shot prompting
concatenates everything into a single message.

Any ``***`` inside the JSON payload is rewritten to ``\\u002a`` escapes,
which parse back to the same string but keep the delimiters unambiguous.
"""

import json
import string
from dataclasses import dataclass, field

from .config import REWARD_CHANNELS
from .errors import BudgetError, ConfigurationError
from .simenv import ACTION_NAMES
from .tokens import REQUEST_TOKEN_LIMIT, estimate_sequence_tokens

DESCRIPTION_TEMPLATE = (
    "The following scenario description will be available for answering the "
    "upcoming questions: {description}"
)
CONTEXT_TEMPLATE_SINGLE = (
    "You will be given the state for a single timestep of {name} as JSON "
    "enclosed in ***:"
)
CONTEXT_TEMPLATE_TRAJECTORY = (
    "You will be given a trajectory of timesteps for {name} as JSON "
    "enclosed in ***:"
)
CLOSED_ANSWER_INSTRUCTION = "Answer with a single option letter."
STAGE1_TEMPLATE = (
    "List the timesteps relevant to answering the following question as a "
    "JSON array of integers, and nothing else. Question: {question}"
)
STAGE2_TEMPLATE = "The relevant timesteps are {timesteps}. {question}"
ZERO_SHOT_SEPARATOR = "\n\n"


@dataclass(frozen=True)
class Message:
    role: str        # system | user
    text: str


@dataclass(frozen=True)
class PromptSequence:
    messages: tuple
    question_type: str
    strategy: str            # zero_shot | engineered
    stage: int = 1

    def __init__(self, messages, question_type, strategy, stage=1):
        object.__setattr__(self, "messages", tuple(messages))
        object.__setattr__(self, "question_type", question_type)
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "stage", stage)

    def full_text(self):
        return "\n\n".join(m.text for m in self.messages)

    def to_wire(self):
        return [{"role": m.role, "content": m.text} for m in self.messages]


@dataclass(frozen=True)
class SystemDescription:
    """Prose about the managed system; must name every action and channel
    that can appear in the DINEs, so answers can refer back to them."""

    name: str
    text: str
    actions: tuple = ACTION_NAMES
    channels: tuple = REWARD_CHANNELS

    def __post_init__(self):
        if not self.name.strip() or not self.text.strip():
            raise ConfigurationError("system description needs a name and text")
        missing = [n for n in (*self.actions, *self.channels) if n not in self.text]
        if missing:
            raise ConfigurationError(
                f"system description must mention: {', '.join(missing)}"
            )


def escape_delimiters(payload):
    # *** only ever occurs inside JSON strings, where * escapes
    # round-trip to the identical value
    return payload.replace("***", "\\u002a\\u002a\\u002a")


def render_question(question):
    """Question text, with enumerated options appended for closed form."""
    if question.form == "open":
        return question.text
    lines = [question.text]
    for letter, option in zip(string.ascii_lowercase, question.options):
        lines.append(f"({letter}) {option}")
    lines.append(CLOSED_ANSWER_INSTRUCTION)
    return "\n".join(lines)


def _check_budget(sequence, reply_budget):
    estimate = estimate_sequence_tokens(sequence.messages)
    if estimate + reply_budget > REQUEST_TOKEN_LIMIT:
        raise BudgetError(
            f"prompt estimate {estimate} + reply budget {reply_budget} exceeds "
            f"the {REQUEST_TOKEN_LIMIT}-token request limit",
            estimated=estimate, reply_budget=reply_budget,
            limit=REQUEST_TOKEN_LIMIT,
        )
    return sequence


def build_engineered(description, analysis, dine_json, question, reply_budget=350):
    """The four-message engineered sequence for either question type."""
    if not isinstance(description, SystemDescription):
        raise ConfigurationError("description must be a SystemDescription")
    context = (CONTEXT_TEMPLATE_SINGLE if analysis.question_type == "A"
               else CONTEXT_TEMPLATE_TRAJECTORY)
    messages = [
        Message("system", DESCRIPTION_TEMPLATE.format(description=description.text)),
        Message("system", context.format(name=description.name)),
        Message("user", f"***{escape_delimiters(dine_json)}***"),
        Message("user", render_question(question)),
    ]
    sequence = PromptSequence(messages, analysis.question_type, "engineered")
    return _check_budget(sequence, reply_budget)


def build_zero_shot(description, dine_json, question, reply_budget=350,
                    question_type=None):
    """A single message holding description, DINE JSON, and question."""
    if not isinstance(description, SystemDescription):
        raise ConfigurationError("description must be a SystemDescription")
    text = ZERO_SHOT_SEPARATOR.join([
        description.text,
        f"***{escape_delimiters(dine_json)}***",
        render_question(question),
    ])
    sequence = PromptSequence([Message("user", text)], question_type, "zero_shot")
    return _check_budget(sequence, reply_budget)


@dataclass(frozen=True)
class Stage2Template:
    description: SystemDescription
    analysis: object
    dine_json: str
    question: object
    reply_budget: int

    def render(self, timesteps):
        """Second-stage sequence embedding the stage-1 timestep list."""
        injected = json.dumps(list(timesteps))
        final = STAGE2_TEMPLATE.format(
            timesteps=injected, question=render_question(self.question))
        messages = [
            Message("system", DESCRIPTION_TEMPLATE.format(
                description=self.description.text)),
            Message("system", CONTEXT_TEMPLATE_TRAJECTORY.format(
                name=self.description.name)),
            Message("user", f"***{escape_delimiters(self.dine_json)}***"),
            Message("user", final),
        ]
        sequence = PromptSequence(messages, "B", "engineered", stage=2)
        return _check_budget(sequence, self.reply_budget)


def build_chain_of_thought(description, analysis, dine_json, question,
                           reply_budget=350):
    """Two-stage sequence for open trajectory questions.

    Stage one asks for the timesteps relevant to the question; the returned
    list is injected into stage two ahead of the concrete question.
    """
    if analysis.question_type != "B":
        raise ConfigurationError(
            "two-stage prompting applies to trajectory questions only")
    if question.form != "open":
        raise ConfigurationError(
            "two-stage prompting applies to open questions only")
    stage1_messages = [
        Message("system", DESCRIPTION_TEMPLATE.format(description=description.text)),
        Message("system", CONTEXT_TEMPLATE_TRAJECTORY.format(name=description.name)),
        Message("user", f"***{escape_delimiters(dine_json)}***"),
        Message("user", STAGE1_TEMPLATE.format(question=question.text)),
    ]
    stage1 = _check_budget(
        PromptSequence(stage1_messages, "B", "engineered", stage=1), reply_budget)
    template = Stage2Template(description, analysis, dine_json, question,
                              reply_budget)
    return stage1, template
