"""Question analysis: timestep extraction, A/B typing, and DINE selection.

A question about a single decision (exactly one referenced timestep) is
Type A; a question spanning several timesteps is Type B. Questions naming no
timestep default to the 20 most recent decisions of the active trace.

Two extractors exist: a deterministic pattern parser used for offline runs
and tests, and an LLM-backed extractor that asks the completion backend for
the timestep list and falls back to the deterministic parser when the reply
cannot be parsed.
"""

import json
import logging
import re
from dataclasses import dataclass, field

from .dines import encode_dines, slice_trace
from .errors import BudgetError, ConfigurationError, OutOfRangeError
from .questions_patterns import extract_timestep_mentions
from .tokens import estimate_tokens

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 20  # timesteps before the most recent one

TYPE_A_KINDS = ("dominance", "uncertainty", "q_table", "state", "reward")
TYPE_B_KINDS = ("dominance", "uncertainty")


@dataclass(frozen=True)
class QuestionSpec:
    text: str
    form: str = "open"                  # open | closed
    options: tuple = ()                 # closed only; >= 2 entries

    def __post_init__(self):
        if not self.text.strip():
            raise ConfigurationError("question text is empty")
        if self.form not in ("open", "closed"):
            raise ConfigurationError(f"unknown question form: {self.form!r}")
        if self.form == "closed" and len(self.options) < 2:
            raise ConfigurationError("closed questions need at least two options")


@dataclass(frozen=True)
class QuestionAnalysis:
    question_type: str                  # A | B
    timesteps: tuple                    # ordered, clipped to the trace
    defaulted: bool
    focal_range: tuple                  # (lo, hi) used for budget trimming


def default_window(trace):
    """The most recent decisions: ``t_max - 20 .. t_max``, clipped at start."""
    lo, hi = trace.timestep_range()
    return list(range(max(lo, hi - DEFAULT_WINDOW), hi + 1))


def extract_timesteps(question, extractor="deterministic", trace=None,
                      gateway=None, params=None):
    """Return ``(timesteps, defaulted)`` for a question.

    With no trace available an empty extraction stays empty (defaulted=True)
    so callers can decide how to handle it.
    """
    if not question or not question.strip():
        raise ConfigurationError("question text is empty")
    if extractor == "deterministic":
        found = extract_timestep_mentions(question)
    elif extractor == "llm":
        found = _extract_with_llm(question, gateway, params)
        if found is None:
            log.warning("LLM timestep extraction unparseable; using deterministic parser")
            found = extract_timestep_mentions(question)
    else:
        raise ConfigurationError(f"unknown extractor: {extractor!r}")
    if found:
        return sorted(set(found)), False
    if trace is not None:
        return default_window(trace), True
    return [], True


EXTRACTION_PROMPT = (
    "Reply with only a JSON array of the integer timesteps mentioned in the "
    "following question, or [] if none are mentioned. Question: {question}"
)


def _extract_with_llm(question, gateway, params):
    if gateway is None:
        raise ConfigurationError("llm extractor needs a gateway")
    from .prompts import Message, PromptSequence

    sequence = PromptSequence(
        messages=[Message("user", EXTRACTION_PROMPT.format(question=question))],
        question_type=None, strategy="extraction",
    )
    result = gateway.chat_complete(sequence, params)
    return parse_timestep_list(result.responses[0])


def parse_timestep_list(text):
    """Parse a bracketed integer list out of free text; None when absent."""
    match = re.search(r"\[([^\]]*)\]", text)
    if not match:
        return None
    body = match.group(1).strip()
    if not body:
        return []
    try:
        return [int(tok) for tok in re.split(r"[,\s]+", body) if tok]
    except ValueError:
        return None


def classify(question, trace, extractor="deterministic", gateway=None, params=None):
    """Type the question by the cardinality of its timestep set.

    The extracted set is clipped to the timesteps present in the trace; a set
    entirely outside the trace is rejected with the valid range.
    """
    text = question.text if isinstance(question, QuestionSpec) else question
    timesteps, defaulted = extract_timesteps(
        text, extractor=extractor, trace=trace, gateway=gateway, params=params)
    present = set(trace.timesteps())
    clipped = [t for t in timesteps if t in present]
    if timesteps and not clipped:
        raise OutOfRangeError(set(timesteps), trace.timestep_range())
    if not clipped:
        clipped = default_window(trace)
        defaulted = True
    qtype = "A" if len(clipped) == 1 else "B"
    if defaulted:
        # a defaulted window centers interest on the most recent decision
        focal = (clipped[-1], clipped[-1])
    else:
        focal = (min(timesteps), max(timesteps))
    return QuestionAnalysis(
        question_type=qtype,
        timesteps=tuple(clipped),
        defaulted=defaulted,
        focal_range=focal,
    )


@dataclass
class DineSelection:
    records: list
    kinds: tuple
    encoded: str
    token_estimate: int
    dropped_timesteps: list = field(default_factory=list)


def select_dines(analysis, trace, token_budget, estimator=estimate_tokens):
    """Pick and encode the DINEs supplied to the prompt, within a budget.

    Type A gets every insight kind for its single timestep; Type B gets
    compact dominance and uncertainty records per timestep. Over budget, the
    timesteps farthest from the question's focal range go first (oldest on
    ties), then the Q-value detail is dropped before the dominance map.
    """
    kinds = list(TYPE_A_KINDS if analysis.question_type == "A" else TYPE_B_KINDS)
    records = slice_trace(trace, analysis.timesteps)
    lo, hi = analysis.focal_range
    dropped = []

    def distance(record):
        if lo <= record.timestep <= hi:
            return 0
        return min(abs(record.timestep - lo), abs(record.timestep - hi))

    while True:
        encoded = encode_dines(records, kinds)
        estimate = estimator(encoded)
        if estimate <= token_budget:
            return DineSelection(records, tuple(kinds), encoded, estimate, dropped)
        if len(records) > 1:
            victim = max(records, key=lambda r: (distance(r), -r.timestep))
            records = [r for r in records if r is not victim]
            dropped.append(victim.timestep)
        elif "q_table" in kinds:
            kinds.remove("q_table")
        elif "state" in kinds:
            kinds.remove("state")
        elif "reward" in kinds:
            kinds.remove("reward")
        else:
            raise BudgetError(
                f"token budget {token_budget} cannot fit a single timestep "
                f"(needs ~{estimate} tokens)",
                estimated=estimate, limit=token_budget,
            )
