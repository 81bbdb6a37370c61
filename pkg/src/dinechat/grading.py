"""Machine grading of answers against trace-derived ground truth.

Closed answers are graded by extracting the option letter (first standalone
``(x)`` or ``x)`` token, falling back to a unique option-text match). Open
answers are graded against an evaluated ground-truth value: counts by integer
extraction (first number in the answer, spelled-out words included), action
and channel names by canonical containment with negation detection ("not"
within three tokens before the name flips the match).
"""

import json
import re
import string
from dataclasses import dataclass, field
from pathlib import Path

from .config import REWARD_CHANNELS
from .errors import ConfigurationError
from .names import extract_numbers, find_name, name_negated, names_found
from .simenv import ACTION_NAMES

QUESTION_STYLES = ("what/which", "why", "how many")


@dataclass(frozen=True)
class QuestionBankEntry:
    id: str
    text: str
    form: str                        # open | closed
    style: str                       # what/which | why | how many
    question_type: str               # A | B
    truth: dict = field(default_factory=dict)   # open: ground-truth spec
    options: tuple = ()              # closed only
    correct: str = ""                # closed only: option letter

    def __post_init__(self):
        if self.style not in QUESTION_STYLES:
            raise ConfigurationError(f"unknown question style: {self.style!r}")
        if self.form == "closed":
            if len(self.options) < 2 or self.correct not in string.ascii_lowercase:
                raise ConfigurationError(
                    f"closed entry {self.id} needs options and a correct letter")
            if string.ascii_lowercase.index(self.correct) >= len(self.options):
                raise ConfigurationError(
                    f"closed entry {self.id}: correct letter outside options")
        elif self.form == "open":
            if "kind" not in self.truth:
                raise ConfigurationError(
                    f"open entry {self.id} needs a ground-truth spec")
        else:
            raise ConfigurationError(f"unknown form: {self.form!r}")


class QuestionBank:
    """Question topics with open and closed renderings of each."""

    def __init__(self, items):
        self.items = list(items)

    @classmethod
    def load(cls, path):
        return cls(json.loads(Path(path).read_text())["questions"])

    def entries(self, form):
        out = []
        for item in self.items:
            rendering = item[form]
            out.append(QuestionBankEntry(
                id=f"{item['id']}-{form}",
                text=rendering["text"],
                form=form,
                style=item["style"],
                question_type=item["type"],
                truth=item.get("truth", {}),
                options=tuple(rendering.get("options", ())),
                correct=rendering.get("correct", ""),
            ))
        return out


class GroundTruthOracle:
    """Evaluates machine-checkable ground-truth specs over a trace.

    Tie-breaking matches the DINE answering rules: dominant channels break
    toward the first channel, most-frequent actions toward the first action.
    """

    def __init__(self, trace):
        self.trace = trace

    def _records(self, spec):
        lo = spec.get("from")
        hi = spec.get("to")
        records = self.trace.records
        if lo is not None or hi is not None:
            lo = lo if lo is not None else records[0].timestep
            hi = hi if hi is not None else records[-1].timestep
            records = [r for r in records if lo <= r.timestep <= hi]
        return records

    def evaluate(self, spec):
        kind = spec["kind"]
        if kind == "chosen_action":
            return self.trace.record_at(spec["timestep"]).chosen_action
        if kind == "dominant_channel":
            record = self.trace.record_at(spec["timestep"])
            row = record.dominance_map()[record.chosen_action]
            channels = list(record.channels)
            return max(channels, key=lambda c: (row[c], -channels.index(c)))
        if kind == "dominant_channel_range":
            records = self._records(spec)
            channels = list(records[0].channels)
            totals = {c: 0.0 for c in channels}
            for record in records:
                row = record.dominance_map()[record.chosen_action]
                for c in channels:
                    totals[c] += row[c]
            return max(channels, key=lambda c: (totals[c], -channels.index(c)))
        if kind == "servers":
            return self.trace.record_at(spec["timestep"]).state.servers
        if kind == "count_uncertain":
            return sum(1 for r in self._records(spec) if r.uncertain)
        if kind == "uncertain_timesteps":
            return [r.timestep for r in self._records(spec) if r.uncertain]
        if kind == "action_count":
            return sum(1 for r in self._records(spec)
                       if r.chosen_action == spec["action"])
        if kind == "most_frequent_action":
            records = self._records(spec)
            actions = list(records[0].actions)
            counts = {a: 0 for a in actions}
            for record in records:
                counts[record.chosen_action] += 1
            return max(actions, key=lambda a: (counts[a], -actions.index(a)))
        raise ConfigurationError(f"unknown ground-truth kind: {kind!r}")


_OPTION_TOKEN = re.compile(r"(?:^|[\s:])\(?([a-z])\)(?:[\s.,;]|$)")


def extract_option_letter(answer, options):
    match = _OPTION_TOKEN.search(answer.lower())
    if match:
        return match.group(1)
    # fall back to a unique option-text match
    hits = []
    for letter, option in zip(string.ascii_lowercase, options):
        if find_name(answer, str(option)) is not None or \
                str(option).lower() in answer.lower():
            hits.append(letter)
    return hits[0] if len(hits) == 1 else None


NAME_TRUTHS = tuple(ACTION_NAMES) + tuple(REWARD_CHANNELS)


def grade(answer, entry, oracle):
    """Grade one answer; returns ``(grade, rationale)`` with grade in {0, 1}."""
    if not answer or not answer.strip():
        return 0, "unparseable: empty answer"

    if entry.form == "closed":
        letter = extract_option_letter(answer, entry.options)
        if letter is None:
            return 0, "unparseable: no option letter found"
        if letter == entry.correct:
            return 1, f"option ({letter}) matches"
        return 0, f"expected ({entry.correct}), found ({letter})"

    truth = oracle.evaluate(entry.truth)
    if isinstance(truth, bool):
        raise ConfigurationError("boolean truths are not supported")
    if isinstance(truth, int):
        numbers = extract_numbers(answer)
        if not numbers:
            return 0, "unparseable: no number found"
        if numbers[0] == truth:
            return 1, f"count {truth} matches"
        return 0, f"expected {truth}, found {numbers[0]}"
    if isinstance(truth, list):
        numbers = extract_numbers(answer)
        if sorted(set(numbers)) == sorted(set(truth)):
            return 1, f"timestep list {truth} matches"
        return 0, f"expected {sorted(truth)}, found {sorted(set(numbers))}"
    if isinstance(truth, str):
        if find_name(answer, truth) is None:
            others = names_found(answer, [n for n in NAME_TRUTHS if n != truth])
            if others:
                return 0, f"expected {truth}, found {others[0]}"
            return 0, f"unparseable: {truth} not named"
        if name_negated(answer, truth):
            return 0, f"expected {truth}, but it is negated"
        return 1, f"{truth} named"
    raise ConfigurationError(f"unsupported truth type: {type(truth)!r}")
