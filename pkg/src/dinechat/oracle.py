"""Deterministic explainer that answers prompts directly from the DINEs.

This is the offline ground-truth backend: it parses the DINE JSON out of a
prompt sequence, recognizes the supported question patterns, and computes the
answer from the data alone. Unrecognized questions yield an explicit marker
instead of a guess, so a wrong answer can never hide behind fluent text.

Tie-breaking is fixed: dominant channels break toward the channel listed
first, most-frequent actions toward the action listed first.
"""

import json
import re

from .names import extract_numbers, find_name
from .prompts import CLOSED_ANSWER_INSTRUCTION
from .questions_patterns import extract_timestep_mentions
from .simenv import ACTION_NAMES

CANNOT_ANSWER = "ORACLE_CANNOT_ANSWER"

_STAGE1_MARKER = "list the timesteps relevant to answering the following question"
_STAGE2_PATTERN = re.compile(
    r"^the relevant timesteps are (\[[^\]]*\])\.\s*", re.IGNORECASE)
_OPTION_PATTERN = re.compile(r"^\(([a-z])\)\s*(.*)$")


def extract_payload_and_question(sequence):
    """Pull the ***-delimited DINE JSON and the final question from a prompt."""
    messages = list(sequence.messages)
    if len(messages) == 1:
        parts = messages[0].text.split("***")
        if len(parts) < 3:
            return None, messages[0].text.strip()
        return parts[1], parts[-1].strip()
    payload = None
    for message in messages:
        text = message.text.strip()
        if text.startswith("***") and text.endswith("***") and len(text) > 6:
            payload = text[3:-3]
    return payload, messages[-1].text.strip()


def parse_records(payload):
    """DINE JSON to a list of per-timestep dicts (a single object wraps)."""
    data = json.loads(payload)
    if isinstance(data, dict):
        return [data]
    return list(data)


class DineAnswerer:
    """Computes answers over parsed DINE records."""

    def __init__(self, records):
        self.records = records
        self.by_timestep = {r.get("timestep"): r for r in records}
        first = records[0] if records else {}
        dominance = first.get("relative_reward_channel_dominance") or {}
        self.actions = list(dominance.keys()) or list(ACTION_NAMES)
        inner = next(iter(dominance.values()), {})
        self.channels = list(inner.keys())

    def record_for(self, timestep):
        return self.by_timestep.get(timestep)

    def chosen_action(self, timestep):
        record = self.record_for(timestep)
        return record.get("chosen_action") if record else None

    def dominant_channel(self, timestep):
        record = self.record_for(timestep)
        if not record:
            return None
        dominance = record.get("relative_reward_channel_dominance")
        action = record.get("chosen_action")
        if not dominance or action not in dominance:
            return None
        row = dominance[action]
        return max(self.channels, key=lambda c: (row.get(c, 0.0), -self.channels.index(c)))

    def dominant_channel_overall(self):
        if not self.channels:
            return None
        totals = {c: 0.0 for c in self.channels}
        for record in self.records:
            dominance = record.get("relative_reward_channel_dominance") or {}
            row = dominance.get(record.get("chosen_action")) or {}
            for c in self.channels:
                totals[c] += row.get(c, 0.0)
        return max(self.channels, key=lambda c: (totals[c], -self.channels.index(c)))

    def uncertain_timesteps(self):
        return sorted(r["timestep"] for r in self.records if r.get("uncertain"))

    def action_timesteps(self, action):
        return sorted(r["timestep"] for r in self.records
                      if r.get("chosen_action") == action)

    def most_frequent_action(self):
        counts = {a: 0 for a in self.actions}
        for record in self.records:
            action = record.get("chosen_action")
            if action in counts:
                counts[action] += 1
            else:
                counts[action] = 1
        order = list(counts.keys())
        return max(order, key=lambda a: (counts[a], -order.index(a)))

    def servers_at(self, timestep):
        record = self.record_for(timestep)
        state = (record or {}).get("state")
        return state.get("servers") if state else None


def _question_action(question):
    """The action an option-free question names, if any."""
    for name in ACTION_NAMES:
        if find_name(question, name) is not None:
            return name
    return None


def _split_closed(question_block):
    """Separate a closed question into (stem, [(letter, text), ...])."""
    lines = question_block.splitlines()
    options = []
    stem_lines = []
    for line in lines:
        match = _OPTION_PATTERN.match(line.strip())
        if match:
            options.append((match.group(1), match.group(2)))
        elif line.strip() != CLOSED_ANSWER_INSTRUCTION:
            stem_lines.append(line)
    return "\n".join(stem_lines).strip(), options


def answer_open(answerer, question):
    """Answer an open question; None when the pattern is unrecognized."""
    q = question.lower()
    timesteps = extract_timestep_mentions(question)
    single = timesteps[0] if len(timesteps) == 1 else None

    if "uncertain" in q and ("how often" in q or "how many" in q):
        uncertain = [t for t in answerer.uncertain_timesteps()
                     if not timesteps or t in timesteps]
        n = len(uncertain)
        return f"{n}. The decision-making was uncertain at {n} of the requested timesteps."

    if ("how many times" in q or "how often" in q):
        action = _question_action(question)
        if action is not None:
            steps = [t for t in answerer.action_timesteps(action)
                     if not timesteps or t in timesteps]
            return f"{len(steps)}. {action} was selected {len(steps)} times."

    if ("most often" in q or "most frequently" in q) and "action" in q:
        action = answerer.most_frequent_action()
        return f"{action} was the most frequent choice across these timesteps."

    if ("server" in q and "how many" in q) and single is not None:
        servers = answerer.servers_at(single)
        if servers is not None:
            return f"{servers} web servers were active at timestep {single}."

    if ("channel" in q and single is not None
            and ("influential" in q or "dominant" in q or "contributed" in q)):
        channel = answerer.dominant_channel(single)
        if channel is not None:
            return (f"The {channel} channel contributed most to the decision "
                    f"at timestep {single}.")

    if q.startswith("why") and single is not None:
        channel = answerer.dominant_channel(single)
        action = answerer.chosen_action(single)
        if channel is not None and action is not None:
            return (f"The decision for {action} at timestep {single} was driven "
                    f"mainly by the {channel} channel, which contributed most "
                    f"to its relative reward.")

    if q.startswith("why") and len(timesteps) > 1:
        channel = answerer.dominant_channel_overall()
        if channel is not None:
            return (f"Across the requested timesteps, the {channel} channel "
                    f"contributed most to the chosen actions.")

    if ("action" in q and single is not None
            and ("which" in q or "what" in q)):
        action = answerer.chosen_action(single)
        if action is not None:
            return f"At timestep {single}, the system chose {action}."

    return None


def _answer_matches_option(answer, option_text, truth_hint=None):
    option_numbers = extract_numbers(option_text)
    answer_numbers = extract_numbers(answer)
    if option_numbers and answer_numbers:
        return option_numbers[0] == answer_numbers[0]
    for name in list(ACTION_NAMES) + ["user_satisfaction", "revenue", "costs"]:
        if find_name(option_text, name) is not None:
            return find_name(answer, name) is not None
    return False


def answer_sequence(sequence):
    """Answer one prompt sequence from its embedded DINEs."""
    payload, question = extract_payload_and_question(sequence)
    if payload is None:
        return CANNOT_ANSWER
    try:
        records = parse_records(payload)
    except json.JSONDecodeError:
        return CANNOT_ANSWER
    answerer = DineAnswerer(records)

    if _STAGE1_MARKER in question.lower():
        inner = question.split("Question:", 1)[-1].strip()
        action = _question_action(inner)
        if "uncertain" in inner.lower():
            relevant = answerer.uncertain_timesteps()
        elif action is not None:
            relevant = answerer.action_timesteps(action)
        else:
            relevant = sorted(r["timestep"] for r in records)
        return json.dumps(relevant)

    stage2 = _STAGE2_PATTERN.match(question)
    if stage2:
        question = question[stage2.end():].strip()

    if CLOSED_ANSWER_INSTRUCTION in question:
        stem, options = _split_closed(question)
        open_answer = answer_open(answerer, stem)
        if open_answer is None or not options:
            return CANNOT_ANSWER
        for letter, text in options:
            if _answer_matches_option(open_answer, text):
                return f"({letter})"
        return CANNOT_ANSWER

    answer = answer_open(answerer, question)
    return answer if answer is not None else CANNOT_ANSWER
