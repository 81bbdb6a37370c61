"""Deterministic regeneration of the bundled reference artifacts.

Running ``python -m dinechat.bundle`` rebuilds, from fixed seeds:

* ``data/reference_checkpoint.json``: agent trained 60 episodes, seed 7
* ``data/reference-21.jsonl``: a 21-step greedy rollout with DINE records
* ``data/question_bank.json``: the default eight-question bank, with every
  ground truth re-derived and sanity-checked against the rollout

The question bank embeds closed-form correct options, so regeneration
asserts that every frozen answer still matches the trace, and that dominant
channels win by a margin that survives two-decimal wire rounding.
"""

import json
from pathlib import Path

from .agent import DecomposedDQNAgent
from .config import AgentConfig
from .dines import rollout_and_record
from .grading import GroundTruthOracle
from .simenv import WebshopEnv
from .tracestore import TraceStore

DATA_DIR = Path(__file__).parent / "data"
BUNDLE_SEED = 7
BUNDLE_EPISODES = 60
TRACE_ID = "reference-21"
TRACE_STEPS = 21
DOMINANCE_MARGIN = 0.05   # must survive 2-decimal rounding


def train_reference_agent():
    env = WebshopEnv()
    agent = DecomposedDQNAgent(AgentConfig(seed=BUNDLE_SEED))
    agent.train(env, episodes=BUNDLE_EPISODES)
    return agent, env


def build_reference_trace(agent, env):
    description = (DATA_DIR / "system_description.txt").read_text().strip()
    return rollout_and_record(
        agent, env, steps=TRACE_STEPS, seed=BUNDLE_SEED,
        trace_id=TRACE_ID, description=description,
        checkpoint_ref="reference_checkpoint.json")


def _dominance_margin(record):
    row = sorted(record.dominance_map()[record.chosen_action].values(),
                 reverse=True)
    return row[0] - row[1]


def build_question_bank(trace):
    oracle = GroundTruthOracle(trace)

    def truth(spec):
        return oracle.evaluate(spec)

    t_action = {"kind": "chosen_action", "timestep": 5}
    t_channel = {"kind": "dominant_channel", "timestep": 5}
    t_servers = {"kind": "servers", "timestep": 3}
    t_channel9 = {"kind": "dominant_channel", "timestep": 9}
    t_uncertain = {"kind": "count_uncertain", "from": 0, "to": 20}
    t_frequent = {"kind": "most_frequent_action", "from": 0, "to": 20}
    t_range_channel = {"kind": "dominant_channel_range", "from": 0, "to": 20}
    t_dimmer_count = {"kind": "action_count", "action": "IncreaseDimmer",
                      "from": 0, "to": 20}

    checks = {
        "chosen@5": (truth(t_action), "AddServer"),
        "channel@5": (truth(t_channel), "user_satisfaction"),
        "servers@3": (truth(t_servers), 4),
        "channel@9": (truth(t_channel9), "revenue"),
        "uncertain count": (truth(t_uncertain), 15),
        "frequent action": (truth(t_frequent), "AddServer"),
        "range channel": (truth(t_range_channel), "user_satisfaction"),
        "dimmer count": (truth(t_dimmer_count), 2),
    }
    for label, (actual, expected) in checks.items():
        if actual != expected:
            raise AssertionError(f"bundle drift: {label} is {actual!r}, "
                                 f"bank expects {expected!r}")
    for t in (5, 9):
        margin = _dominance_margin(trace.record_at(t))
        if margin < DOMINANCE_MARGIN:
            raise AssertionError(
                f"dominant channel at t={t} wins by only {margin:.3f}; "
                f"too close to survive wire rounding")
    uncertain = [r.timestep for r in trace.records if r.uncertain]
    if not uncertain or len(uncertain) == len(trace.records):
        raise AssertionError("trace needs both certain and uncertain steps")

    questions = [
        {
            "id": "a1-chosen-action", "type": "A", "style": "what/which",
            "truth": t_action,
            "open": {"text": "Which adaptation action did the system choose at timestep 5?"},
            "closed": {
                "text": "Which adaptation action did the system choose at timestep 5?",
                "options": ["AddServer", "RemoveServer", "IncreaseDimmer", "NoOp"],
                "correct": "a",
            },
        },
        {
            "id": "a2-why-action", "type": "A", "style": "why",
            "truth": t_channel,
            "open": {"text": "Why did the system choose AddServer at timestep 5?"},
            "closed": {
                "text": "Why did the system choose AddServer at timestep 5?",
                "options": ["revenue", "user_satisfaction", "costs"],
                "correct": "b",
            },
        },
        {
            "id": "a3-server-count", "type": "A", "style": "how many",
            "truth": t_servers,
            "open": {"text": "How many web servers were active at timestep 3?"},
            "closed": {
                "text": "How many web servers were active at timestep 3?",
                "options": ["2", "4", "10"],
                "correct": "b",
            },
        },
        {
            "id": "a4-dominant-channel", "type": "A", "style": "what/which",
            "truth": t_channel9,
            "open": {"text": "What was the most influential reward channel at timestep 9?"},
            "closed": {
                "text": "What was the most influential reward channel at timestep 9?",
                "options": ["user_satisfaction", "revenue", "costs"],
                "correct": "b",
            },
        },
        {
            "id": "b1-uncertain-count", "type": "B", "style": "how many",
            "truth": t_uncertain,
            "open": {"text": "How often was the decision-making uncertain between timesteps 0 and 20?"},
            "closed": {
                "text": "How often was the decision-making uncertain between timesteps 0 and 20?",
                "options": ["3", "15", "21"],
                "correct": "b",
            },
        },
        {
            "id": "b2-frequent-action", "type": "B", "style": "what/which",
            "truth": t_frequent,
            "open": {"text": "Which action did the system choose most often between timesteps 0 and 20?"},
            "closed": {
                "text": "Which action did the system choose most often between timesteps 0 and 20?",
                "options": ["IncreaseDimmer", "NoOp", "AddServer", "RemoveServer"],
                "correct": "c",
            },
        },
        {
            "id": "b3-why-overall", "type": "B", "style": "why",
            "truth": t_range_channel,
            "open": {"text": "Why did the system mostly prefer AddServer between timesteps 0 and 20?"},
            "closed": {
                "text": "Why did the system mostly prefer AddServer between timesteps 0 and 20?",
                "options": ["costs", "revenue", "user_satisfaction"],
                "correct": "c",
            },
        },
        {
            "id": "b4-dimmer-count", "type": "B", "style": "how many",
            "truth": t_dimmer_count,
            "open": {"text": "How many times was IncreaseDimmer chosen between timesteps 0 and 20?"},
            "closed": {
                "text": "How many times was IncreaseDimmer chosen between timesteps 0 and 20?",
                "options": ["0", "2", "19"],
                "correct": "b",
            },
        },
    ]
    return {"version": 1, "trace_id": TRACE_ID, "questions": questions}


def regenerate(data_dir=DATA_DIR):
    data_dir = Path(data_dir)
    agent, env = train_reference_agent()
    agent.save(data_dir / "reference_checkpoint.json")
    trace = build_reference_trace(agent, env)
    TraceStore(data_dir).store(trace)
    bank = build_question_bank(trace)
    (data_dir / "question_bank.json").write_text(json.dumps(bank, indent=2) + "\n")
    return trace


if __name__ == "__main__":
    trace = regenerate()
    uncertain = sum(1 for r in trace.records if r.uncertain)
    print(f"bundle regenerated: {len(trace)} steps, {uncertain} uncertain")
