"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one ``ACCEPTANCE <criterion>: PASS`` line (visible with
``pytest -v -s tests/test_acceptance.py``); a failing criterion fails its
test. Offline runs only; no live endpoint is contacted.
"""

import json
import time

import numpy as np
import pytest

from _reference_double_dqn import ReferenceDoubleDQN
from golden_utils import golden_path, render_sequence

from dinechat import assets
from dinechat.agent import DecomposedDQNAgent, random_policy_returns
from dinechat.config import AgentConfig, EnvConfig
from dinechat.dines import encode_dines
from dinechat.experiment import (ExperimentConfig, load_reference_results,
                                 render_report, run_experiment)
from dinechat.explain import dine_token_budget
from dinechat.gateway import (ChatGateway, CompletionParams, OracleBackend,
                              RateBudget, SimulatedClock)
from dinechat.metrics import compute_fidelity, compute_stability
from dinechat.network import MLP, gradient_check
from dinechat.prompts import build_engineered, build_zero_shot
from dinechat.questions import QuestionSpec, classify, select_dines
from dinechat.replay import Batch
from dinechat.simenv import Action, WebshopEnv
from dinechat.tokens import estimate_sequence_tokens


def report(name):
    print(f"\nACCEPTANCE {name}: PASS")


def test_decomposition_soundness():
    """|R_total - (a*R_us + b*R_rev + c*R_cost)| < 1e-12 over 1,000+ steps."""
    started = time.time()
    config = EnvConfig(weight_user_satisfaction=1.3, weight_revenue=0.7,
                       weight_costs=1.9)
    env = WebshopEnv(config)
    rng = np.random.default_rng(0)
    state = env.reset(seed=0)
    a, b, c = config.weights()
    checked = 0
    while checked < 1000:
        action = Action(int(rng.integers(len(Action))))
        state, reward = env.step(state, action)
        recomputed = (a * reward.user_satisfaction + b * reward.revenue
                      + c * reward.costs)
        assert abs(reward.total() - recomputed) < 1e-12
        checked += 1
        if env.episode_over(state):
            state = env.reset(seed=checked)
    elapsed = time.time() - started
    assert elapsed < 5.0, f"took {elapsed:.1f}s"
    report("decomposition soundness")


def test_gradient_correctness():
    """Analytic vs central differences, default MLP, 20 inputs, < 1e-4."""
    started = time.time()
    net = MLP((5, 64, 64, 15), seed=1)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        x = rng.random(5)
        target = rng.random(15)
        worst = max(worst, gradient_check(net, x, target, h=1e-5))
    elapsed = time.time() - started
    assert worst < 1e-4, f"max relative error {worst:.2e}"
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    report(f"gradient correctness (max rel err {worst:.2e})")


def test_degenerate_decomposition_equivalence():
    """Single-channel agent tracks a standard Double DQN within 1e-12."""
    config = AgentConfig(seed=3)
    agent = DecomposedDQNAgent(config, channels=("total",))
    reference = ReferenceDoubleDQN(
        n_features=5, n_actions=5, hidden=config.hidden_sizes,
        seed=config.seed, gamma=config.gamma,
        learning_rate=config.learning_rate, clip_norm=config.grad_clip_norm,
        sync_interval=config.target_sync_interval)
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        states = rng.random((32, 5))
        next_states = rng.random((32, 5))
        actions = rng.integers(0, 5, 32)
        rewards = rng.normal(size=32)
        dones = (rng.random(32) < 0.05).astype(np.float64)
        agent.update(Batch(states=states, actions=actions,
                           rewards=rewards[:, None], next_states=next_states,
                           dones=dones))
        reference.update(states, actions, rewards, next_states, dones)
        for (w, b), rw, rb in zip(agent.online.get_weights(), reference.w,
                                  reference.b):
            worst = max(worst, float(np.max(np.abs(w - rw))),
                        float(np.max(np.abs(b - rb))))
        assert worst <= 1e-12, f"trajectories diverged by {worst:.2e}"
    report(f"degenerate-decomposition equivalence (max diff {worst:.2e})")


def _random_baseline(env, episodes, seed):
    # independent uniform-random rollout, written out here so the oracle
    # does not share code with the agent under test
    rng = np.random.default_rng(seed)
    totals = []
    for _ in range(episodes):
        state = env.reset(seed=seed)
        total = 0.0
        while not env.episode_over(state):
            state, reward = env.step(state, int(rng.integers(len(Action))))
            total += reward.total()
        totals.append(total)
    return float(np.mean(totals))


def test_learning_at_desk_scale():
    """200 episodes beat 1.5x the seeded random-policy mean in < 5 min."""
    started = time.time()
    env = WebshopEnv()
    baseline = _random_baseline(env, episodes=20, seed=123)
    assert baseline == random_policy_returns(env, episodes=20, seed=123)
    agent = DecomposedDQNAgent(AgentConfig(seed=7))
    log = agent.train(env, episodes=200)
    trained = float(np.mean([e["return_total"] for e in log[-20:]]))
    elapsed = time.time() - started
    assert trained >= 1.5 * baseline, \
        f"trained {trained:.1f} vs 1.5x random {1.5 * baseline:.1f}"
    assert elapsed < 300.0, f"took {elapsed:.1f}s"
    report(f"learning at desk scale (trained {trained:.1f}, "
           f"random {baseline:.1f})")


def test_dominance_invariants_on_bundled_trace():
    """Min dominance exactly 0 per channel; summed argmax = chosen action."""
    trace = assets.load_reference_trace()
    assert len(trace) == 21
    for record in trace.records:
        minima = record.dominance.min(axis=1)
        assert np.array_equal(minima, np.zeros(len(record.channels)))
        best = int(np.argmax(record.dominance.sum(axis=0)))
        assert record.actions[best] == record.chosen_action
    report("dominance invariants (21/21 timesteps)")


def test_dine_wire_format():
    """Golden dominance encoding; parse round-trip lossless at 2 decimals."""
    trace = assets.load_reference_trace()
    encoded = encode_dines([trace.record_at(5)], kinds=("dominance",))
    assert encoded + "\n" == golden_path("dominance_dine.json").read_text()
    parsed = json.loads(encoded)
    for channels in parsed["relative_reward_channel_dominance"].values():
        for value in channels.values():
            assert value == round(value, 2)
    assert json.dumps(parsed, separators=(",", ":")) == encoded
    trajectory = encode_dines(trace.records)
    assert json.dumps(json.loads(trajectory), separators=(",", ":")) \
        == trajectory
    report("DINE wire format")


def test_question_typing():
    """100% correct A/B typing and timestep extraction on the labeled set."""
    from dinechat.dines import rollout_and_record

    reference = assets.load_reference_trace()
    traces = {21: reference}
    agent = DecomposedDQNAgent(AgentConfig(seed=0))
    labeled = assets.load_labeled_questions()
    assert len(labeled) == 20
    correct = 0
    for item in labeled:
        n = item["trace_len"]
        if n not in traces:
            env = WebshopEnv(EnvConfig(episode_length=max(n, 1)))
            traces[n] = rollout_and_record(agent, env, steps=n, seed=0)
        analysis = classify(item["question"], traces[n])
        assert list(analysis.timesteps) == item["expected_timesteps"], \
            item["question"]
        assert analysis.question_type == item["expected_type"], \
            item["question"]
        assert analysis.defaulted == item["defaulted"], item["question"]
        correct += 1
    assert correct == 20
    report("question typing (20/20)")


def test_prompt_templates():
    """Golden byte-exact sequences; every sequence fits the token limit."""
    trace = assets.load_reference_trace()
    description = assets.load_default_description()
    params = CompletionParams()

    q_a = QuestionSpec(
        text="Which adaptation action did the system choose at timestep 5?")
    analysis_a = classify(q_a, trace)
    selection_a = select_dines(analysis_a, trace,
                               dine_token_budget(description, q_a, params))
    seq_a = build_engineered(description, analysis_a, selection_a.encoded, q_a)
    assert render_sequence(seq_a) == \
        golden_path("engineered_type_a.txt").read_text()

    q_b = QuestionSpec(
        text="How often was the decision-making uncertain between timesteps "
             "0 and 20?",
        form="closed", options=("3", "15", "21"))
    analysis_b = classify(q_b, trace)
    selection_b = select_dines(analysis_b, trace,
                               dine_token_budget(description, q_b, params))
    seq_b = build_engineered(description, analysis_b, selection_b.encoded, q_b)
    assert render_sequence(seq_b) == \
        golden_path("engineered_type_b.txt").read_text()

    bank = assets.load_default_bank()
    checked = 0
    for form in ("open", "closed"):
        for entry in bank.entries(form):
            question = QuestionSpec(text=entry.text, form=form,
                                    options=entry.options)
            analysis = classify(question, trace)
            selection = select_dines(
                analysis, trace, dine_token_budget(description, question,
                                                   params))
            for sequence in (
                    build_engineered(description, analysis, selection.encoded,
                                     question),
                    build_zero_shot(description, selection.encoded, question)):
                total = estimate_sequence_tokens(sequence.messages) + 350
                assert total <= 4096, f"{entry.id}: {total}"
                checked += 1
    report(f"prompt templates (goldens + {checked} sequences under limit)")


def test_rate_limiting():
    """25 max-size requests: windows stay <= 90,000; waits match arithmetic."""
    clock = SimulatedClock()
    budget = RateBudget(clock=clock)
    waits = []
    for _ in range(25):
        waited = 0.0
        while True:
            granted, wait, _ = budget.try_acquire(4096)
            if granted:
                break
            waited += wait
            clock.advance(wait)
        waits.append(waited)
        assert budget.window_total() <= 90_000
    # window arithmetic: floor(90000 / 4096) = 21 requests fit immediately;
    # the 22nd must wait one full 60 s window, then headroom is clear again
    assert waits[:21] == [0.0] * 21
    assert waits[21] == pytest.approx(60.0, abs=1e-12)
    assert waits[22:] == [0.0, 0.0, 0.0]
    report("rate limiting (25-request replay)")


def test_metrics_against_brute_force():
    """Fidelity/stability/effectiveness equal brute-force recomputation."""
    rng = np.random.default_rng(42)
    for _ in range(100):
        grades = [int(g) for g in rng.integers(0, 2, int(rng.integers(1, 50)))]
        assert compute_fidelity(grades) == sum(grades) / len(grades)
        fidelities = [float(f) for f in rng.random(int(rng.integers(2, 30)))]
        mean = sum(fidelities) / len(fidelities)
        sigma = (sum((f - mean) ** 2 for f in fidelities)
                 / len(fidelities)) ** 0.5
        assert compute_stability(fidelities) == pytest.approx(1.0 - sigma,
                                                              abs=1e-12)
    assert compute_fidelity([1, 0, 1, 0]) == 0.5
    assert compute_stability([0.5, 1.0]) == pytest.approx(0.75, abs=1e-12)
    report("metrics vs brute force (100 random vectors)")


def test_end_to_end_oracle_grid():
    """Full default grid vs the oracle: fidelity 1.00, stability 1.00."""
    started = time.time()
    trace = assets.load_reference_trace()
    bank = assets.load_default_bank()
    description = assets.load_default_description()
    gateway = ChatGateway(OracleBackend(), clock=SimulatedClock())
    config = ExperimentConfig()           # 16 cells x 54 repetitions
    result = run_experiment(config, trace, bank, gateway, description)
    elapsed = time.time() - started
    assert result.is_complete()
    assert len(result.cells) == 16
    for key, cell in result.cells.items():
        reps = cell.repetition_fidelities()
        assert len(reps) == 54, key
        assert cell.mean_fidelity() == 1.0, key
        assert cell.stability() == 1.0, key
    assert elapsed < 120.0, f"took {elapsed:.1f}s"
    report(f"end-to-end oracle grid (16 cells x 54 reps in {elapsed:.1f}s)")


def test_report_shape():
    """Rendered report carries the grid and the reference constants."""
    trace = assets.load_reference_trace()
    bank = assets.load_default_bank()
    description = assets.load_default_description()
    gateway = ChatGateway(OracleBackend(), clock=SimulatedClock())
    result = run_experiment(ExperimentConfig(repetitions=6), trace, bank,
                            gateway, description)
    text = render_report(result, fmt="table")
    for row in ("zero_shot", "engineered"):
        assert row in text
    for temperature in ("T=0", "T=0.2", "T=0.5", "T=1"):
        assert temperature in text
    for constant in ("0.48", "0.50", "0.97", "0.85", "0.88", "0.74", "0.89"):
        assert constant in text
    reference = load_reference_results()
    assert reference["values"]["zero_shot_closed"]["fidelity"] == 0.48
    payload = json.loads(render_report(result, fmt="json"))
    assert payload["reference"]["values"]["engineered_closed"]["stability"] \
        == 0.85
    report("report shape (grid + reference constants)")
