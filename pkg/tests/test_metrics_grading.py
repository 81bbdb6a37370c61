import numpy as np
import pytest

from dinechat.errors import ConfigurationError
from dinechat.grading import (GroundTruthOracle, QuestionBankEntry,
                              extract_option_letter, grade)
from dinechat.metrics import (compute_effectiveness, compute_fidelity,
                              compute_stability, population_std)


def test_fidelity_worked_examples():
    assert compute_fidelity([1, 1, 1, 1]) == 1.0
    assert compute_fidelity([1, 0, 1, 0]) == 0.5
    assert compute_fidelity([1, 1, 1, 1, 1, 1, 0, 0]) == 0.75


def test_fidelity_validates_input():
    with pytest.raises(ConfigurationError):
        compute_fidelity([])
    with pytest.raises(ConfigurationError):
        compute_fidelity([0.5])


def test_stability_worked_examples():
    assert compute_stability([0.9, 0.9, 0.9]) == 1.0
    assert compute_stability([0.5, 1.0]) == pytest.approx(0.75, abs=1e-12)
    assert compute_stability([0.0, 1.0]) == pytest.approx(0.5, abs=1e-12)


def test_stability_needs_two_repetitions():
    with pytest.raises(ConfigurationError):
        compute_stability([1.0])


def test_effectiveness_is_a_rate():
    assert compute_effectiveness([1, 1, 1]) == 1.0
    assert compute_effectiveness([1, 0, 1, 0]) == 0.5


def test_metrics_match_brute_force_on_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = int(rng.integers(1, 40))
        grades = [int(g) for g in rng.integers(0, 2, m)]
        assert compute_fidelity(grades) == sum(grades) / len(grades)
        reps = int(rng.integers(2, 20))
        fidelities = [float(f) for f in rng.random(reps)]
        mean = sum(fidelities) / reps
        sigma = (sum((f - mean) ** 2 for f in fidelities) / reps) ** 0.5
        assert compute_stability(fidelities) == pytest.approx(1 - sigma,
                                                              abs=1e-12)


def test_bernoulli_sigma_never_exceeds_half():
    rng = np.random.default_rng(1)
    for _ in range(50):
        grades = rng.integers(0, 2, int(rng.integers(2, 60)))
        assert population_std(list(grades)) <= 0.5 + 1e-12


# -------------------------------------------------------------------- grading

def closed_entry(options=("AddServer", "RemoveServer"), correct="a"):
    return QuestionBankEntry(id="q", text="which?", form="closed",
                             style="what/which", question_type="A",
                             options=options, correct=correct)


def open_entry(truth):
    return QuestionBankEntry(id="q", text="why?", form="open", style="why",
                             question_type="A", truth=truth)


def test_grade_closed_extracts_option_letter():
    mark, _ = grade("The answer is (b) because latency fell.",
                    closed_entry(correct="b"), None)
    assert mark == 1
    mark, rationale = grade("The answer is (a).", closed_entry(correct="b"),
                            None)
    assert mark == 0
    assert "expected (b)" in rationale


def test_grade_closed_option_text_fallback():
    assert extract_option_letter("It removed a server.",
                                 ("AddServer", "RemoveServer")) == "b"
    assert extract_option_letter("no option here", ("x1", "x2")) is None


def test_grade_closed_unparseable():
    mark, rationale = grade("hard to say", closed_entry(), None)
    assert mark == 0
    assert "unparseable" in rationale


def test_grade_open_count_with_number_words(reference_trace):
    oracle = GroundTruthOracle(reference_trace)
    entry = open_entry({"kind": "count_uncertain", "from": 6, "to": 8})
    assert oracle.evaluate(entry.truth) == 3
    mark, _ = grade("the agent was uncertain three times (timesteps 6, 7, 8)",
                    entry, oracle)
    assert mark == 1
    mark, _ = grade("it was uncertain four times", entry, oracle)
    assert mark == 0


def test_grade_open_name_containment_and_negation(reference_trace):
    oracle = GroundTruthOracle(reference_trace)
    entry = open_entry({"kind": "dominant_channel", "timestep": 5})
    assert oracle.evaluate(entry.truth) == "user_satisfaction"
    mark, _ = grade("Mainly the user_satisfaction channel drove it.", entry,
                    oracle)
    assert mark == 1
    mark, rationale = grade("It was driven by the revenue channel.", entry,
                            oracle)
    assert mark == 0
    assert "expected user_satisfaction" in rationale
    assert "revenue" in rationale
    mark, _ = grade("It was not user_satisfaction at all.", entry, oracle)
    assert mark == 0


def test_grade_is_deterministic(reference_trace):
    oracle = GroundTruthOracle(reference_trace)
    entry = open_entry({"kind": "chosen_action", "timestep": 5})
    answer = "The system chose AddServer at that point."
    assert grade(answer, entry, oracle) == grade(answer, entry, oracle)


def test_ground_truth_oracle_kinds(reference_trace):
    oracle = GroundTruthOracle(reference_trace)
    assert oracle.evaluate({"kind": "chosen_action", "timestep": 5}) == \
        "AddServer"
    assert oracle.evaluate({"kind": "servers", "timestep": 3}) == 4
    assert oracle.evaluate({"kind": "count_uncertain", "from": 0, "to": 20}) \
        == 15
    assert oracle.evaluate({"kind": "most_frequent_action",
                            "from": 0, "to": 20}) == "AddServer"
    assert oracle.evaluate({"kind": "action_count", "action": "IncreaseDimmer",
                            "from": 0, "to": 20}) == 2
    uncertain = oracle.evaluate({"kind": "uncertain_timesteps",
                                 "from": 0, "to": 20})
    assert len(uncertain) == 15
    with pytest.raises(ConfigurationError):
        oracle.evaluate({"kind": "bogus"})


def test_bank_entries_are_consistent_with_trace(reference_trace, question_bank):
    # frozen closed options must agree with the evaluated ground truth
    oracle = GroundTruthOracle(reference_trace)
    import string
    for item in question_bank.items:
        truth = oracle.evaluate(item["truth"])
        closed = item["closed"]
        correct_text = closed["options"][
            string.ascii_lowercase.index(closed["correct"])]
        if isinstance(truth, int):
            assert correct_text == str(truth)
        else:
            assert correct_text == truth
