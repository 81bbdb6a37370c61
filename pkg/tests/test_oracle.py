import json

from dinechat.dines import encode_dines
from dinechat.oracle import (CANNOT_ANSWER, answer_sequence,
                             extract_payload_and_question)
from dinechat.prompts import Message, PromptSequence
from dinechat.questions import TYPE_A_KINDS, TYPE_B_KINDS


def single(trace, t):
    return encode_dines([trace.record_at(t)], kinds=TYPE_A_KINDS)


def trajectory(trace):
    return encode_dines(trace.records, kinds=TYPE_B_KINDS)


def ask(payload, question):
    messages = [
        Message("system", "intro mentions JSON enclosed in ***:"),
        Message("user", f"***{payload}***"),
        Message("user", question),
    ]
    return answer_sequence(PromptSequence(messages, "A", "engineered"))


def test_payload_extraction_ignores_template_delimiters(reference_trace):
    payload = single(reference_trace, 5)
    messages = [
        Message("system", "You will be given ... enclosed in ***:"),
        Message("user", f"***{payload}***"),
        Message("user", "Why?"),
    ]
    extracted, question = extract_payload_and_question(
        PromptSequence(messages, "A", "engineered"))
    assert json.loads(extracted) == json.loads(payload)
    assert question == "Why?"


def test_zero_shot_extraction(reference_trace):
    payload = single(reference_trace, 5)
    text = f"description\n\n***{payload}***\n\nWhy at timestep 5?"
    extracted, question = extract_payload_and_question(
        PromptSequence([Message("user", text)], "A", "zero_shot"))
    assert json.loads(extracted) == json.loads(payload)
    assert question == "Why at timestep 5?"


def test_oracle_names_dominant_channel(reference_trace):
    answer = ask(single(reference_trace, 5),
                 "Why did the system choose AddServer at timestep 5?")
    assert "user_satisfaction" in answer


def test_oracle_reads_state(reference_trace):
    answer = ask(single(reference_trace, 3),
                 "How many web servers were active at timestep 3?")
    assert answer.startswith("4 ")


def test_oracle_counts_uncertain(reference_trace):
    answer = ask(trajectory(reference_trace),
                 "How often was the decision-making uncertain between "
                 "timesteps 0 and 20?")
    assert answer.startswith("15")


def test_oracle_counts_specific_action(reference_trace):
    answer = ask(trajectory(reference_trace),
                 "How many times was IncreaseDimmer chosen between "
                 "timesteps 0 and 20?")
    assert answer.startswith("2")


def test_oracle_most_frequent_action(reference_trace):
    answer = ask(trajectory(reference_trace),
                 "Which action did the system choose most often between "
                 "timesteps 0 and 20?")
    assert "AddServer" in answer


def test_oracle_stage1_returns_sorted_uncertain_list(reference_trace):
    answer = ask(trajectory(reference_trace),
                 "List the timesteps relevant to answering the following "
                 "question as a JSON array of integers, and nothing else. "
                 "Question: How often was the system uncertain?")
    parsed = json.loads(answer)
    expected = [r.timestep for r in reference_trace.records if r.uncertain]
    assert parsed == expected


def test_oracle_stage2_uses_injected_prefix(reference_trace):
    answer = ask(trajectory(reference_trace),
                 "The relevant timesteps are [6, 7, 8]. How often was the "
                 "decision-making uncertain between timesteps 6 and 8?")
    assert answer.startswith("3")


def test_oracle_answers_closed_with_option_letter(reference_trace):
    question = ("Which adaptation action did the system choose at timestep 5?"
                "\n(a) RemoveServer\n(b) AddServer\n(c) NoOp\n"
                "Answer with a single option letter.")
    assert ask(single(reference_trace, 5), question) == "(b)"


def test_oracle_never_guesses(reference_trace):
    answer = ask(single(reference_trace, 5),
                 "What is the meaning of life?")
    assert answer == CANNOT_ANSWER


def test_oracle_handles_malformed_payload():
    assert ask("not json", "Why at timestep 5?") == CANNOT_ANSWER
