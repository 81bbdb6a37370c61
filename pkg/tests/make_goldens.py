"""Regenerate the golden prompt and wire-format files from the bundled data.

Run ``python3 tests/make_goldens.py`` after intentionally changing a template
or the wire encoding, then review the diff.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from golden_utils import GOLDEN_DIR, render_sequence

from dinechat import assets
from dinechat.dines import encode_dines
from dinechat.explain import dine_token_budget
from dinechat.gateway import CompletionParams
from dinechat.prompts import (build_chain_of_thought, build_engineered)
from dinechat.questions import QuestionSpec, classify, select_dines


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    trace = assets.load_reference_trace()
    description = assets.load_default_description()
    params = CompletionParams()

    # Type A, open, engineered
    q_a = QuestionSpec(
        text="Which adaptation action did the system choose at timestep 5?")
    analysis_a = classify(q_a, trace)
    selection_a = select_dines(analysis_a, trace,
                               dine_token_budget(description, q_a, params))
    seq_a = build_engineered(description, analysis_a, selection_a.encoded, q_a)
    (GOLDEN_DIR / "engineered_type_a.txt").write_text(render_sequence(seq_a))

    # Type B, closed, engineered (single stage)
    q_b = QuestionSpec(
        text="How often was the decision-making uncertain between timesteps "
             "0 and 20?",
        form="closed", options=("3", "15", "21"))
    analysis_b = classify(q_b, trace)
    selection_b = select_dines(analysis_b, trace,
                               dine_token_budget(description, q_b, params))
    seq_b = build_engineered(description, analysis_b, selection_b.encoded, q_b)
    (GOLDEN_DIR / "engineered_type_b.txt").write_text(render_sequence(seq_b))

    # Type B, open: two-stage pair with a fixed stage-1 list
    q_b_open = QuestionSpec(
        text="How often was the decision-making uncertain between timesteps "
             "0 and 20?")
    analysis_bo = classify(q_b_open, trace)
    selection_bo = select_dines(analysis_bo, trace,
                                dine_token_budget(description, q_b_open, params))
    stage1, stage2_template = build_chain_of_thought(
        description, analysis_bo, selection_bo.encoded, q_b_open)
    stage2 = stage2_template.render([2, 7, 11])
    (GOLDEN_DIR / "chain_of_thought_type_b.txt").write_text(
        render_sequence(stage1) + "\n====[stage 2]====\n\n"
        + render_sequence(stage2))

    # dominance DINE wire format for a single decision
    record = trace.record_at(5)
    (GOLDEN_DIR / "dominance_dine.json").write_text(
        encode_dines([record], kinds=("dominance",)) + "\n")

    print(f"golden files written to {GOLDEN_DIR}")


if __name__ == "__main__":
    main()
