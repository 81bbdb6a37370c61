"""Access to the bundled reference artifacts shipped as package data."""

import json
from pathlib import Path

from .grading import QuestionBank
from .prompts import SystemDescription
from .tracestore import TraceStore

REFERENCE_TRACE_ID = "reference-21"
SYSTEM_NAME = "the adaptive webshop"


def data_dir():
    return Path(__file__).parent / "data"


def load_reference_trace():
    return TraceStore(data_dir()).load(REFERENCE_TRACE_ID)


def load_default_bank():
    return QuestionBank.load(data_dir() / "question_bank.json")


def load_default_description():
    text = (data_dir() / "system_description.txt").read_text().strip()
    return SystemDescription(name=SYSTEM_NAME, text=text)


def load_labeled_questions():
    return json.loads((data_dir() / "labeled_questions.json").read_text())["questions"]
