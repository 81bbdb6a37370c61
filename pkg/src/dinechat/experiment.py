"""Experiment grid: prompting x question form x temperature, with top_p
clusters of repetitions inside every cell.

Each cell runs the full question bank once per cluster with a single
completion call per question (n answers = n repetitions). Repetition j's
fidelity is the correct-answer rate over the bank for that repetition;
stability is one minus the population standard deviation of those
repetition fidelities, reported per cluster and across the whole cell.

Completed cells persist as JSONL under the experiment directory, so an
interrupted grid resumes without repeating work.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError, GatewayError
from .explain import answer_question
from .gateway import CompletionParams
from .grading import GroundTruthOracle, grade
from .metrics import compute_fidelity, compute_stability, population_std
from .questions import QuestionSpec

PROMPTINGS = ("zero_shot", "engineered")
FORMS = ("open", "closed")
DEFAULT_TEMPERATURES = (0.0, 0.2, 0.5, 1.0)
DEFAULT_TOP_P_CLUSTERS = (1.0, 0.8, 0.5)


@dataclass(frozen=True)
class ExperimentConfig:
    promptings: tuple = PROMPTINGS
    forms: tuple = FORMS
    temperatures: tuple = DEFAULT_TEMPERATURES
    top_p_clusters: tuple = DEFAULT_TOP_P_CLUSTERS
    repetitions: int = 54
    max_token: int = 350
    model: str = "gpt-3.5-turbo"

    def __post_init__(self):
        if self.repetitions % len(self.top_p_clusters) != 0:
            raise ConfigurationError(
                f"{self.repetitions} repetitions do not split evenly over "
                f"{len(self.top_p_clusters)} clusters")

    @property
    def repetitions_per_cluster(self):
        return self.repetitions // len(self.top_p_clusters)

    def cells(self):
        for prompting in self.promptings:
            for form in self.forms:
                for temperature in self.temperatures:
                    yield (prompting, form, temperature)


def cell_key(prompting, form, temperature):
    return f"{prompting}|{form}|{temperature:g}"


@dataclass
class CellResult:
    prompting: str
    form: str
    temperature: float
    cluster_fidelities: dict            # top_p -> [fidelity per repetition]
    transcripts: list = field(default_factory=list)

    def repetition_fidelities(self):
        out = []
        for top_p in sorted(self.cluster_fidelities, reverse=True):
            out.extend(self.cluster_fidelities[top_p])
        return out

    def mean_fidelity(self):
        reps = self.repetition_fidelities()
        return sum(reps) / len(reps)

    def stability(self):
        return compute_stability(self.repetition_fidelities())

    def sigma(self):
        return population_std(self.repetition_fidelities())

    def cluster_stabilities(self):
        return {top_p: compute_stability(reps) if len(reps) > 1 else None
                for top_p, reps in self.cluster_fidelities.items()}

    def to_dict(self):
        return {
            "prompting": self.prompting,
            "form": self.form,
            "temperature": self.temperature,
            "cluster_fidelities": {str(k): v
                                   for k, v in self.cluster_fidelities.items()},
            "transcripts": self.transcripts,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            prompting=d["prompting"],
            form=d["form"],
            temperature=d["temperature"],
            cluster_fidelities={float(k): v
                                for k, v in d["cluster_fidelities"].items()},
            transcripts=d.get("transcripts", []),
        )


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: dict = field(default_factory=dict)     # key -> CellResult
    incomplete: list = field(default_factory=list)

    def is_complete(self):
        return not self.incomplete and \
            len(self.cells) == len(list(self.config.cells()))


def load_reference_results():
    path = resources.files("dinechat.data").joinpath("reference_results.json")
    return json.loads(path.read_text())


def run_experiment(config, trace, bank, gateway, description, exp_dir=None,
                   progress=None):
    """Run the grid; resumes from `exp_dir` when a cells file exists."""
    oracle = GroundTruthOracle(trace)
    report = ExperimentReport(config=config)
    cells_path = None
    if exp_dir is not None:
        exp_dir = Path(exp_dir)
        exp_dir.mkdir(parents=True, exist_ok=True)
        cells_path = exp_dir / "cells.jsonl"
        if cells_path.exists():
            for line in cells_path.read_text().splitlines():
                if line.strip():
                    cell = CellResult.from_dict(json.loads(line))
                    report.cells[cell_key(cell.prompting, cell.form,
                                          cell.temperature)] = cell

    for prompting, form, temperature in config.cells():
        key = cell_key(prompting, form, temperature)
        if key in report.cells:
            continue
        entries = bank.entries(form)
        try:
            cell = _run_cell(config, prompting, form, temperature, entries,
                             trace, gateway, description, oracle)
        except GatewayError as exc:
            report.incomplete.append({"cell": key, "error": str(exc)})
            continue
        report.cells[key] = cell
        if cells_path is not None:
            with open(cells_path, "a") as fh:
                fh.write(json.dumps(cell.to_dict()) + "\n")
        if progress is not None:
            progress(key, cell)
    return report


def _run_cell(config, prompting, form, temperature, entries, trace, gateway,
              description, oracle):
    reps = config.repetitions_per_cluster
    cluster_fidelities = {}
    transcripts = []
    for top_p in config.top_p_clusters:
        params = CompletionParams(
            n=reps, max_token=config.max_token, temperature=temperature,
            top_p=top_p, model=config.model)
        grades_by_rep = [[] for _ in range(reps)]
        for entry in entries:
            question = QuestionSpec(text=entry.text, form=form,
                                    options=entry.options)
            outcome = answer_question(
                question, trace, gateway, description, params=params,
                strategy=prompting)
            for rep, answer in enumerate(outcome.answers):
                mark, rationale = grade(answer, entry, oracle)
                grades_by_rep[rep].append(mark)
                transcripts.append({
                    "question_id": entry.id,
                    "top_p": top_p,
                    "repetition": rep,
                    "answer": answer,
                    "grade": mark,
                    "rationale": rationale,
                })
        cluster_fidelities[top_p] = [
            compute_fidelity(grades) for grades in grades_by_rep]
    return CellResult(
        prompting=prompting, form=form, temperature=temperature,
        cluster_fidelities=cluster_fidelities, transcripts=transcripts)


# ------------------------------------------------------------------- rendering

def render_report(report, fmt="table"):
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2)
    if fmt != "table":
        raise ConfigurationError(f"unknown report format: {fmt!r}")
    return _render_table(report)


def report_to_dict(report):
    reference = load_reference_results()
    cells = {}
    for key, cell in report.cells.items():
        cells[key] = {
            "prompting": cell.prompting,
            "form": cell.form,
            "temperature": cell.temperature,
            "mean_fidelity": cell.mean_fidelity(),
            "stability": cell.stability(),
            "sigma": cell.sigma(),
            "cluster_fidelities": {str(k): v
                                   for k, v in cell.cluster_fidelities.items()},
            "cluster_stabilities": {str(k): v
                                    for k, v in cell.cluster_stabilities().items()},
        }
    return {
        "grid": {
            "promptings": list(report.config.promptings),
            "forms": list(report.config.forms),
            "temperatures": list(report.config.temperatures),
            "top_p_clusters": list(report.config.top_p_clusters),
            "repetitions": report.config.repetitions,
        },
        "cells": cells,
        "incomplete": report.incomplete,
        "reference": reference,
    }


def _render_table(report):
    reference = load_reference_results()
    temperatures = list(report.config.temperatures)
    header = ["prompting", "form"] + [f"T={t:g}" for t in temperatures]
    widths = [12, 7] + [13] * len(temperatures)
    lines = ["Fidelity / stability per grid cell "
             "(each cell: 3 top_p clusters x repetitions)", ""]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for prompting in report.config.promptings:
        for form in report.config.forms:
            row = [prompting.ljust(widths[0]), form.ljust(widths[1])]
            for temperature in temperatures:
                cell = report.cells.get(cell_key(prompting, form, temperature))
                if cell is None:
                    row.append("(incomplete)".ljust(13))
                else:
                    row.append(
                        f"{cell.mean_fidelity():.2f} / {cell.stability():.2f}"
                        .ljust(13))
            lines.append("  ".join(row))
    lines.append("")
    lines.append("Reference results (reported; displayed, not recomputed):")
    for value in reference["values"].values():
        if "fidelity" in value:
            lines.append(
                f"  {value['label']}: fidelity {value['fidelity']:.2f}, "
                f"stability {value['stability']:.2f}")
        else:
            lines.append(f"  {value['label']}: {value['value']:.2f}")
    if report.incomplete:
        lines.append("")
        lines.append("Incomplete cells:")
        for item in report.incomplete:
            lines.append(f"  {item['cell']}: {item['error']}")
    return "\n".join(lines) + "\n"
