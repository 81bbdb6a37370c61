"""Evaluation metrics for explanation quality.

Fidelity is the rate of correct explanations over a set of graded answers.
Stability is one minus the population standard deviation of fidelity across
repetitions of the same input; for rates derived from 0/1 grades the standard
deviation never exceeds 0.5, so stability stays within [0.5, 1] there.
Effectiveness is the rate of correct answers among study participants and is
kept as its own named metric for report labeling.
"""

import math

from .errors import ConfigurationError


def compute_fidelity(grades):
    grades = list(grades)
    if not grades:
        raise ConfigurationError("fidelity needs at least one grade")
    if any(g not in (0, 1) for g in grades):
        raise ConfigurationError("grades must be 0 or 1")
    return sum(grades) / len(grades)


def population_std(values):
    values = [float(v) for v in values]
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def compute_stability(fidelities):
    fidelities = list(fidelities)
    if len(fidelities) < 2:
        raise ConfigurationError("stability needs at least two repetitions")
    if any(not 0.0 <= f <= 1.0 for f in fidelities):
        raise ConfigurationError("fidelities must lie in [0, 1]")
    return 1.0 - population_std(fidelities)


def compute_effectiveness(participant_grades):
    return compute_fidelity(participant_grades)
