"""Token estimation shared by prompt building, selection, and the gateway.

The heuristic is one token per four characters, rounded up. Exact counts are
tokenizer-specific, so the gateway can scale estimates by a safety factor
when talking to a live model; the factor defaults to 1.0 so offline budget
arithmetic stays exact.
"""

import math

REQUEST_TOKEN_LIMIT = 4096
TOKENS_PER_MINUTE = 90_000
CHARS_PER_TOKEN = 4


def estimate_tokens(text, safety_factor=1.0):
    if not text:
        return 0
    return math.ceil(len(text) / CHARS_PER_TOKEN * safety_factor)


def estimate_sequence_tokens(messages, safety_factor=1.0):
    """Sum of per-message estimates for a prompt sequence."""
    return sum(estimate_tokens(m.text, safety_factor) for m in messages)
