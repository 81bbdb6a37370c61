"""Deterministic timestep extraction from question text.

Recognizes explicit patterns only, case-insensitively:

* ranges: "timesteps 3 to 9", "between timesteps 3 and 9", "between t=3 and
  t=9", "from timestep 4 through 8" (inclusive on both ends)
* lists:  "timesteps 2, 5 and 9"
* pairs:  "timesteps 3 and 9" (without "between" this names two timesteps)
* singles: "timestep 5", "t=5", "t = 5"

Plain numbers without a timestep marker are never extracted. The parser is a
pure function, so it is idempotent by construction.
"""

import re

_TS = r"(?:time\s*steps?|timesteps?)"
_T_EQ = r"t\s*=\s*"
_NUM = r"(\d+)"

_RANGE_PATTERNS = [
    re.compile(
        rf"between\s+(?:{_TS}\s+|{_T_EQ})?{_NUM}\s+and\s+(?:{_TS}\s+|{_T_EQ})?{_NUM}",
        re.IGNORECASE),
    re.compile(
        rf"from\s+(?:{_TS}\s+|{_T_EQ})?{_NUM}\s+(?:to|through|until)\s+"
        rf"(?:{_TS}\s+|{_T_EQ})?{_NUM}",
        re.IGNORECASE),
    re.compile(
        rf"{_TS}\s+{_NUM}\s*(?:to|through|until|[-–])\s*(?:{_TS}\s+)?{_NUM}",
        re.IGNORECASE),
    re.compile(rf"{_T_EQ}{_NUM}\s*(?:to|through|[-–])\s*{_T_EQ}?{_NUM}",
               re.IGNORECASE),
]

_LIST_PATTERN = re.compile(
    rf"{_TS}\s+(\d+(?:\s*,\s*\d+)*(?:\s*(?:,\s*)?and\s+\d+)?)", re.IGNORECASE)

_SINGLE_PATTERNS = [
    re.compile(rf"{_TS}\s+{_NUM}", re.IGNORECASE),
    re.compile(rf"\b{_T_EQ}{_NUM}", re.IGNORECASE),
]


def extract_timestep_mentions(text):
    """All timesteps explicitly named in `text`, sorted and deduplicated."""
    found = set()
    remaining = text

    def consume(match):
        nonlocal remaining
        start, end = match.span()
        remaining = remaining[:start] + " " * (end - start) + remaining[end:]

    for pattern in _RANGE_PATTERNS:
        for match in list(pattern.finditer(remaining)):
            lo, hi = int(match.group(1)), int(match.group(2))
            if lo > hi:
                lo, hi = hi, lo
            found.update(range(lo, hi + 1))
            consume(match)

    for match in list(_LIST_PATTERN.finditer(remaining)):
        body = match.group(1)
        parts = re.split(r",|\band\b", body)
        nums = [int(p) for p in (part.strip() for part in parts) if p.isdigit()]
        if nums:
            found.update(nums)
            consume(match)

    for pattern in _SINGLE_PATTERNS:
        for match in list(pattern.finditer(remaining)):
            found.add(int(match.group(1)))
            consume(match)

    return sorted(found)
