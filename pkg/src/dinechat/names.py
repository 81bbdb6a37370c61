"""Canonical matching of action and channel names in free text."""

import re

NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20, "once": 1, "twice": 2,
}

CHANNEL_ALIASES = {
    "user_satisfaction": ["user satisfaction", "user_satisfaction"],
    "revenue": ["revenue", "revenues"],
    "costs": ["costs", "cost"],
}

ACTION_ALIASES = {
    "AddServer": ["add server", "addserver", "adding a server", "added a server",
                  "add a server", "adds a server", "server addition"],
    "RemoveServer": ["remove server", "removeserver", "removing a server",
                     "removed a server", "remove a server", "removes a server",
                     "server removal"],
    "IncreaseDimmer": ["increase dimmer", "increasedimmer", "increase the dimmer",
                       "increasing the dimmer", "increased the dimmer",
                       "dimmer increase", "raise the dimmer"],
    "DecreaseDimmer": ["decrease dimmer", "decreasedimmer", "decrease the dimmer",
                       "decreasing the dimmer", "decreased the dimmer",
                       "dimmer decrease", "lower the dimmer"],
    "NoOp": ["noop", "no op", "no operation", "do nothing", "nothing"],
}

ALL_ALIASES = {**CHANNEL_ALIASES, **ACTION_ALIASES}


def canon(text):
    """Lowercase and collapse every non-alphanumeric run to one space."""
    return re.sub(r"[^a-z0-9]+", " ", text.lower()).strip()


def find_name(text, name):
    """Position (token index) where `name` (or an alias) occurs, else None."""
    hay = f" {canon(text)} "
    for alias in ALL_ALIASES.get(name, [canon(name)]):
        needle = f" {canon(alias)} "
        pos = hay.find(needle)
        if pos >= 0:
            return len(hay[:pos].split())
    return None


def name_negated(text, name, window=3):
    """True when "not" appears within `window` tokens before the name."""
    idx = find_name(text, name)
    if idx is None:
        return False
    tokens = canon(text).split()
    lo = max(0, idx - window)
    return "not" in tokens[lo:idx]


def names_found(text, names):
    """Names present in the text and not negated."""
    return [n for n in names
            if find_name(text, n) is not None and not name_negated(text, n)]


def extract_numbers(text):
    """Integers in order of appearance, including spelled-out number words."""
    numbers = []
    for token in re.findall(r"\d+|[a-zA-Z]+", text):
        if token.isdigit():
            numbers.append(int(token))
        else:
            word = token.lower()
            if word in NUMBER_WORDS:
                numbers.append(NUMBER_WORDS[word])
    return numbers
