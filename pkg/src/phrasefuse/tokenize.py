"""Shared tokenizer: lowercase, split on non-alphanumeric runs.

The lexical baseline and the deterministic test embedder must see the same
token stream, so both import from here.
"""

import re

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase `text` and return its alphanumeric token runs, in order."""
    return _TOKEN.findall(text.lower())
