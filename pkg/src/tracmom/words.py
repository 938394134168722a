"""Words in two noncommuting letters and their trace-symmetry classes.

Moments of matrix pairs satisfy beta_v = beta_w whenever v is a cyclic
rotation of w, and beta_w = beta_{w*} where w* is the reversed word.  Each
equivalence class is therefore represented by a single canonical word.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

ALPHABET = "XY"

#: empty word, printed as "1" in JSON payloads
ONE = ""


def _rotations(w: str) -> list[str]:
    return [w[i:] + w[:i] for i in range(len(w))] or [w]


@lru_cache(maxsize=None)
def canonical_word(w: str) -> str:
    """Return the lexicographically smallest word among all cyclic rotations
    of ``w`` and of its reverse.

    The map is idempotent and constant on each cyclic-plus-reversal class.
    """
    if any(ch not in ALPHABET for ch in w):
        raise ValueError(f"word must use letters X, Y only, got {w!r}")
    if not w:
        return ONE
    return min(min(_rotations(w)), min(_rotations(w[::-1])))


def degree(w: str) -> int:
    return len(w)


@lru_cache(maxsize=None)
def canonical_words(max_degree: int) -> tuple[str, ...]:
    """All canonical class representatives of degree <= max_degree,
    in degree-then-lexicographic order."""
    out: list[str] = []
    for d in range(max_degree + 1):
        reps = {canonical_word("".join(p)) for p in itertools.product(ALPHABET, repeat=d)}
        out.extend(sorted(reps))
    return tuple(out)


@lru_cache(maxsize=None)
def all_words(max_degree: int) -> tuple[str, ...]:
    """Every word (not just class representatives) of degree <= max_degree."""
    out: list[str] = []
    for d in range(max_degree + 1):
        out.extend("".join(p) for p in itertools.product(ALPHABET, repeat=d))
    return tuple(out)


def word_to_json_key(w: str) -> str:
    return w if w else "1"


def json_key_to_word(key: str) -> str:
    return "" if key == "1" else key
