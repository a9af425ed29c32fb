"""Case-insensitive Levenshtein matching of free-form values to enum terms."""

from __future__ import annotations

from typing import Optional, Sequence

DEFAULT_MAX_DISTANCE = 3


def levenshtein(a: str, b: str) -> int:
    """Classic Wagner-Fischer edit distance (insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


def fuzzy_normalize(
    raw_value: str,
    legal_values: Sequence[str],
    max_distance: int = DEFAULT_MAX_DISTANCE,
) -> Optional[tuple[str, int]]:
    """Nearest legal value by case-insensitive edit distance.

    Returns (corrected, distance), or None when even the nearest value is
    farther than ``max_distance``. Ties go to the earliest legal value, so
    the result is stable under enum declaration order.
    """
    if not legal_values:
        raise ValueError("legal_values must be non-empty")
    lowered = raw_value.lower()
    best_value: Optional[str] = None
    best_distance = max_distance + 1
    for candidate in legal_values:
        d = levenshtein(lowered, candidate.lower())
        if d < best_distance:
            best_value = candidate
            best_distance = d
            if d == 0:
                break
    if best_value is None:
        return None
    return best_value, best_distance
