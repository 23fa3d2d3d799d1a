"""Stable removal of denylisted tokens from ranked candidate lists."""

from __future__ import annotations

from typing import Iterable, Sequence


def filter_tokens(ranked: Sequence[str], denylist: Iterable[str]) -> list[str]:
    """Drop denylisted tokens, preserving the order of the survivors.

    ``ranked`` is best-first; the result is best-first too, with every
    surviving token at the same relative position.
    """
    blocked = set(denylist)
    return [token for token in ranked if token not in blocked]
