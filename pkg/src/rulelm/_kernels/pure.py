"""Plain-Python join/count kernels backed by the graph's dict indexes.

Functionally identical to the compiled backend in ``_speedups``; used
when the extension is not built or is disabled via RULELM_PURE_KERNELS.
"""

from __future__ import annotations

NAME = "pure"


def join_pairs(kg, p: int, q: int):
    """Deduplicated (x, z) pairs with some y satisfying p(x, y), q(y, z)."""
    out: set[tuple[int, int]] = set()
    by_subject = kg.by_relation_subject
    for x, y in kg.by_relation.get(p, ()):
        zs = by_subject.get((q, y))
        if zs:
            for z in zs:
                out.add((x, z))
    return out


def join_size(join) -> int:
    return len(join)


def join_as_pairs(kg, join) -> list[tuple[int, int]]:
    return sorted(join)


def head_counts(kg, join, h: int) -> tuple[int, int]:
    """(support, pca_body_count) of a head relation against a join.

    support counts join pairs that are facts of h; pca_body_count counts
    join pairs whose subject has at least one h fact.
    """
    head_pairs = kg.by_relation.get(h, set())
    head_subjects = kg.subjects_of(h)
    support = 0
    pca = 0
    for pair in join:
        if pair in head_pairs:
            support += 1
        if pair[0] in head_subjects:
            pca += 1
    return support, pca
