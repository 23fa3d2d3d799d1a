"""Array-based join/count kernels dispatching to the compiled extension."""

from __future__ import annotations

import numpy as np

from . import _speedups

NAME = "native"

_EMPTY = np.empty(0, dtype=np.int64)


def join_pairs(kg, p: int, q: int) -> np.ndarray:
    """Sorted unique encoded pairs x * num_entities + z of the 2-hop join."""
    p_arr = kg.relation_arrays(p)
    q_arr = kg.relation_arrays(q)
    if not len(p_arr["subj"]) or not len(q_arr["subj"]):
        return _EMPTY
    total = _speedups.join_fanout(p_arr["obj"], q_arr["subj_unique"], q_arr["indptr"])
    if total == 0:
        return _EMPTY
    out = np.empty(total, dtype=np.int64)
    _speedups.fill_join(
        p_arr["subj"],
        p_arr["obj"],
        q_arr["subj_unique"],
        q_arr["indptr"],
        q_arr["obj"],
        np.int64(max(kg.num_entities, 1)),
        out,
    )
    return np.unique(out)


def join_size(join: np.ndarray) -> int:
    return int(join.shape[0])


def join_as_pairs(kg, join: np.ndarray) -> list[tuple[int, int]]:
    n = max(kg.num_entities, 1)
    return [(int(k) // n, int(k) % n) for k in join]


def head_counts(kg, join: np.ndarray, h: int) -> tuple[int, int]:
    if not join.shape[0]:
        return 0, 0
    h_arr = kg.relation_arrays(h)
    support = _speedups.intersect_count(join, h_arr["enc"])
    pca = _speedups.member_count_div(
        join, h_arr["subjects"], np.int64(max(kg.num_entities, 1))
    )
    return int(support), int(pca)
