"""Two-hop Horn rule enumeration, statistics and application.

Rules have the closed path shape ``h(X,Z) <= p(X,Y), q(Y,Z)``. Mining
enumerates every ordered relation pair (p, q), materializes the body
join once, and tests every candidate head relation against it.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ._kernels import backend
from .errors import InputFormatError
from .kg_store import KnowledgeGraph, Triple

_RULE_ID_RE = re.compile(
    r"^(?P<h>.+)\(X,Z\) <= (?P<p>.+)\(X,Y\), (?P<q>.+)\(Y,Z\)$"
)

RULES_HEADER = (
    "# rule_id\tsupport\tbody_count\tpca_body_count\t"
    "std_conf\tpca_conf\thead_coverage"
)


def format_rule_id(head: str, body_first: str, body_second: str) -> str:
    return f"{head}(X,Z) <= {body_first}(X,Y), {body_second}(Y,Z)"


@dataclass(frozen=True)
class Rule:
    """A 2-hop Horn rule over interned relation ids."""

    head: int
    body_first: int
    body_second: int
    rule_id: str


@dataclass(frozen=True)
class RuleStats:
    support: int
    body_count: int
    pca_body_count: int
    std_conf: float
    pca_conf: float
    head_coverage: float


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds a rule must pass to be reported."""

    min_support: int = 10
    min_std_conf: float = 0.1
    min_head_coverage: float = 0.01
    allow_head_in_body: bool = True

    def __post_init__(self) -> None:
        if self.min_support < 0 or self.min_std_conf < 0 or self.min_head_coverage < 0:
            raise ValueError("mining thresholds must be non-negative")


@dataclass(frozen=True)
class Prediction:
    """A head fact deduced by one rule; novel means absent from the graph
    the rule was applied to."""

    fact: Triple
    rule_id: str
    novel: bool


def make_rule(kg: KnowledgeGraph, head: int, body_first: int, body_second: int) -> Rule:
    rule_id = format_rule_id(
        kg.relation_name(head), kg.relation_name(body_first), kg.relation_name(body_second)
    )
    return Rule(head, body_first, body_second, rule_id)


def parse_rule_id(kg: KnowledgeGraph, rule_id: str) -> Rule:
    """Recover a Rule from its canonical id using the graph's relation table."""
    m = _RULE_ID_RE.match(rule_id)
    if not m:
        raise InputFormatError(f"unparseable rule id: {rule_id!r}")
    ids = []
    for name in (m.group("h"), m.group("p"), m.group("q")):
        rid = kg.relation_ids.get(name)
        if rid is None:
            raise InputFormatError(f"rule id names unknown relation {name!r}: {rule_id!r}")
        ids.append(rid)
    return Rule(ids[0], ids[1], ids[2], rule_id)


def body_pairs(kg: KnowledgeGraph, p: int, q: int) -> set[tuple[int, int]]:
    """Deduplicated (x, z) with some witness y such that p(x, y) and q(y, z)
    both hold; multiple witnesses count once."""
    join = backend.join_pairs(kg, p, q)
    return set(backend.join_as_pairs(kg, join))


def _stats_from_counts(support: int, body_count: int, pca_count: int, n_head: int) -> RuleStats:
    return RuleStats(
        support=support,
        body_count=body_count,
        pca_body_count=pca_count,
        std_conf=support / body_count if body_count else 0.0,
        pca_conf=support / pca_count if pca_count else 0.0,
        head_coverage=support / n_head if n_head else 0.0,
    )


def rule_stats(kg: KnowledgeGraph, rule: Rule) -> RuleStats:
    """Support, body counts and the derived confidence ratios of one rule."""
    n_head = len(kg.by_relation.get(rule.head, ()))
    if n_head == 0:
        raise ValueError(
            f"head relation {kg.relation_name(rule.head)!r} has no facts; rule is not minable"
        )
    join = backend.join_pairs(kg, rule.body_first, rule.body_second)
    body_count = backend.join_size(join)
    if body_count:
        support, pca_count = backend.head_counts(kg, join, rule.head)
    else:
        support, pca_count = 0, 0
    return _stats_from_counts(support, body_count, pca_count, n_head)


def mine_rules(
    kg: KnowledgeGraph, config: MiningConfig, jobs: int = 1
) -> list[tuple[Rule, RuleStats]]:
    """Every rule over ordered (h, p, q) passing all three thresholds,
    sorted by (support desc, rule_id asc).

    With jobs > 1 the relation pairs are processed by a thread pool; the
    compiled kernels release the GIL, and results are merged back into
    the same deterministic order either way.
    """
    if not kg.triples:
        raise ValueError("cannot mine an empty graph")
    kg.warm_arrays()
    active = [r for r in range(kg.num_relations) if kg.by_relation.get(r)]
    head_sizes = {h: len(kg.by_relation[h]) for h in active}

    def mine_pair(pq: tuple[int, int]) -> list[tuple[Rule, RuleStats]]:
        p, q = pq
        join = backend.join_pairs(kg, p, q)
        body_count = backend.join_size(join)
        if body_count == 0:
            return []
        found = []
        for h in active:
            if not config.allow_head_in_body and (h == p or h == q):
                continue
            support, pca_count = backend.head_counts(kg, join, h)
            if support < config.min_support:
                continue
            stats = _stats_from_counts(support, body_count, pca_count, head_sizes[h])
            if stats.std_conf < config.min_std_conf:
                continue
            if stats.head_coverage < config.min_head_coverage:
                continue
            found.append((make_rule(kg, h, p, q), stats))
        return found

    pair_list = [(p, q) for p in active for q in active]
    if jobs > 1 and len(pair_list) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(mine_pair, pair_list))
    else:
        chunks = [mine_pair(pq) for pq in pair_list]

    mined = [item for chunk in chunks for item in chunk]
    mined.sort(key=lambda rs: (-rs[1].support, rs[0].rule_id))
    return mined


def apply_rule(kg: KnowledgeGraph, rule: Rule) -> list[Prediction]:
    """One prediction h(x, z) per body pair, ordered by (subject, object),
    flagged novel when the fact is absent from ``kg``."""
    join = backend.join_pairs(kg, rule.body_first, rule.body_second)
    preds = []
    for x, z in backend.join_as_pairs(kg, join):
        fact = Triple(x, rule.head, z)
        preds.append(Prediction(fact, rule.rule_id, fact not in kg.triples))
    return preds


def write_rules_tsv(path: str | Path, mined: Sequence[tuple[Rule, RuleStats]]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(RULES_HEADER + "\n")
        for rule, st in mined:
            fh.write(
                f"{rule.rule_id}\t{st.support}\t{st.body_count}\t{st.pca_body_count}\t"
                f"{st.std_conf!r}\t{st.pca_conf!r}\t{st.head_coverage!r}\n"
            )


def read_rules_tsv(path: str | Path, kg: KnowledgeGraph) -> list[tuple[Rule, RuleStats]]:
    path = Path(path)
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise InputFormatError(f"{path}:{lineno}: expected 7 fields")
            rule = parse_rule_id(kg, parts[0])
            out.append(
                (
                    rule,
                    RuleStats(
                        support=int(parts[1]),
                        body_count=int(parts[2]),
                        pca_body_count=int(parts[3]),
                        std_conf=float(parts[4]),
                        pca_conf=float(parts[5]),
                        head_coverage=float(parts[6]),
                    ),
                )
            )
    return out
