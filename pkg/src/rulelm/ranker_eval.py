"""Hybrid rule ranking and closed-world prediction precision sweeps.

The hybrid quality of a rule is the convex combination
``(1 - lambda) * mu1 + lambda * mu2`` of a statistical confidence (mu1,
either standard or PCA) and the LM-based reciprocal-rank score (mu2).
A sweep ranks the rules at every lambda, takes the top k, and averages
their closed-world prediction precision against a held-out graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .kg_store import KnowledgeGraph
from .rule_miner import Prediction, Rule, RuleStats, apply_rule

STANDARD_CONFIDENCE = "standard_confidence"
PCA_CONFIDENCE = "pca_confidence"
MU1_KINDS = (STANDARD_CONFIDENCE, PCA_CONFIDENCE)

DEFAULT_LAMBDA_GRID = tuple(i / 10 for i in range(11))
DEFAULT_K_GRID = (5, 10, 20, 50, 100)

SWEEP_HEADER = "mu1_kind,lambda,k,avg_precision,n_rules"


@dataclass(frozen=True)
class ScoredRule:
    """A rule with its mined stats, the chosen mu1 kind and its mu2 score.

    mu1 is derived from the stats field selected by mu1_kind, so the two
    can never disagree.
    """

    rule: Rule
    stats: RuleStats
    mu1_kind: str
    mu2: float

    def __post_init__(self) -> None:
        if self.mu1_kind not in MU1_KINDS:
            raise ValueError(f"unknown mu1 kind {self.mu1_kind!r}")
        if not 0.0 <= self.mu2 <= 1.0:
            raise ValueError(f"mu2 must be in [0, 1], got {self.mu2}")

    @property
    def mu1(self) -> float:
        if self.mu1_kind == STANDARD_CONFIDENCE:
            return self.stats.std_conf
        return self.stats.pca_conf


@dataclass(frozen=True)
class HybridConfig:
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    k_grid: tuple[int, ...] = DEFAULT_K_GRID

    def __post_init__(self) -> None:
        if not self.lambda_grid or not self.k_grid:
            raise ValueError("lambda and k grids must be nonempty")
        if any(not 0.0 <= lam <= 1.0 for lam in self.lambda_grid):
            raise ValueError("lambda values must be in [0, 1]")
        if any(k < 1 for k in self.k_grid):
            raise ValueError("k values must be positive")


@dataclass(frozen=True)
class SweepRow:
    mu1_kind: str
    lam: float
    k: int
    avg_precision: float
    n_rules_counted: int
    n_skipped: int


def hybrid_score(mu1: float, mu2: float, lam: float) -> float:
    """Weighted average (1 - lam) * mu1 + lam * mu2; arguments outside
    [0, 1] violate the contract."""
    for name, value in (("mu1", mu1), ("mu2", mu2), ("lambda", lam)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    return (1.0 - lam) * mu1 + lam * mu2


def rank_rules(rules: Sequence[ScoredRule], lam: float) -> list[tuple[ScoredRule, float]]:
    """Rules ordered by hybrid score descending; ties broken by support
    descending, then rule id ascending, giving a total order."""
    if not rules:
        raise ValueError("cannot rank an empty rule list")
    scored = [(r, hybrid_score(r.mu1, r.mu2, lam)) for r in rules]
    scored.sort(key=lambda item: (-item[1], -item[0].stats.support, item[0].rule.rule_id))
    return scored


def _contained_in_test(
    train: KnowledgeGraph, test: KnowledgeGraph, pred: Prediction
) -> bool:
    if train.entity_names is test.entity_names or (
        train.entity_names == test.entity_names
        and train.relation_names == test.relation_names
    ):
        return test.contains(pred.fact)
    # independently interned graphs: compare by name
    return test.contains_named(*train.triple_names(pred.fact))


def pred_prec_rule(
    train: KnowledgeGraph, test: KnowledgeGraph, preds: Sequence[Prediction]
) -> Optional[float]:
    """Fraction of novel predictions confirmed by the test graph, or None
    when the rule made no novel predictions."""
    novel = [p for p in preds if p.novel]
    if not novel:
        return None
    hits = sum(1 for p in novel if _contained_in_test(train, test, p))
    return hits / len(novel)


def pred_prec_set(per_rule: Sequence[Optional[float]]) -> tuple[float, int]:
    """Mean over the defined per-rule precisions plus the count of skipped
    (undefined) rules; raises when every entry is undefined."""
    defined = [v for v in per_rule if v is not None]
    if not defined:
        raise ValueError("prediction precision undefined for every rule in the set")
    return sum(defined) / len(defined), len(per_rule) - len(defined)


def sweep(
    rules: Sequence[ScoredRule],
    train: KnowledgeGraph,
    test: KnowledgeGraph,
    config: HybridConfig,
) -> list[SweepRow]:
    """Average top-k precision for every (mu1 kind, lambda, k) cell.

    Per-rule precision does not depend on the cell, so it is computed
    once per distinct rule. When k exceeds the number of rules, all
    rules are used and the actual count is reported.
    """
    if not rules:
        raise ValueError("sweep needs at least one scored rule")
    precision_cache: dict[str, Optional[float]] = {}
    for scored in rules:
        if scored.rule.rule_id not in precision_cache:
            preds = apply_rule(train, scored.rule)
            precision_cache[scored.rule.rule_id] = pred_prec_rule(train, test, preds)

    rows = []
    kinds = sorted({r.mu1_kind for r in rules})
    for kind in kinds:
        kind_rules = [r for r in rules if r.mu1_kind == kind]
        for lam in sorted(set(config.lambda_grid)):
            ranked = rank_rules(kind_rules, lam)
            for k in sorted(set(config.k_grid)):
                top = ranked[: min(k, len(ranked))]
                values = [precision_cache[r.rule.rule_id] for r, _ in top]
                avg, skipped = pred_prec_set(values)
                rows.append(SweepRow(kind, lam, k, avg, len(values) - skipped, skipped))
    return rows


def emit_table(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Write the sweep as CSV with 6-decimal precision, rows ordered by
    (mu1_kind, lambda, k) ascending; identical tables emit identical bytes."""
    if not rows:
        raise ValueError("refusing to emit an empty sweep table")
    ordered = sorted(rows, key=lambda r: (r.mu1_kind, r.lam, r.k))
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in ordered:
            fh.write(
                f"{row.mu1_kind},{row.lam:g},{row.k},"
                f"{row.avg_precision:.6f},{row.n_rules_counted}\n"
            )


def write_rule_detail(
    path: str | Path,
    rules: Sequence[ScoredRule],
    train: KnowledgeGraph,
    test: KnowledgeGraph,
    lambda_grid: Sequence[float],
) -> None:
    """Companion per-rule debugging table: mu1, mu2, the hybrid score at
    every lambda, precision, and whether the rule was skipped (no novel
    predictions)."""
    lams = sorted(set(lambda_grid))
    header = ["rule_id", "mu1_kind", "mu1", "mu2"]
    header += [f"mu_at_{lam:g}" for lam in lams]
    header += ["precision", "skipped"]
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        cache: dict[str, Optional[float]] = {}
        for scored in rules:
            rid = scored.rule.rule_id
            if rid not in cache:
                cache[rid] = pred_prec_rule(train, test, apply_rule(train, scored.rule))
            prec = cache[rid]
            cells = [f'"{rid}"', scored.mu1_kind, f"{scored.mu1:.6f}", f"{scored.mu2:.6f}"]
            cells += [f"{hybrid_score(scored.mu1, scored.mu2, lam):.6f}" for lam in lams]
            cells += ["" if prec is None else f"{prec:.6f}", "1" if prec is None else "0"]
            fh.write(",".join(cells) + "\n")
