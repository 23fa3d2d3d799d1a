"""Knowledge-graph rule mining with hybrid statistical/LM-based ranking."""

from ._kernels import BACKEND_NAME
from .errors import (
    ConfigError,
    InputFormatError,
    PipelineError,
    ProtocolError,
    ScorerError,
)
from .kg_store import (
    KnowledgeGraph,
    SplitSpec,
    Triple,
    from_named_triples,
    load_triples,
    split_train_test,
    write_split_metadata,
    write_triples,
)
from .lm_bridge import (
    ClozeQuery,
    RankResult,
    ScorerConfig,
    build_prompt,
    fixture_scorer,
    load_templates,
    mu2,
    score_batch,
)
from .ranker_eval import (
    HybridConfig,
    ScoredRule,
    SweepRow,
    emit_table,
    hybrid_score,
    pred_prec_rule,
    pred_prec_set,
    rank_rules,
    sweep,
)
from .rule_miner import (
    MiningConfig,
    Prediction,
    Rule,
    RuleStats,
    apply_rule,
    body_pairs,
    mine_rules,
    rule_stats,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ClozeQuery",
    "ConfigError",
    "HybridConfig",
    "InputFormatError",
    "KnowledgeGraph",
    "MiningConfig",
    "PipelineError",
    "Prediction",
    "ProtocolError",
    "RankResult",
    "Rule",
    "RuleStats",
    "ScoredRule",
    "ScorerConfig",
    "ScorerError",
    "SplitSpec",
    "SweepRow",
    "Triple",
    "apply_rule",
    "body_pairs",
    "build_prompt",
    "emit_table",
    "fixture_scorer",
    "from_named_triples",
    "hybrid_score",
    "load_templates",
    "load_triples",
    "mine_rules",
    "mu2",
    "pred_prec_rule",
    "pred_prec_set",
    "rank_rules",
    "rule_stats",
    "score_batch",
    "split_train_test",
    "sweep",
    "write_split_metadata",
    "write_triples",
]
