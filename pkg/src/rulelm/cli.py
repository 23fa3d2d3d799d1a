"""Batch command-line front end: split, mine, score, sweep, run-all.

A single INI config file collects all knobs; every setting can also be
overridden on the command line. Each stage reads and writes plain files
so the pipeline is resumable and each step independently testable.

Exit codes: 0 success, 2 config or input error, 3 scorer error,
4 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import logging
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kg_store, lm_bridge, ranker_eval, rule_miner
from ._kernels import BACKEND_NAME
from .errors import ConfigError, InputFormatError, PipelineError, ScorerError
from .kg_store import KnowledgeGraph, SplitSpec
from .lm_bridge import ScorerConfig
from .ranker_eval import HybridConfig, ScoredRule
from .rule_miner import MiningConfig

log = logging.getLogger("rulelm")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCORER = 3
EXIT_INTERNAL = 4

SCORED_HEADER = (
    "# rule_id\tsupport\tbody_count\tpca_body_count\tstd_conf\tpca_conf\t"
    "head_coverage\tmu2\tn_predictions\tn_novel\tn_scored"
)


@dataclass
class PipelineConfig:
    kg_path: Optional[Path]
    train_path: Optional[Path]
    test_path: Optional[Path]
    labels_path: Optional[Path]
    templates_path: Optional[Path]
    output_dir: Path
    split: SplitSpec
    mining: MiningConfig
    scorer: ScorerConfig
    hybrid: HybridConfig
    mu1_kinds: tuple[str, ...]
    skip_missing_templates: bool
    jobs: int


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def load_config(config_path: Optional[str], overrides: argparse.Namespace) -> PipelineConfig:
    """Read the INI config (if any), apply command-line overrides, and
    fail fast on missing inputs before any expensive work starts.

    Relative paths are resolved against the config file's directory.
    With no config file at all, every knob takes its default.
    """
    parser = configparser.ConfigParser()
    base = Path.cwd()
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser.read(path, encoding="utf-8")
        base = path.parent.resolve()

    def get(section: str, key: str, fallback=None):
        return parser.get(section, key, fallback=fallback)

    def resolve(value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        return (base / value).resolve()

    kg_path = resolve(get("paths", "kg"))
    train_path = resolve(get("paths", "train"))
    test_path = resolve(get("paths", "test"))
    labels_path = resolve(get("paths", "labels"))
    templates_path = resolve(get("paths", "templates"))
    output_dir = resolve(get("paths", "output_dir", "out"))

    try:
        split = SplitSpec(
            ratio=float(get("split", "ratio", "0.2")),
            seed=int(get("split", "seed", "42")),
        )
        mining = MiningConfig(
            min_support=int(get("mining", "min_support", "10")),
            min_std_conf=float(get("mining", "min_std_conf", "0.1")),
            min_head_coverage=float(get("mining", "min_head_coverage", "0.01")),
            allow_head_in_body=parser.getboolean(
                "mining", "allow_head_in_body", fallback=True
            ),
        )
        max_preds = get("scorer", "max_predictions_per_rule")
        endpoint = get("scorer", "endpoint", "")
        if endpoint and not endpoint.startswith(("http://", "https://")):
            # fixture paths resolve like any other configured path
            prefix = "fixture:" if endpoint.startswith("fixture:") else ""
            raw = endpoint[len(prefix):]
            endpoint = prefix + str(resolve(raw))
        scorer = ScorerConfig(
            endpoint=endpoint,
            top_n=int(get("scorer", "top_n", "10")),
            batch_size=int(get("scorer", "batch_size", "32")),
            timeout=float(get("scorer", "timeout", "30")),
            max_predictions_per_rule=int(max_preds) if max_preds else None,
            sample_seed=int(get("scorer", "sample_seed", "0")),
            retries=int(get("scorer", "retries", "3")),
            skip_empty_candidates=parser.getboolean(
                "scorer", "skip_empty_candidates", fallback=False
            ),
        )
        hybrid = HybridConfig(
            lambda_grid=_parse_float_list(
                get("hybrid", "lambda_grid", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")
            ),
            k_grid=_parse_int_list(get("hybrid", "k_grid", "5,10,20,50,100")),
        )
        mu1_kinds = tuple(
            kind.strip()
            for kind in get(
                "hybrid", "mu1_kinds", ",".join(ranker_eval.MU1_KINDS)
            ).split(",")
            if kind.strip()
        )
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc

    skip_missing_templates = parser.getboolean(
        "scorer", "skip_missing_templates", fallback=False
    )
    jobs = int(get("run", "jobs", "0")) or (os.cpu_count() or 1)

    cfg = PipelineConfig(
        kg_path=kg_path,
        train_path=train_path,
        test_path=test_path,
        labels_path=labels_path,
        templates_path=templates_path,
        output_dir=output_dir or Path("out").resolve(),
        split=split,
        mining=mining,
        scorer=scorer,
        hybrid=hybrid,
        mu1_kinds=mu1_kinds,
        skip_missing_templates=skip_missing_templates,
        jobs=jobs,
    )
    cfg = _apply_overrides(cfg, overrides)
    _validate(cfg)
    return cfg


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "seed", None) is not None:
        cfg.split = SplitSpec(ratio=cfg.split.ratio, seed=args.seed)
    if getattr(args, "ratio", None) is not None:
        cfg.split = SplitSpec(ratio=args.ratio, seed=cfg.split.seed)
    if getattr(args, "lambda_grid", None) is not None:
        cfg.hybrid = HybridConfig(
            lambda_grid=_parse_float_list(args.lambda_grid), k_grid=cfg.hybrid.k_grid
        )
    if getattr(args, "top_n", None) is not None:
        cfg.scorer = replace(cfg.scorer, top_n=args.top_n)
    if getattr(args, "scorer", None) is not None:
        cfg.scorer = replace(cfg.scorer, endpoint=args.scorer)
    if getattr(args, "mu1", None) is not None:
        cfg.mu1_kinds = tuple(k.strip() for k in args.mu1.split(",") if k.strip())
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    if getattr(args, "output_dir", None) is not None:
        cfg.output_dir = Path(args.output_dir).resolve()
    if getattr(args, "min_support", None) is not None:
        cfg.mining = replace(cfg.mining, min_support=args.min_support)
    return cfg


def _validate(cfg: PipelineConfig) -> None:
    for label, path in (
        ("kg", cfg.kg_path),
        ("train", cfg.train_path),
        ("test", cfg.test_path),
        ("labels", cfg.labels_path),
        ("templates", cfg.templates_path),
    ):
        if path is not None and not path.is_file():
            raise ConfigError(f"{label} file not found: {path}")
    for kind in cfg.mu1_kinds:
        if kind not in ranker_eval.MU1_KINDS:
            raise ConfigError(f"unknown mu1 kind {kind!r}")
    if not cfg.mu1_kinds:
        raise ConfigError("at least one mu1 kind is required")
    if cfg.scorer.endpoint.startswith("fixture:"):
        fixture = Path(cfg.scorer.endpoint[len("fixture:"):])
        if not fixture.is_file():
            raise ConfigError(f"scorer fixture not found: {fixture}")
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output dir {cfg.output_dir}: {exc}") from exc


def _load_logged(path: Path, labels_path: Optional[Path]) -> KnowledgeGraph:
    kg = kg_store.load_triples(path, labels_path)
    log.info(
        "loaded %s: %d facts, %d relations, %d entities",
        path.name, kg.num_triples, kg.num_relations, kg.num_entities,
    )
    return kg


def _load_train_test(cfg: PipelineConfig, write_split: bool = False) -> tuple[KnowledgeGraph, KnowledgeGraph]:
    """Either load explicit train/test files or derive them by the seeded
    split of the original graph."""
    if cfg.train_path is not None:
        if cfg.test_path is None:
            raise ConfigError("a train file requires a matching test file")
        train = _load_logged(cfg.train_path, cfg.labels_path)
        test = _load_logged(cfg.test_path, cfg.labels_path)
        return train, test
    if cfg.kg_path is None:
        raise ConfigError("config must name either a kg file or train/test files")
    kg = _load_logged(cfg.kg_path, cfg.labels_path)
    if not kg.num_triples:
        raise ConfigError(f"graph {cfg.kg_path} holds no facts")
    train, test = kg_store.split_train_test(kg, cfg.split)
    if write_split:
        kg_store.write_triples(cfg.output_dir / "train.tsv", train)
        kg_store.write_split_metadata(cfg.output_dir / "split_meta.tsv", cfg.split, test, train)
    return train, test


def cmd_split(cfg: PipelineConfig) -> Path:
    t0 = time.perf_counter()
    train, test = _load_train_test(cfg, write_split=True)
    log.info(
        "split: kept %d of %d facts (ratio %s, seed %d) in %.2fs",
        train.num_triples, test.num_triples, cfg.split.ratio, cfg.split.seed,
        time.perf_counter() - t0,
    )
    return cfg.output_dir / "train.tsv"


def cmd_mine(cfg: PipelineConfig) -> Path:
    t0 = time.perf_counter()
    train, _ = _load_train_test(cfg, write_split=cfg.train_path is None)
    if not train.num_triples:
        raise ConfigError("train graph is empty; nothing to mine")
    mined = rule_miner.mine_rules(train, cfg.mining, jobs=cfg.jobs)
    rules_path = cfg.output_dir / "rules.tsv"
    rule_miner.write_rules_tsv(rules_path, mined)
    log.info(
        "mine: %d rules (support>=%d, std_conf>=%g, head_coverage>=%g, backend=%s) in %.2fs",
        len(mined), cfg.mining.min_support, cfg.mining.min_std_conf,
        cfg.mining.min_head_coverage, BACKEND_NAME, time.perf_counter() - t0,
    )
    return rules_path


def _sample_predictions(
    preds: list, cap: Optional[int], sample_seed: int, rule_id: str
) -> list:
    """Deterministic per-rule subsample used to bound scorer cost."""
    if cap is None or len(preds) <= cap:
        return preds
    digest = hashlib.sha256(f"{sample_seed}:{rule_id}".encode()).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    keep = sorted(rng.choice(len(preds), size=cap, replace=False))
    return [preds[int(i)] for i in keep]


def cmd_score(cfg: PipelineConfig, rules_path: Optional[Path] = None) -> Path:
    t0 = time.perf_counter()
    if not cfg.scorer.endpoint:
        raise ConfigError("scoring requires a scorer endpoint (URL or fixture path)")
    if cfg.templates_path is None:
        raise ConfigError("scoring requires a templates file")
    train, _ = _load_train_test(cfg)
    rules_path = rules_path or cfg.output_dir / "rules.tsv"
    if not rules_path.is_file():
        raise ConfigError(f"rules file not found: {rules_path}")
    mined = rule_miner.read_rules_tsv(rules_path, train)
    templates = lm_bridge.load_templates(cfg.templates_path)
    labels = train.entity_label_map()

    queries = []
    per_rule: list[dict] = []
    for rule, stats in mined:
        preds = rule_miner.apply_rule(train, rule)
        novel = [p for p in preds if p.novel]
        scored_preds = _sample_predictions(
            novel, cfg.scorer.max_predictions_per_rule, cfg.scorer.sample_seed, rule.rule_id
        )
        entry = {
            "rule": rule,
            "stats": stats,
            "n_predictions": len(preds),
            "n_novel": len(novel),
            "pairs": [],
        }
        missing_template = train.relation_name(rule.head) not in templates
        if missing_template and not cfg.skip_missing_templates:
            raise ConfigError(
                f"no prompt template for relation {train.relation_name(rule.head)!r}"
            )
        if missing_template:
            log.warning(
                "skipping rule %s: no template for %s",
                rule.rule_id, train.relation_name(rule.head),
            )
        else:
            for pred in scored_preds:
                query = lm_bridge.build_prompt(
                    pred, templates, labels, train.relation_names,
                    query_id=f"q{len(queries)}",
                )
                entry["pairs"].append((pred, query))
                queries.append(query)
        per_rule.append(entry)

    results = lm_bridge.score_batch(cfg.scorer, queries, jobs=cfg.jobs)
    by_id = {res.query_id: res for res in results}

    scored_path = cfg.output_dir / "scored.tsv"
    with scored_path.open("w", encoding="utf-8") as fh:
        fh.write(SCORED_HEADER + "\n")
        for entry in per_rule:
            pairs = [
                (pred, by_id[query.query_id]) for pred, query in entry["pairs"]
            ]
            if cfg.scorer.skip_empty_candidates:
                pairs = [(p, r) for p, r in pairs if r.top_tokens]
            value = lm_bridge.mu2(pairs)
            st = entry["stats"]
            fh.write(
                f"{entry['rule'].rule_id}\t{st.support}\t{st.body_count}\t"
                f"{st.pca_body_count}\t{st.std_conf!r}\t{st.pca_conf!r}\t"
                f"{st.head_coverage!r}\t{value!r}\t{entry['n_predictions']}\t"
                f"{entry['n_novel']}\t{len(pairs)}\n"
            )
    log.info(
        "score: %d rules, %d queries sent in %.2fs",
        len(per_rule), len(queries), time.perf_counter() - t0,
    )
    return scored_path


def read_scored_tsv(path: Path, kg: KnowledgeGraph) -> list[tuple]:
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 11:
                raise InputFormatError(f"{path}:{lineno}: expected 11 fields")
            rule = rule_miner.parse_rule_id(kg, parts[0])
            stats = rule_miner.RuleStats(
                support=int(parts[1]),
                body_count=int(parts[2]),
                pca_body_count=int(parts[3]),
                std_conf=float(parts[4]),
                pca_conf=float(parts[5]),
                head_coverage=float(parts[6]),
            )
            rows.append((rule, stats, float(parts[7])))
    return rows


def cmd_sweep(cfg: PipelineConfig, scored_path: Optional[Path] = None) -> Path:
    t0 = time.perf_counter()
    train, test = _load_train_test(cfg)
    scored_path = scored_path or cfg.output_dir / "scored.tsv"
    if not scored_path.is_file():
        raise ConfigError(f"scored rules file not found: {scored_path}")
    rows = read_scored_tsv(scored_path, train)
    if not rows:
        raise ConfigError(f"no scored rules in {scored_path}")
    scored_rules = [
        ScoredRule(rule, stats, kind, value)
        for rule, stats, value in rows
        for kind in cfg.mu1_kinds
    ]
    table = ranker_eval.sweep(scored_rules, train, test, cfg.hybrid)
    sweep_path = cfg.output_dir / "sweep.csv"
    ranker_eval.emit_table(table, sweep_path)
    ranker_eval.write_rule_detail(
        cfg.output_dir / "sweep_detail.csv", scored_rules, train, test,
        cfg.hybrid.lambda_grid,
    )
    log.info(
        "sweep: %d cells over %d rules in %.2fs",
        len(table), len(rows), time.perf_counter() - t0,
    )
    return sweep_path


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulelm",
        description="Mine 2-hop Horn rules from a knowledge graph and rank "
        "them with a hybrid of statistical confidence and masked-LM scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("split", "hold out a per-relation fraction of facts"),
        ("mine", "enumerate and filter rules on the train graph"),
        ("score", "score rule predictions with the configured scorer"),
        ("sweep", "emit the lambda x k average-precision table"),
        ("run-all", "mine, score and sweep in one run"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="INI config file")
        p.add_argument("--jobs", type=int, help="worker threads for mining/scoring")
        p.add_argument("--seed", type=int, help="split seed override")
        p.add_argument("--ratio", type=float, help="split ratio override")
        p.add_argument("--lambda", dest="lambda_grid", help="comma-separated lambda grid")
        p.add_argument("--top-n", dest="top_n", type=int, help="scorer top-n override")
        p.add_argument("--mu1", help="mu1 kinds, comma separated")
        p.add_argument("--scorer", help="scorer endpoint: URL or fixture:<path>")
        p.add_argument("--min-support", dest="min_support", type=int)
        p.add_argument("--output-dir", dest="output_dir", help="output directory override")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        if args.command == "split":
            cmd_split(cfg)
        elif args.command == "mine":
            cmd_mine(cfg)
        elif args.command == "score":
            cmd_score(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg)
        elif args.command == "run-all":
            cmd_mine(cfg)
            cmd_score(cfg)
            cmd_sweep(cfg)
        return EXIT_OK
    except ScorerError as exc:
        log.error("scorer failure: %s", exc)
        return EXIT_SCORER
    except (ConfigError, InputFormatError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except PipelineError as exc:
        log.error("pipeline failure: %s", exc)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
