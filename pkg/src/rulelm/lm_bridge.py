"""Cloze prompt construction, scorer clients and the reciprocal-rank score.

Predictions become masked-object prompts ("John lives in [MASK]"), a
scorer (HTTP service or local fixture file) answers each prompt with the
1-based rank of the target among its filtered candidates, and a rule's
predictive score is the mean reciprocal rank of its scored novel
predictions, with misses contributing zero.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import InputFormatError, ProtocolError, ScorerError
from .rule_miner import Prediction
from .kg_store import Triple

MASK_TOKEN = "[MASK]"
SUBJECT_SLOT = "{X}"


@dataclass(frozen=True)
class ClozeQuery:
    query_id: str
    prompt: str
    target_label: str
    prediction_ref: tuple[str, Triple]


@dataclass(frozen=True)
class RankResult:
    """Outcome of one cloze query: 1-based rank of the target among the
    scorer's filtered candidates, or None when absent from the top n."""

    query_id: str
    rank: Optional[int]
    top_tokens: tuple[str, ...]


@dataclass(frozen=True)
class ScorerConfig:
    """Where and how to score: an http(s) URL or a fixture file path."""

    endpoint: str
    top_n: int = 10
    batch_size: int = 32
    timeout: float = 30.0
    max_predictions_per_rule: Optional[int] = None
    sample_seed: int = 0
    retries: int = 3
    skip_empty_candidates: bool = False

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_predictions_per_rule is not None and self.max_predictions_per_rule < 1:
            raise ValueError("max_predictions_per_rule must be >= 1 when set")


def load_templates(path: str | Path) -> dict[str, str]:
    """Relation name -> prompt template, one tab-separated pair per line.

    Every template must contain the subject slot {X} exactly once and the
    literal [MASK] exactly once; the masked slot is always the object.
    """
    path = Path(path)
    templates: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not all(parts):
                raise InputFormatError(
                    f"{path}:{lineno}: expected 2 non-empty tab-separated fields"
                )
            relation, template = parts
            if relation in templates:
                raise InputFormatError(f"{path}:{lineno}: duplicate template for {relation!r}")
            if template.count(SUBJECT_SLOT) != 1 or template.count(MASK_TOKEN) != 1:
                raise InputFormatError(
                    f"{path}:{lineno}: template must contain exactly one "
                    f"{SUBJECT_SLOT} and one {MASK_TOKEN}"
                )
            templates[relation] = template
    return templates


def build_prompt(
    pred: Prediction,
    templates: Mapping[str, str],
    labels: Mapping[int, str],
    relation_names: Sequence[str],
    query_id: Optional[str] = None,
) -> ClozeQuery:
    """Fill the head relation's template with the subject label; the
    object label becomes the target the scorer must rank."""
    relation = relation_names[pred.fact.relation]
    template = templates.get(relation)
    if template is None:
        raise KeyError(f"no prompt template for relation {relation!r}")
    subject_label = labels.get(pred.fact.subject)
    object_label = labels.get(pred.fact.object)
    if subject_label is None or object_label is None:
        missing = pred.fact.subject if subject_label is None else pred.fact.object
        raise KeyError(f"no label for entity id {missing}")
    if query_id is None:
        query_id = f"{pred.rule_id}|{pred.fact.subject}|{pred.fact.object}"
    return ClozeQuery(
        query_id=query_id,
        prompt=template.replace(SUBJECT_SLOT, subject_label),
        target_label=object_label,
        prediction_ref=(pred.rule_id, pred.fact),
    )


class FixtureScorer:
    """Deterministic scorer backed by a prompt -> ranked-token-list file.

    Unknown prompts answer with an empty candidate list (rank absent);
    candidate lists are truncated to the requested top n before the
    case-insensitive target match.
    """

    def __init__(self, path: str | Path):
        path = Path(path)
        table: dict[str, tuple[str, ...]] = {}
        with path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise InputFormatError(
                        f"{path}:{lineno}: expected 2 tab-separated fields"
                    )
                prompt, tokens = parts
                if prompt in table:
                    raise InputFormatError(f"{path}:{lineno}: duplicate prompt {prompt!r}")
                table[prompt] = tuple(t.strip() for t in tokens.split(",") if t.strip())
        self._table = table

    def score_chunk(self, queries: Sequence[ClozeQuery], top_n: int) -> list[RankResult]:
        results = []
        for q in queries:
            tokens = self._table.get(q.prompt, ())[:top_n]
            rank = None
            target = q.target_label.lower()
            for i, tok in enumerate(tokens):
                if tok.lower() == target:
                    rank = i + 1
                    break
            results.append(RankResult(q.query_id, rank, tokens))
        return results


class HttpScorer:
    """Client for the shared POST /v1/score wire protocol."""

    def __init__(self, base_url: str, timeout: float = 30.0, retries: int = 3):
        self.url = base_url.rstrip("/") + "/v1/score"
        self.timeout = timeout
        self.retries = max(1, retries)

    def score_chunk(self, queries: Sequence[ClozeQuery], top_n: int) -> list[RankResult]:
        import requests

        payload = {
            "queries": [
                {"id": q.query_id, "prompt": q.prompt, "target_label": q.target_label}
                for q in queries
            ],
            "top_n": top_n,
        }
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = requests.post(self.url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                time.sleep(0.25 * 2**attempt)
                continue
            if resp.status_code >= 500:
                last_error = ScorerError(f"scorer returned {resp.status_code}")
                time.sleep(0.25 * 2**attempt)
                continue
            if resp.status_code != 200:
                raise ProtocolError(
                    f"scorer rejected request with {resp.status_code}: {resp.text[:200]}"
                )
            return _parse_wire_response(resp.json(), queries)
        raise ScorerError(f"scorer unreachable after {self.retries} attempts: {last_error}")


def _parse_wire_response(body, queries: Sequence[ClozeQuery]) -> list[RankResult]:
    try:
        results = body["results"]
    except (TypeError, KeyError) as exc:
        raise ProtocolError(f"response missing 'results': {body!r:.200}") from exc
    if not isinstance(results, list) or len(results) != len(queries):
        raise ProtocolError(
            f"expected {len(queries)} results, got "
            f"{len(results) if isinstance(results, list) else type(results).__name__}"
        )
    out = []
    for query, item in zip(queries, results):
        try:
            rid = item["id"]
            rank = item["rank"]
            tokens = tuple(item["top_tokens"])
        except (TypeError, KeyError) as exc:
            raise ProtocolError(f"malformed result entry: {item!r}") from exc
        if rid != query.query_id:
            raise ProtocolError(f"result id {rid!r} does not match query {query.query_id!r}")
        if rank is not None and not (1 <= int(rank) <= len(tokens)):
            raise ProtocolError(f"rank {rank!r} outside candidate list for {rid!r}")
        out.append(RankResult(rid, None if rank is None else int(rank), tokens))
    return out


def fixture_scorer(path: str | Path) -> FixtureScorer:
    """Scorer handle answering from a checked-in fixture file."""
    return FixtureScorer(path)


def open_scorer(config: ScorerConfig):
    """Build a scorer handle from the endpoint field: http(s) URLs become
    wire-protocol clients, anything else is read as a fixture file path
    (with an optional ``fixture:`` prefix)."""
    endpoint = config.endpoint
    if endpoint.startswith(("http://", "https://")):
        return HttpScorer(endpoint, timeout=config.timeout, retries=config.retries)
    if endpoint.startswith("fixture:"):
        endpoint = endpoint[len("fixture:"):]
    return FixtureScorer(endpoint)


def score_batch(
    config: ScorerConfig,
    queries: Sequence[ClozeQuery],
    scorer=None,
    jobs: int = 1,
) -> list[RankResult]:
    """Score queries in order, at most ``batch_size`` per request.

    Results align positionally with the input and do not depend on the
    batch partitioning. A failing batch surfaces as ScorerError naming
    its index.
    """
    if scorer is None:
        scorer = open_scorer(config)
    chunks = [
        queries[i : i + config.batch_size]
        for i in range(0, len(queries), config.batch_size)
    ]

    def run(indexed: tuple[int, Sequence[ClozeQuery]]) -> list[RankResult]:
        idx, chunk = indexed
        try:
            results = scorer.score_chunk(chunk, config.top_n)
        except ScorerError as exc:
            raise ScorerError(f"batch {idx} of {len(chunks)} failed: {exc}") from exc
        if len(results) != len(chunk):
            raise ProtocolError(
                f"batch {idx}: scorer returned {len(results)} results for {len(chunk)} queries"
            )
        return results

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_chunk = list(pool.map(run, enumerate(chunks)))
    else:
        per_chunk = [run(item) for item in enumerate(chunks)]
    return [res for chunk in per_chunk for res in chunk]


def mu2(rule_predictions: Sequence[tuple[Prediction, RankResult]]) -> float:
    """Mean reciprocal rank over one rule's scored novel predictions.

    Misses (rank absent) contribute 0 and stay in the denominator; an
    empty list scores 0.
    """
    if not rule_predictions:
        return 0.0
    total = 0.0
    for pred, result in rule_predictions:
        if not pred.novel:
            raise ValueError(
                f"mu2 is defined over novel predictions only, got known fact {pred.fact}"
            )
        if result.rank is not None:
            total += 1.0 / result.rank
    return total / len(rule_predictions)
