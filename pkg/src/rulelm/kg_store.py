"""Knowledge graph loading, indexing and train/test splitting.

A :class:`KnowledgeGraph` is an immutable, deduplicated set of
(subject, relation, object) facts. Entity and relation identifiers are
dense integers interned from the input strings in first-appearance
order, so loading the same file twice yields identical ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional

import numpy as np

from .errors import InputFormatError

SPLIT_GENERATOR = "numpy-pcg64"
SPLIT_ROUNDING = "floor"


class Triple(NamedTuple):
    subject: int
    relation: int
    object: int


@dataclass(frozen=True)
class SplitSpec:
    """Per-relation holdout fraction and the seed that selects it."""

    ratio: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"split ratio must be in [0, 1], got {self.ratio}")
        if self.seed < 0:
            raise ValueError(f"split seed must be non-negative, got {self.seed}")


class KnowledgeGraph:
    """Deduplicated triple set with per-relation and join-friendly indexes.

    Instances are immutable after construction; every read path (including
    the lazily built array views used by the compiled kernels) is safe to
    share across threads once construction finished.
    """

    def __init__(
        self,
        entity_names: list[str],
        relation_names: list[str],
        triples: Iterable[Triple],
        entity_labels: Optional[Mapping[int, str]] = None,
    ):
        self.entity_names = list(entity_names)
        self.relation_names = list(relation_names)
        self.entity_ids = {name: i for i, name in enumerate(self.entity_names)}
        self.relation_ids = {name: i for i, name in enumerate(self.relation_names)}
        if len(self.entity_ids) != len(self.entity_names):
            raise ValueError("entity names must be unique")
        if len(self.relation_ids) != len(self.relation_names):
            raise ValueError("relation names must be unique")

        self.triples: frozenset[Triple] = frozenset(Triple(*t) for t in triples)
        self.by_relation: dict[int, set[tuple[int, int]]] = {}
        self.by_relation_subject: dict[tuple[int, int], set[int]] = {}
        self.by_relation_object: dict[tuple[int, int], set[int]] = {}
        for s, r, o in self.triples:
            if not (0 <= s < len(self.entity_names) and 0 <= o < len(self.entity_names)):
                raise ValueError(f"entity id out of range in triple ({s}, {r}, {o})")
            if not 0 <= r < len(self.relation_names):
                raise ValueError(f"relation id out of range in triple ({s}, {r}, {o})")
            self.by_relation.setdefault(r, set()).add((s, o))
            self.by_relation_subject.setdefault((r, s), set()).add(o)
            self.by_relation_object.setdefault((r, o), set()).add(s)

        self._entity_labels = dict(entity_labels) if entity_labels else {}
        self._subjects_cache: dict[int, frozenset[int]] = {}
        self._array_cache: dict[int, dict[str, np.ndarray]] = {}

    # -- basic views ----------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    @property
    def num_triples(self) -> int:
        return len(self.triples)

    def entity_label(self, entity: int) -> str:
        """Display form of an entity: explicit label, else the id string
        with underscores read as spaces."""
        label = self._entity_labels.get(entity)
        if label is not None:
            return label
        return self.entity_names[entity].replace("_", " ")

    def entity_label_map(self) -> dict[int, str]:
        return {i: self.entity_label(i) for i in range(self.num_entities)}

    def relation_name(self, relation: int) -> str:
        return self.relation_names[relation]

    def contains(self, t: Triple) -> bool:
        return Triple(*t) in self.triples

    def contains_named(self, subject: str, relation: str, object_: str) -> bool:
        """Membership test by name, usable across graphs with different
        interning tables."""
        s = self.entity_ids.get(subject)
        r = self.relation_ids.get(relation)
        o = self.entity_ids.get(object_)
        if s is None or r is None or o is None:
            return False
        return Triple(s, r, o) in self.triples

    def triple_names(self, t: Triple) -> tuple[str, str, str]:
        return (
            self.entity_names[t.subject],
            self.relation_names[t.relation],
            self.entity_names[t.object],
        )

    def facts_of(self, relation: int) -> set[tuple[int, int]]:
        """All (subject, object) pairs of the given relation."""
        if not 0 <= relation < self.num_relations:
            raise ValueError(f"unknown relation id {relation}")
        return set(self.by_relation.get(relation, ()))

    def subjects_of(self, relation: int) -> frozenset[int]:
        """Distinct subjects having at least one fact of the relation."""
        cached = self._subjects_cache.get(relation)
        if cached is None:
            cached = frozenset(s for s, _ in self.by_relation.get(relation, ()))
            self._subjects_cache[relation] = cached
        return cached

    # -- array views for the compiled kernels ---------------------------

    def relation_arrays(self, relation: int) -> dict[str, np.ndarray]:
        """CSR-style views of one relation, sorted by (subject, object).

        Keys: ``subj``/``obj`` (parallel fact arrays), ``enc`` (sorted
        unique ``subject * num_entities + object``), ``subj_unique`` and
        ``indptr`` (CSR over the fact arrays), ``subjects`` (alias of
        ``subj_unique``).
        """
        cached = self._array_cache.get(relation)
        if cached is not None:
            return cached
        pairs = sorted(self.by_relation.get(relation, ()))
        n = len(pairs)
        subj = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=n)
        obj = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=n)
        # pairs are unique and (s, o)-sorted, so the encoding is sorted too
        enc = subj * np.int64(max(self.num_entities, 1)) + obj
        subj_unique, starts = np.unique(subj, return_index=True)
        indptr = np.empty(len(subj_unique) + 1, dtype=np.int64)
        indptr[:-1] = starts
        indptr[-1] = n
        cached = {
            "subj": subj,
            "obj": obj,
            "enc": enc,
            "subj_unique": subj_unique,
            "indptr": indptr,
            "subjects": subj_unique,
        }
        self._array_cache[relation] = cached
        return cached

    def warm_arrays(self) -> None:
        """Materialize the array views and subject caches for every
        relation (single-threaded), so concurrent readers never build
        lazy state."""
        for r in range(self.num_relations):
            self.relation_arrays(r)
            self.subjects_of(r)

    # -- derived graphs --------------------------------------------------

    def subset(self, triples: Iterable[Triple]) -> "KnowledgeGraph":
        """New graph over the same interning tables holding only ``triples``."""
        sub = frozenset(Triple(*t) for t in triples)
        missing = sub - self.triples
        if missing:
            raise ValueError(f"subset contains {len(missing)} triples not in the graph")
        return KnowledgeGraph(
            self.entity_names, self.relation_names, sub, self._entity_labels
        )


def load_triples(path: str | Path, label_path: str | Path | None = None) -> KnowledgeGraph:
    """Load a tab-separated triples file, collapsing duplicate facts.

    Lines starting with ``#`` and blank lines are skipped. Every other
    line must hold exactly three non-empty tab-separated fields. An
    optional two-column label file maps entity id strings to display
    labels; ids not present in the graph are ignored.
    """
    path = Path(path)
    entity_names: list[str] = []
    relation_names: list[str] = []
    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    triples: set[Triple] = set()

    def intern_entity(name: str) -> int:
        eid = entity_ids.get(name)
        if eid is None:
            eid = len(entity_names)
            entity_ids[name] = eid
            entity_names.append(name)
        return eid

    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not all(parts):
                raise InputFormatError(
                    f"{path}:{lineno}: expected 3 non-empty tab-separated fields"
                )
            s_name, r_name, o_name = parts
            s = intern_entity(s_name)
            rid = relation_ids.get(r_name)
            if rid is None:
                rid = len(relation_names)
                relation_ids[r_name] = rid
                relation_names.append(r_name)
            o = intern_entity(o_name)
            triples.add(Triple(s, rid, o))

    labels: dict[int, str] = {}
    if label_path is not None:
        label_path = Path(label_path)
        with label_path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not all(parts):
                    raise InputFormatError(
                        f"{label_path}:{lineno}: expected 2 non-empty tab-separated fields"
                    )
                eid = entity_ids.get(parts[0])
                if eid is not None:
                    labels[eid] = parts[1]

    return KnowledgeGraph(entity_names, relation_names, triples, labels)


def from_named_triples(
    rows: Iterable[tuple[str, str, str]],
    labels: Optional[Mapping[str, str]] = None,
) -> KnowledgeGraph:
    """Build a graph from (subject, relation, object) name rows, interning
    in first-appearance order exactly like :func:`load_triples`."""
    entity_names: list[str] = []
    relation_names: list[str] = []
    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    triples: set[Triple] = set()
    for s_name, r_name, o_name in rows:
        s = entity_ids.setdefault(s_name, len(entity_names))
        if s == len(entity_names):
            entity_names.append(s_name)
        r = relation_ids.setdefault(r_name, len(relation_names))
        if r == len(relation_names):
            relation_names.append(r_name)
        o = entity_ids.setdefault(o_name, len(entity_names))
        if o == len(entity_names):
            entity_names.append(o_name)
        triples.add(Triple(s, r, o))
    id_labels = {}
    if labels:
        id_labels = {
            entity_ids[name]: label for name, label in labels.items() if name in entity_ids
        }
    return KnowledgeGraph(entity_names, relation_names, triples, id_labels)


def removed_per_relation(spec: SplitSpec, kg: KnowledgeGraph) -> dict[int, int]:
    """Exact floor(ratio * n_p) per relation, evaluated in rational
    arithmetic over the IEEE value of ``ratio`` so no float rounding can
    shift a count."""
    ratio = Fraction(spec.ratio)
    out = {}
    for r in range(kg.num_relations):
        n = len(kg.by_relation.get(r, ()))
        out[r] = math.floor(ratio * n)
    return out


def split_train_test(kg: KnowledgeGraph, spec: SplitSpec) -> tuple[KnowledgeGraph, KnowledgeGraph]:
    """Hold out floor(ratio * n_p) facts of every relation p.

    The full input graph is the test side; the train side is the input
    minus the held-out facts, chosen uniformly without replacement by a
    PCG64 generator seeded with ``spec.seed``. Identical inputs produce
    identical splits.
    """
    if not kg.triples:
        raise ValueError("cannot split an empty graph")
    rng = np.random.default_rng(spec.seed)
    to_remove = removed_per_relation(spec, kg)
    keep = set(kg.triples)
    for r in range(kg.num_relations):
        n_remove = to_remove[r]
        if n_remove == 0:
            continue
        pairs = sorted(kg.by_relation[r])
        chosen = rng.choice(len(pairs), size=n_remove, replace=False)
        for i in chosen:
            s, o = pairs[int(i)]
            keep.remove(Triple(s, r, o))
    train = kg.subset(keep)
    return train, kg


def write_split_metadata(
    path: str | Path, spec: SplitSpec, original: KnowledgeGraph, train: KnowledgeGraph
) -> None:
    """Record seed, ratio, generator and per-relation removed counts."""
    lines = [
        f"seed\t{spec.seed}",
        f"ratio\t{spec.ratio!r}",
        f"generator\t{SPLIT_GENERATOR}",
        f"rounding\t{SPLIT_ROUNDING}",
        "# relation\tn_facts\tn_removed",
    ]
    for r in range(original.num_relations):
        n = len(original.by_relation.get(r, ()))
        kept = len(train.by_relation.get(r, ()))
        lines.append(f"{original.relation_names[r]}\t{n}\t{n - kept}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_triples(path: str | Path, kg: KnowledgeGraph) -> None:
    """Emit the graph as a sorted tab-separated triples file."""
    rows = sorted(kg.triples)
    with Path(path).open("w", encoding="utf-8") as fh:
        for s, r, o in rows:
            fh.write(f"{kg.entity_names[s]}\t{kg.relation_names[r]}\t{kg.entity_names[o]}\n")
