"""Shared test utilities: random graph construction and paths."""

from pathlib import Path

import numpy as np

from rulelm.kg_store import KnowledgeGraph, Triple

REPO_ROOT = Path(__file__).resolve().parents[1]
TOY_DIR = REPO_ROOT / "fixtures" / "toy"


def random_kg(seed, max_entities=50, max_relations=10, max_triples=300,
              min_entities=4, min_relations=1, min_triples=1):
    """Seeded random graph whose interned ids equal the raw integers, so
    oracle code can share the triple set directly."""
    rng = np.random.default_rng(seed)
    n_ent = int(rng.integers(min_entities, max_entities + 1))
    n_rel = int(rng.integers(min_relations, max_relations + 1))
    n_tri = int(rng.integers(min_triples, max_triples + 1))
    triples = {
        (
            int(rng.integers(n_ent)),
            int(rng.integers(n_rel)),
            int(rng.integers(n_ent)),
        )
        for _ in range(n_tri)
    }
    kg = KnowledgeGraph(
        [f"e{i}" for i in range(n_ent)],
        [f"r{j}" for j in range(n_rel)],
        [Triple(*t) for t in triples],
    )
    return kg, triples, n_ent, n_rel
