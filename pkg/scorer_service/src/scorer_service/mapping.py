"""Entity label to single-vocabulary-token mapping.

Labels that already tokenize to one vocabulary entry map to it with
similarity 1.0. Anything else (multi-token labels, out-of-vocabulary
words) is embedded and matched against the precomputed embeddings of
every single-token vocabulary entry by cosine similarity; below the
configured floor the label is unmappable. The cache is deterministic for
a fixed model pair.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

log = logging.getLogger("scorer_service")


class EntityTokenMapper:
    def __init__(self, backend, similarity_floor: float = 0.5):
        self.backend = backend
        self.similarity_floor = similarity_floor
        self._cache: dict[str, Optional[tuple[str, float]]] = {}
        self._vocab: list[str] | None = None
        self._matrix: np.ndarray | None = None

    def _vocab_matrix(self) -> tuple[list[str], np.ndarray]:
        if self._matrix is None:
            self._vocab = self.backend.vocab_tokens()
            cache_path: Path | None = None
            if hasattr(self.backend, "vocab_embedding_cache_path"):
                cache_path = self.backend.vocab_embedding_cache_path()
            if cache_path is not None and cache_path.is_file():
                stored = np.load(cache_path, allow_pickle=False)
                if list(stored["tokens"]) == self._vocab:
                    self._matrix = stored["embeddings"]
                    log.info("loaded vocab embeddings from %s", cache_path)
                    return self._vocab, self._matrix
            log.info("embedding %d vocabulary tokens", len(self._vocab))
            self._matrix = self.backend.embed(self._vocab)
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                np.savez_compressed(
                    cache_path,
                    tokens=np.array(self._vocab),
                    embeddings=self._matrix,
                )
        return self._vocab, self._matrix

    def warm(self) -> None:
        """Compute (or load) the vocabulary embedding matrix up front so
        request handling never pays for it."""
        self._vocab_matrix()

    def map(self, label: str) -> Optional[tuple[str, float]]:
        """(vocabulary token, cosine similarity) or None when unmappable."""
        if not label:
            raise ValueError("entity label must be nonempty")
        if label in self._cache:
            return self._cache[label]
        result = self._map_uncached(label)
        self._cache[label] = result
        return result

    def _map_uncached(self, label: str) -> Optional[tuple[str, float]]:
        text = label.lower() if self.backend.uncased else label
        direct = self.backend.tokenize_single(text)
        if direct is not None:
            return direct, 1.0
        vocab, matrix = self._vocab_matrix()
        query = self.backend.embed([text])[0]
        similarities = matrix @ query
        best = int(np.argmax(similarities))
        score = float(similarities[best])
        if score < self.similarity_floor:
            return None
        return vocab[best], score
