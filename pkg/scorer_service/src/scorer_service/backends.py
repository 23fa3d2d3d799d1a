"""Fill-mask backends.

A backend supplies four things: the single-token candidate vocabulary,
best-first candidate rankings for a masked prompt, a deterministic text
embedding, and a single-token tokenization check. The real backend wraps
a pinned masked LM plus a sentence-embedding model; the stub backend is
dependency-free and fully deterministic, for tests and offline use.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Optional, Protocol, Sequence

import numpy as np

log = logging.getLogger("scorer_service")

MASK = "[MASK]"


class FillMaskBackend(Protocol):
    uncased: bool

    def vocab_tokens(self) -> list[str]: ...

    def rank_candidates(self, prompt: str, k: int) -> list[str]: ...

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...

    def tokenize_single(self, label: str) -> Optional[str]: ...


class StubBackend:
    """Deterministic stand-in for the model pair.

    Candidate rankings are a prompt-seeded permutation of a small fixed
    vocabulary (optionally overridden per prompt via ``scripted``), and
    the embedding is a hashed character-trigram vector, so cosine
    similarities are real but need no model weights.
    """

    uncased = True

    DEFAULT_VOCAB = (
        "paris london berlin rome madrid vienna budapest prague warsaw lisbon "
        "moscow dublin athens oslo helsinki stockholm copenhagen amsterdam "
        "brussels bern france germany italy spain austria hungary poland "
        "york boston chicago tokyo beijing cairo delhi sydney toronto "
        "doctor lawyer teacher engineer writer painter musician actor "
        "the a an of in on at is was red green blue river mountain valley"
    ).split()

    def __init__(self, vocab: Optional[Sequence[str]] = None,
                 scripted: Optional[dict[str, Sequence[str]]] = None,
                 embedding_dim: int = 256):
        self._vocab = list(vocab) if vocab is not None else list(self.DEFAULT_VOCAB)
        self._scripted = {k: list(v) for k, v in (scripted or {}).items()}
        self._dim = embedding_dim

    def vocab_tokens(self) -> list[str]:
        return list(self._vocab)

    def rank_candidates(self, prompt: str, k: int) -> list[str]:
        scripted = self._scripted.get(prompt)
        if scripted is not None:
            return scripted[:k]
        def key(token: str) -> str:
            return hashlib.sha256(f"{prompt}|{token}".encode()).hexdigest()
        return sorted(self._vocab, key=key)[:k]

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self._dim), dtype=np.float64)
        for row, text in enumerate(texts):
            padded = f"  {text.lower()} "
            for i in range(len(padded) - 2):
                gram = padded[i : i + 3]
                digest = hashlib.sha256(gram.encode()).digest()
                out[row, int.from_bytes(digest[:4], "big") % self._dim] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out

    def tokenize_single(self, label: str) -> Optional[str]:
        token = label.lower()
        return token if token in self._vocab else None


class TransformersBackend:
    """Pinned masked LM + sentence-embedding model behind the protocol.

    The single-token vocabulary excludes special tokens, subword pieces
    and non-alphabetic entries; its embedding matrix is computed once and
    persisted beside the cache directory so restarts are cheap.
    """

    def __init__(self, model_id: str, embedding_model_id: str, cache_dir: Path):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._torch = torch
        self.model_id = model_id
        self.embedding_model_id = embedding_model_id
        self.cache_dir = Path(cache_dir)
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id)
        self.model.eval()
        self.uncased = getattr(self.tokenizer, "do_lower_case", False)

        from sentence_transformers import SentenceTransformer

        self.embedder = SentenceTransformer(embedding_model_id)

        vocab = self.tokenizer.get_vocab()
        special = set(self.tokenizer.all_special_tokens)
        self._vocab = sorted(
            token
            for token in vocab
            if token not in special
            and not token.startswith("##")
            and not token.startswith("[")
            and token.isalpha()
        )
        self._vocab_ids = np.array(
            [vocab[token] for token in self._vocab], dtype=np.int64
        )
        self._token_set = set(self._vocab)

    def vocab_tokens(self) -> list[str]:
        return list(self._vocab)

    def rank_candidates(self, prompt: str, k: int) -> list[str]:
        torch = self._torch
        text = prompt.replace(MASK, self.tokenizer.mask_token)
        inputs = self.tokenizer(text, return_tensors="pt")
        with torch.no_grad():
            logits = self.model(**inputs).logits[0]
        mask_positions = (
            inputs["input_ids"][0] == self.tokenizer.mask_token_id
        ).nonzero(as_tuple=True)[0]
        position = int(mask_positions[0])
        scores = logits[position].numpy()[self._vocab_ids]
        order = np.argsort(-scores, kind="stable")[:k]
        return [self._vocab[i] for i in order]

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        vectors = self.embedder.encode(
            list(texts), normalize_embeddings=True, show_progress_bar=False
        )
        return np.asarray(vectors, dtype=np.float64)

    def tokenize_single(self, label: str) -> Optional[str]:
        text = label.lower() if self.uncased else label
        ids = self.tokenizer(text, add_special_tokens=False)["input_ids"]
        if len(ids) != 1:
            return None
        token = self.tokenizer.convert_ids_to_tokens(ids)[0]
        return token if token in self._token_set else None

    def vocab_embedding_cache_path(self) -> Path:
        digest = hashlib.sha256(
            f"{self.model_id}|{self.embedding_model_id}".encode()
        ).hexdigest()[:16]
        return self.cache_dir / f"vocab_embeddings_{digest}.npz"


def build_backend(config) -> FillMaskBackend:
    from .config import STUB_MODEL

    if config.model_id == STUB_MODEL:
        return StubBackend()
    return TransformersBackend(
        config.model_id, config.embedding_model_id, config.cache_dir
    )
