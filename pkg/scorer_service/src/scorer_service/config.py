"""Service configuration: models, denylist, listen address, batch limits.

Settings come from an optional INI file; the port and the two model
identifiers can additionally be overridden through environment variables
(SCORER_PORT, SCORER_MODEL, SCORER_EMBEDDING_MODEL).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

# built-in denylist: English stop words plus tokens that never name an
# entity; extend or replace via the config file
DEFAULT_DENYLIST = (
    "the a an of in on at to for with by from as and or but not is are was "
    "were be been being it its this that these those there here his her "
    "their our your my he she they we you i one two first new same other "
    "all any some no such own also only more most many much"
).split()

STUB_MODEL = "stub"


@dataclass
class ServiceConfig:
    model_id: str = "bert-base-uncased"
    embedding_model_id: str = "sentence-transformers/all-MiniLM-L6-v2"
    denylist: tuple[str, ...] = tuple(DEFAULT_DENYLIST)
    host: str = "127.0.0.1"
    port: int = 8000
    max_batch_size: int = 256
    similarity_floor: float = 0.5
    cache_dir: Path = field(default_factory=lambda: Path(".cache") / "scorer_service")

    def __post_init__(self) -> None:
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be >= 1")
        if not -1.0 <= self.similarity_floor <= 1.0:
            raise ValueError("similarity_floor must be a cosine value in [-1, 1]")


def load_config(path: str | Path | None = None) -> ServiceConfig:
    parser = configparser.ConfigParser()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        parser.read(path, encoding="utf-8")

    def get(key: str, fallback: str) -> str:
        return parser.get("service", key, fallback=fallback)

    denylist: tuple[str, ...] = tuple(DEFAULT_DENYLIST)
    denylist_file = parser.get("service", "denylist_file", fallback=None)
    if denylist_file:
        base = path.parent if path is not None else Path.cwd()
        words = (base / denylist_file).read_text(encoding="utf-8").split()
        denylist = tuple(words)

    cfg = ServiceConfig(
        model_id=os.environ.get("SCORER_MODEL", get("model", "bert-base-uncased")),
        embedding_model_id=os.environ.get(
            "SCORER_EMBEDDING_MODEL",
            get("embedding_model", "sentence-transformers/all-MiniLM-L6-v2"),
        ),
        denylist=denylist,
        host=get("host", "127.0.0.1"),
        port=int(os.environ.get("SCORER_PORT", get("port", "8000"))),
        max_batch_size=int(get("max_batch_size", "256")),
        similarity_floor=float(get("similarity_floor", "0.5")),
        cache_dir=Path(get("cache_dir", str(Path(".cache") / "scorer_service"))),
    )
    return cfg
