"""Masked-LM cloze scoring microservice."""

from .app import create_app
from .backends import StubBackend, build_backend
from .config import ServiceConfig, load_config
from .filtering import filter_tokens
from .mapping import EntityTokenMapper

__version__ = "0.1.0"

__all__ = [
    "EntityTokenMapper",
    "ServiceConfig",
    "StubBackend",
    "build_backend",
    "create_app",
    "filter_tokens",
    "load_config",
]
