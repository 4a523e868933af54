"""Model bridge: exports the three model-dependent input files the corpus
toolkit consumes — per-token embeddings, detector class probabilities, and
toxicity category scores — from transformer checkpoints."""

from .config import BridgeConfig, BridgeConfigError, BridgeError
from .export import export_embeddings, export_probabilities, export_toxicity

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeConfigError",
    "BridgeError",
    "export_embeddings",
    "export_probabilities",
    "export_toxicity",
    "__version__",
]
