"""Empathy-oriented dialogue toolkit: emotion detection in a valence-arousal
space, next-emotion control, retrieval and toy-generative response selection,
and reinforcement learning against a simulated human's valence."""

__version__ = "0.1.0"

from .catalog import (
    CatalogError,
    EmotionCatalog,
    EmotionLabel,
    VAPoint,
    catalog_from_config,
    load_catalog,
    load_default_catalog,
    save_catalog,
)

__all__ = [
    "CatalogError",
    "EmotionCatalog",
    "EmotionLabel",
    "VAPoint",
    "catalog_from_config",
    "load_catalog",
    "load_default_catalog",
    "save_catalog",
    "__version__",
]
