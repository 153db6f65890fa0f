"""Finite tau-structures coding trees, their substructure calculus,
leveled-tree operations and finite forcing conditions."""

__version__ = "0.1.0"

from .checker import SentenceId, check, classify
from .core import LevelElem, Node, TauStructure, canonical_model, make_structure
from .errors import KurepaError

__all__ = [
    "__version__", "SentenceId", "check", "classify",
    "LevelElem", "Node", "TauStructure", "canonical_model", "make_structure", "KurepaError",
]
