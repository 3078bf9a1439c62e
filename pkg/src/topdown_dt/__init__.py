"""Top-down decision-tree induction over exact truth tables."""

__version__ = "0.1.0"
