"""Deterministic simulator of a three-tier super-peer overlay that compares
flooding query routing against decision-tree knowledge routing."""

__version__ = "0.1.0"
