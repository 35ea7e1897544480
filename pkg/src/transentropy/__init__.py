"""Replacement-degeneracy and entropy measurement for deterministic translators."""

__version__ = "0.1.0"
