"""Explainable two-stage search: BM25 candidates re-ranked by a neural
relevance matching model, with term-importance and best-passage explanations
surfaced on the result page."""

__version__ = "0.1.0"
