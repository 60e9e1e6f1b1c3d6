"""Deterministic, seedable simulator of guided visual search: concurrent
parallel priority dynamics plus serial attentional scrutiny over trinary
feature vectors, with an experiment harness and analysis tools."""

__version__ = "0.1.0"
