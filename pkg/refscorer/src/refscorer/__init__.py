"""Toy word-level LSTM language model speaking the scoring wire protocol."""

__version__ = "0.1.0"
