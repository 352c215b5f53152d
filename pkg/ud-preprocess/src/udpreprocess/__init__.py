"""Adapter that turns raw UTF-8 text into CoNLL-U via an external parser."""

__version__ = "0.1.0"
