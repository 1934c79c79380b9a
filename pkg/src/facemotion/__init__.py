"""Facial-motion tokenization, text-driven generation and evaluation toolkit."""

__version__ = "0.1.0"
