"""Gowers uniformity norms of Thue-Morse, Rudin-Shapiro and pattern-counting sequences."""

__version__ = "0.1.0"
