"""Benchmark framework for extracting image-translation models via query access."""

__version__ = "0.1.0"
