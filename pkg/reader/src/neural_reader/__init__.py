"""Transformer span-extraction reader for the odqa wire protocol."""

__version__ = "0.1.0"
