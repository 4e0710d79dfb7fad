"""Coherent control of quantum channels: sector-preserving maps, controlled channels and control supermaps."""

__version__ = "0.1.0"
