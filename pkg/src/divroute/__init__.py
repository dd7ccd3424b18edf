"""Cooperative planning of spatially diverse routes over uncertain costmaps."""

__version__ = "0.1.0"
