"""Kameyama pseudometrics, ultrafractals and their embeddings."""

__version__ = "0.1.0"
