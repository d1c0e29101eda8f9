"""Dropout prediction for crowdsourcing contest markets."""

__version__ = "0.1.0"
