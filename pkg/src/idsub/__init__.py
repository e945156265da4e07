"""Identifier-substitution adversarial examples for code models: attack, judge, purify, measure."""

__version__ = "0.1.0"
