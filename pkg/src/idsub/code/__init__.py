"""Lexing, parsing, identifier tables and capture-free renaming for Java and C."""

from .lexer import Token, tokenize
from .names import LANGUAGES, has_digit_suffix, is_valid_identifier, reserved_names, split_subtokens
from .parser import CodeSnippet, IdentifierEntry, IdentifierTable, parse
from .rename import NotEquivalent, SubstitutionMap, alpha_equivalent, apply_substitution, check_substitution

__all__ = [
    "LANGUAGES",
    "CodeSnippet",
    "IdentifierEntry",
    "IdentifierTable",
    "NotEquivalent",
    "SubstitutionMap",
    "Token",
    "alpha_equivalent",
    "apply_substitution",
    "check_substitution",
    "has_digit_suffix",
    "is_valid_identifier",
    "parse",
    "reserved_names",
    "split_subtokens",
    "tokenize",
]
