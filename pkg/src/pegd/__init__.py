"""Derivatives of parsing expression grammars."""

from .analysis import consumption, first_set, fix, is_well_formed, nullable, well_formed
from .derivative import AlphabetError, DerivativeBudgetExceeded, DeriveSession
from .engine import (
    BudgetExhausted,
    Counterexample,
    Equivalent,
    Failure,
    GenConfig,
    GenMode,
    IllFormedGrammar,
    Mode,
    Sentence,
    enumerate_sentences,
    equiv_check,
    generate,
    recognize,
)
from .expr import Expr, Grammar, Pool, inline, pretty
from .reference import FuelExhausted, reference_accepts_exact, reference_match
from .text import GrammarError, parse_expression, parse_grammar, serialize_grammar

__all__ = [
    "AlphabetError",
    "BudgetExhausted",
    "Counterexample",
    "DerivativeBudgetExceeded",
    "DeriveSession",
    "Equivalent",
    "Expr",
    "Failure",
    "FuelExhausted",
    "GenConfig",
    "GenMode",
    "Grammar",
    "GrammarError",
    "IllFormedGrammar",
    "Mode",
    "Pool",
    "Sentence",
    "consumption",
    "enumerate_sentences",
    "equiv_check",
    "first_set",
    "fix",
    "generate",
    "inline",
    "is_well_formed",
    "nullable",
    "parse_expression",
    "parse_grammar",
    "pretty",
    "recognize",
    "reference_accepts_exact",
    "reference_match",
    "serialize_grammar",
    "well_formed",
]
