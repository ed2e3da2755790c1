import itertools
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from pegd.expr import Pool

settings.register_profile("pegd", deadline=None)
settings.load_profile("pegd")

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def strings(alphabet, max_length):
    """Every string over ``alphabet`` up to ``max_length``, shortest first."""
    for n in range(max_length + 1):
        for chars in itertools.product(alphabet, repeat=n):
            yield "".join(chars)


class Env:
    """Minimal environment for closed expressions (no rules)."""

    def __init__(self, pool, alphabet="abc"):
        self.pool = pool
        self.alphabet = tuple(alphabet)
        self.analysis = {}

    def body(self, rid):
        raise LookupError(rid)

    def name(self, rid):
        raise LookupError(rid)


def closed_exprs(pool: Pool, alphabet="abc", raw=False):
    """Hypothesis strategy for rule-free expressions built in ``pool``.

    With ``raw=True`` nodes are interned without simplification.
    """
    leaves = st.one_of(
        st.sampled_from(alphabet).map(pool.term),
        st.just(pool.empty()),
        st.just(pool.wild()),
        st.just(pool.fail()),
    )

    def extend(inner):
        if raw:
            return st.one_of(
                st.tuples(inner, inner).map(lambda p: pool.raw("seq", *p)),
                st.tuples(inner, inner).map(lambda p: pool.raw("choice", *p)),
                inner.map(lambda e: pool.raw("star", e)),
                inner.map(lambda e: pool.raw("not", e)),
                inner.map(lambda e: pool.raw("and", e)),
            )
        return st.one_of(
            st.tuples(inner, inner).map(lambda p: pool.seq(*p)),
            st.tuples(inner, inner).map(lambda p: pool.choice(*p)),
            inner.map(pool.star),
            inner.map(pool.not_),
            inner.map(pool.and_),
        )

    return st.recursive(leaves, extend, max_leaves=6)


@pytest.fixture
def corpus():
    def load(name):
        from pegd.text import parse_grammar

        return parse_grammar((CORPUS / name).read_text(encoding="utf-8"))

    return load
