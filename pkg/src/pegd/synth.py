"""Random well-formed grammars and counterexample shrinking for differential tests."""

from __future__ import annotations

import random
from typing import Callable

from .analysis import is_well_formed
from .expr import AND, NOT, SEQ, TERM, WILD, Expr, Grammar, Pool, iter_nodes, reachable_rules

SYMBOLS = "abc"

_LEAF_WEIGHTS = [("term", 8), ("nonterm", 4), ("empty", 1), ("wild", 1), ("fail", 1)]
_NODE_WEIGHTS = [("seq", 5), ("choice", 4), ("star", 1), ("not", 2), ("and", 1), ("opt", 1)]


def _pick(rng: random.Random, weighted):
    total = sum(w for _, w in weighted)
    r = rng.random() * total
    for item, w in weighted:
        r -= w
        if r < 0:
            return item
    return weighted[-1][0]


def _consumes_first(e: Expr) -> bool:
    """Syntactic check: ``e`` can only succeed by consuming at least one symbol."""
    while e.kind == SEQ:
        if _consumes_first(e.a):
            return True
        if e.a.kind not in (NOT, AND):
            return False
        e = e.b
    return e.kind in (TERM, WILD)


class _ExprMaker:
    """Builds rule bodies; references in unguarded positions only point forward."""

    def __init__(self, rng: random.Random, pool: Pool, alphabet: str, rules: list[int]):
        self.rng = rng
        self.pool = pool
        self.alphabet = alphabet
        self.rules = rules

    def make(self, depth: int, guarded: bool, index: int) -> Expr:
        rng, pool = self.rng, self.pool
        targets = self.rules if guarded else self.rules[index + 1 :]
        leaves = [(k, w) for k, w in _LEAF_WEIGHTS if k != "nonterm" or targets]
        if depth <= 1 or rng.random() < 0.15:
            kind = _pick(rng, leaves)
        else:
            kind = _pick(rng, _NODE_WEIGHTS)
        sub = lambda g=guarded: self.make(depth - 1, g, index)  # noqa: E731
        if kind == "term":
            return pool.term(rng.choice(self.alphabet))
        if kind == "nonterm":
            return pool.nonterm(rng.choice(targets))
        if kind == "empty":
            return pool.empty()
        if kind == "wild":
            return pool.wild()
        if kind == "fail":
            return pool.fail()
        if kind == "seq":
            head = sub()
            return pool.seq(head, sub(guarded or _consumes_first(head)))
        if kind == "choice":
            return pool.choice(sub(), sub())
        if kind == "star":
            body = sub()
            if not _consumes_first(body):
                head = pool.term(rng.choice(self.alphabet))
                body = pool.seq(head, self.make(depth - 2, True, index)) if depth > 2 else head
            return pool.star(body)
        if kind == "not":
            return pool.not_(sub())
        if kind == "and":
            return pool.and_(sub())
        return pool.optional(sub())


def random_expr(rng: random.Random, pool: Pool, alphabet: str, rules: list[int], depth: int) -> Expr:
    """A random expression that may reference any of ``rules`` only after consuming input."""
    return _ExprMaker(rng, pool, alphabet, rules).make(depth, False, len(rules))


def random_grammar(
    rng: random.Random,
    *,
    max_rules: int = 8,
    max_alphabet: int = 3,
    max_depth: int = 6,
    strict: bool = True,
    attempts: int = 1000,
) -> Grammar:
    """A random grammar whose start expression is well-formed.

    Rule names are ``R0``, ``R1``, ...; ``R0`` is the start rule. Only rules
    reachable from the start are kept. Expression depth is at most
    ``max_depth``.
    """
    for _ in range(attempts):
        pool = Pool()
        alphabet = SYMBOLS[: rng.randint(1, max_alphabet)]
        n = rng.randint(1, max_rules)
        rids = [pool.new_rule() for _ in range(n)]
        maker = _ExprMaker(rng, pool, alphabet, rids)
        rules = {rid: maker.make(rng.randint(2, max_depth), False, i) for i, rid in enumerate(rids)}
        start = pool.nonterm(rids[0])
        keep = reachable_rules([start], rules.__getitem__)
        g = Grammar(
            pool,
            tuple(alphabet),
            {rid: rules[rid] for rid in keep},
            start,
            {rid: f"R{i}" for i, rid in enumerate(rids) if rid in keep},
        )
        if is_well_formed(g.start, g, strict=strict):
            return g
    raise RuntimeError("could not synthesize a well-formed grammar")


def with_rules(g: Grammar, rules: dict[int, Expr]) -> Grammar:
    keep = reachable_rules([g.start], rules.__getitem__)
    return Grammar(
        g.pool,
        g.alphabet,
        {rid: rules[rid] for rid in keep},
        g.start,
        {rid: g.names[rid] for rid in keep},
    )


def _replacements(pool: Pool, e: Expr):
    """Expressions obtained from ``e`` by replacing one node with something smaller."""
    yield pool.eps
    yield pool.nothing
    for child in e.children():
        yield child
    for i, child in enumerate(e.children()):
        for smaller in _replacements(pool, child):
            kids = list(e.children())
            kids[i] = smaller
            yield pool.rebuild(e, tuple(kids))


def _size(g: Grammar) -> int:
    return sum(sum(1 for _ in iter_nodes(b)) for b in g.rules.values())


def shrink(g: Grammar, still_fails: Callable[[Grammar], bool], *, strict: bool = True) -> Grammar:
    """Greedily shrink ``g`` while ``still_fails`` holds and it stays well-formed."""
    improved = True
    while improved:
        improved = False
        for rid in list(g.rules):
            if rid not in g.rules:
                continue
            for smaller in _replacements(g.pool, g.rules[rid]):
                if smaller is g.rules[rid]:
                    continue
                candidate = with_rules(g, {**g.rules, rid: smaller})
                if _size(candidate) >= _size(g):
                    continue
                try:
                    ok = is_well_formed(candidate.start, candidate, strict=strict) and still_fails(candidate)
                except Exception:
                    ok = False
                if ok:
                    g = candidate
                    improved = True
                    break
    return g
