"""Interned parsing-expression terms and simplifying constructors.

Every expression lives in a :class:`Pool`. Building the same shape twice in
one pool returns the same object, so ``is`` is structural equality. The
public constructors (``pool.seq``, ``pool.choice``, ...) apply the identity
table below at the root until nothing matches; children are assumed to be
in normal form already because they were built the same way.

    &ε → ε        !ε → ∅        ε e → e          ∅ / e → e
    &_* → ε       !_* → ∅       e ε → e          e / ∅ → e
    &∅ → ∅        !∅ → ε        ∅ e → ∅          e1 / !e1 e2 → e1 / e2
    &(e _*) → &e  !(e _*) → !e  e ∅ → ∅          e1 / !e1 → e1 / ε
    &&e → &e      !&e → !e      _* _* → _*       e / e → e
    &!e → !e      !!e → &e      !e1 !e1 e2 → !e1 e2
                                &e1 &e1 e2 → &e1 e2
    e1 e2 / e1 e3 → e1 (e2 / e3)
    e1 _* / e2 _* → (e1 / e2) _*

Nonterminal references are opaque: no rule looks through them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

EMPTY = "empty"
TERM = "term"
NONTERM = "nonterm"
SEQ = "seq"
CHOICE = "choice"
STAR = "star"
NOT = "not"
AND = "and"
WILD = "wild"
FAIL = "fail"

KINDS = (EMPTY, TERM, NONTERM, SEQ, CHOICE, STAR, NOT, AND, WILD, FAIL)


class Expr:
    """One interned node. ``a``/``b`` hold children, a symbol, or a rule id."""

    __slots__ = ("kind", "a", "b", "id")

    def __init__(self, kind: str, a, b, id: int):
        self.kind = kind
        self.a = a
        self.b = b
        self.id = id

    def children(self) -> tuple[Expr, ...]:
        if self.kind in (SEQ, CHOICE):
            return (self.a, self.b)
        if self.kind in (STAR, NOT, AND):
            return (self.a,)
        return ()

    def __repr__(self) -> str:
        if self.kind in (EMPTY, WILD, FAIL):
            return f"<{self.kind}>"
        if self.kind == TERM:
            return f"<term {self.a!r}>"
        if self.kind == NONTERM:
            return f"<nonterm {self.a}>"
        return f"<{self.kind} {' '.join(repr(c) for c in self.children())}>"


class Pool:
    """Intern table plus rule-id allocator shared by a grammar and its sessions."""

    def __init__(self):
        self._table: dict[tuple, Expr] = {}
        self._next_rule = 0
        self.eps = self.raw(EMPTY)
        self.nothing = self.raw(FAIL)
        self.any = self.raw(WILD)
        self.any_star = self.raw(STAR, self.any)

    def __len__(self) -> int:
        return len(self._table)

    def new_rule(self) -> int:
        rid = self._next_rule
        self._next_rule += 1
        return rid

    def raw(self, kind: str, a=None, b=None) -> Expr:
        """Intern a node exactly as given, with no simplification."""
        key = (
            kind,
            a.id if isinstance(a, Expr) else a,
            b.id if isinstance(b, Expr) else b,
        )
        e = self._table.get(key)
        if e is None:
            e = Expr(kind, a, b, len(self._table))
            self._table[key] = e
        return e

    # leaves

    def empty(self) -> Expr:
        return self.eps

    def fail(self) -> Expr:
        return self.nothing

    def wild(self) -> Expr:
        return self.any

    def term(self, symbol: str) -> Expr:
        if len(symbol) != 1:
            raise ValueError(f"terminal must be a single symbol, got {symbol!r}")
        return self.raw(TERM, symbol)

    def nonterm(self, rule: int) -> Expr:
        return self.raw(NONTERM, rule)

    def literal(self, text: str) -> Expr:
        """Sequence of single-symbol terminals; '' is ε."""
        e = self.eps
        for ch in reversed(text):
            e = self.seq(self.term(ch), e)
        return e

    # compound

    def strip_any_star(self, e: Expr) -> Expr | None:
        """Return ``r`` with ``r _*`` == e (right-nested chains included), else None."""
        if e is self.any_star:
            return self.eps
        if e.kind != SEQ:
            return None
        if e.b is self.any_star:
            return e.a
        rest = self.strip_any_star(e.b)
        if rest is None:
            return None
        return self.seq(e.a, rest)

    def seq(self, e1: Expr, e2: Expr) -> Expr:
        if e1 is self.eps:
            return e2
        if e2 is self.eps:
            return e1
        if e1 is self.nothing or e2 is self.nothing:
            return self.nothing
        if e1 is self.any_star and e2 is self.any_star:
            return e1
        if e1.kind in (NOT, AND):
            if e2 is e1:
                return e1
            if e2.kind == SEQ and e2.a is e1:
                return self.seq(e1, e2.b)
        return self.raw(SEQ, e1, e2)

    def choice(self, e1: Expr, e2: Expr) -> Expr:
        if e1 is self.nothing:
            return e2
        if e2 is self.nothing:
            return e1
        if e1 is e2:
            return e1
        if e2.kind == NOT and e2.a is e1:
            return self.choice(e1, self.eps)
        if e2.kind == SEQ and e2.a.kind == NOT and e2.a.a is e1:
            return self.choice(e1, e2.b)
        if e1.kind == SEQ and e2.kind == SEQ and e1.a is e2.a:
            return self.seq(e1.a, self.choice(e1.b, e2.b))
        r1 = self.strip_any_star(e1)
        if r1 is not None:
            r2 = self.strip_any_star(e2)
            if r2 is not None:
                return self.seq(self.choice(r1, r2), self.any_star)
        return self.raw(CHOICE, e1, e2)

    def star(self, e: Expr) -> Expr:
        return self.raw(STAR, e)

    def not_(self, e: Expr) -> Expr:
        if e is self.eps:
            return self.nothing
        if e is self.nothing:
            return self.eps
        if e.kind == AND:
            return self.not_(e.a)
        if e.kind == NOT:
            return self.and_(e.a)
        r = self.strip_any_star(e)
        if r is not None:
            return self.not_(r)
        return self.raw(NOT, e)

    def and_(self, e: Expr) -> Expr:
        """Positive lookahead; means exactly ``!!e``."""
        if e is self.eps or e is self.nothing:
            return e
        if e.kind in (AND, NOT):
            return e
        r = self.strip_any_star(e)
        if r is not None:
            return self.and_(r)
        return self.raw(AND, e)

    # sugar used by the text format
    def plus(self, e: Expr) -> Expr:
        return self.seq(e, self.star(e))

    def optional(self, e: Expr) -> Expr:
        return self.choice(e, self.eps)

    def rebuild(self, e: Expr, kids: tuple[Expr, ...]) -> Expr:
        """Reconstruct ``e`` over new children through the smart constructors."""
        k = e.kind
        if k == SEQ:
            return self.seq(*kids)
        if k == CHOICE:
            return self.choice(*kids)
        if k == STAR:
            return self.star(kids[0])
        if k == NOT:
            return self.not_(kids[0])
        if k == AND:
            return self.and_(kids[0])
        return e


class UnboundNonterminal(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class Grammar:
    """Alphabet, rule bodies keyed by rule id, and a start expression."""

    pool: Pool
    alphabet: tuple[str, ...]
    rules: Mapping[int, Expr]
    start: Expr
    names: Mapping[int, str]
    analysis: dict = field(default_factory=dict, repr=False)

    def body(self, rule: int) -> Expr:
        try:
            return self.rules[rule]
        except KeyError:
            raise UnboundNonterminal(f"no rule with id {rule}") from None

    def name(self, rule: int) -> str:
        try:
            return self.names[rule]
        except KeyError:
            raise UnboundNonterminal(f"no rule with id {rule}") from None

    def rule_id(self, name: str) -> int:
        for rid, n in self.names.items():
            if n == name:
                return rid
        raise UnboundNonterminal(f"no rule named {name!r}")

    def start_rule(self) -> int | None:
        return self.start.a if self.start.kind == NONTERM else None


def iter_nodes(e: Expr):
    """Every distinct node reachable from ``e`` without crossing rules."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n.id in seen:
            continue
        seen.add(n.id)
        yield n
        stack.extend(n.children())


def referenced_rules(e: Expr) -> list[int]:
    out = []
    for n in iter_nodes(e):
        if n.kind == NONTERM and n.a not in out:
            out.append(n.a)
    return out


def reachable_rules(roots, body: Callable[[int], Expr]) -> list[int]:
    """Rule ids reachable from the given expressions, in discovery order."""
    order: list[int] = []
    seen: set[int] = set()
    pending = []
    for r in roots:
        pending.extend(reversed(referenced_rules(r)))
    while pending:
        rid = pending.pop()
        if rid in seen:
            continue
        seen.add(rid)
        order.append(rid)
        pending.extend(reversed(referenced_rules(body(rid))))
    return order


def terminals_of(e: Expr) -> set[str]:
    return {n.a for n in iter_nodes(e) if n.kind == TERM}


def contains_wild(e: Expr) -> bool:
    return any(n.kind == WILD for n in iter_nodes(e))


def inline(e: Expr, env, depth: int) -> Expr:
    """Replace rule references by their bodies, ``depth`` levels deep."""
    pool = env.pool
    memo: dict[tuple[int, int], Expr] = {}

    def go(x: Expr, d: int) -> Expr:
        if d == 0:
            return x
        key = (x.id, d)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if x.kind == NONTERM:
            out = go(env.body(x.a), d - 1)
        elif x.children():
            out = pool.rebuild(x, tuple(go(c, d) for c in x.children()))
        else:
            out = x
        memo[key] = out
        return out

    return go(e, depth)


# pretty-printing

_PREC = {CHOICE: 0, SEQ: 1, NOT: 2, AND: 2, STAR: 3}
_ESCAPES = {"'": "\\'", "\\": "\\\\", "\n": "\\n", "\t": "\\t"}


def quote_symbol(ch: str) -> str:
    if ch in _ESCAPES:
        return "'" + _ESCAPES[ch] + "'"
    if not ch.isprintable():
        if ord(ch) <= 0xFF:
            return "'\\x%02x'" % ord(ch)
        return "'" + ch + "'"
    return "'" + ch + "'"


def pretty(e: Expr, env) -> str:
    """Canonical text with the fewest parentheses that parse back to ``e``."""

    def go(x: Expr, ctx: int) -> str:
        k = x.kind
        if k == EMPTY:
            return "''"
        if k == TERM:
            return quote_symbol(x.a)
        if k == WILD:
            return "."
        if k == FAIL:
            return "%fail"
        if k == NONTERM:
            return env.name(x.a)
        prec = _PREC[k]
        if k == CHOICE:
            s = go(x.a, 1) + " / " + go(x.b, 0)
        elif k == SEQ:
            s = go(x.a, 2) + " " + go(x.b, 1)
        elif k == STAR:
            s = go(x.a, 3) + "*"
        else:
            s = ("!" if k == NOT else "&") + go(x.a, 2)
        return "(" + s + ")" if prec < ctx else s

    return go(e, 0)
