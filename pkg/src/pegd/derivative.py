"""Derivatives of parsing expressions.

``derive(a, e)`` is an expression for what is left of ``e`` after it has
consumed the terminal ``a``. ``delta(a, e)`` is an expression that succeeds
without consuming exactly when ``e`` would have succeeded without consuming
on input that starts with ``a``; any lookahead inside ``e`` has been stepped
past ``a``.

    D ε = ∅        D a = ε        D b = ∅        D _ = ε        D ∅ = ∅
    D (e1 e2)  = D e1 e2 / δ e1 D e2
    D (e1/e2)  = D e1 / δ!e1 D e2
    D e*       = W  where  W <- D e e* / δ e W
    D !e = D &e = ∅
    D A        = D R(A)

    δ ε = ε        δ b = δ _ = δ ∅ = ∅
    δ (e1 e2)  = δ e1 δ e2
    δ (e1/e2)  = δ e1 / δ!e1 δ e2
    δ e*       = W  where  W <- δ e W / δ!e
    δ !e       = !D(e _*)
    δ &e       = &D(e _*)
    δ A        = δ R(A)

Derivatives of nonterminals and repetitions are memoized promises: the key
is registered before the body is computed, and a request for the same key
while it is being computed gets a reference to a fresh derived rule. That
rule is only kept if such a request happened; otherwise the computed body
is used directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import (
    AND,
    CHOICE,
    EMPTY,
    FAIL,
    NONTERM,
    NOT,
    SEQ,
    STAR,
    TERM,
    WILD,
    Expr,
    Grammar,
    UnboundNonterminal,
    reachable_rules,
)

DERIVE = "D"
DELTA = "N"

DEFAULT_MAX_RULES = 100_000


class AlphabetError(ValueError):
    pass


class DerivativeBudgetExceeded(RuntimeError):
    pass


@dataclass
class DerivedCell:
    op: str
    source: Expr
    terminal: str
    rule: int | None = None
    body: Expr | None = None

    @property
    def forced(self) -> bool:
        return self.body is not None


def _symbol_tag(sym: str) -> str:
    return sym if sym.isascii() and sym.isalnum() else "u%04X" % ord(sym)


@dataclass(eq=False)
class DeriveSession:
    """Base grammar plus every rule created while taking its derivatives.

    Behaves as an environment (``body``, ``name``, ``pool``, ``alphabet``)
    for the analyses and for the reference interpreter.
    """

    grammar: Grammar
    max_rules: int = DEFAULT_MAX_RULES
    derived: dict[int, DerivedCell] = field(default_factory=dict)
    memo: dict[tuple[str, int, str], Expr] = field(default_factory=dict)
    analysis: dict = field(default_factory=dict, repr=False)
    steps: int = 0

    def __post_init__(self):
        self.pool = self.grammar.pool
        self.alphabet = self.grammar.alphabet
        self._alphabet_set = frozenset(self.alphabet)
        self._pending: dict[tuple[str, int, str], DerivedCell] = {}
        self._names: dict[int, str] = {}
        self._taken = set(self.grammar.names.values())
        self._any_star = self.pool.star(self.pool.wild())

    @property
    def start(self) -> Expr:
        return self.grammar.start

    # environment protocol

    def body(self, rule: int) -> Expr:
        cell = self.derived.get(rule)
        if cell is None:
            return self.grammar.body(rule)
        if cell.body is None:
            raise UnboundNonterminal(f"derived rule {rule} is still being computed")
        return cell.body

    def name(self, rule: int) -> str:
        if rule in self.derived:
            return self._names[rule]
        return self.grammar.name(rule)

    @property
    def rule_count(self) -> int:
        return len(self.grammar.rules) + len(self.derived)

    # derivatives

    def _check(self, a: str):
        if a not in self._alphabet_set:
            raise AlphabetError(f"terminal {a!r} is not in the alphabet")

    def derive(self, a: str, e: Expr) -> Expr:
        self._check(a)
        return self._derive(a, e)

    def delta(self, a: str, e: Expr) -> Expr:
        self._check(a)
        return self._delta(a, e)

    def derive_string(self, x: str, e: Expr) -> Expr:
        for a in x:
            e = self.derive(a, e)
        return e

    def _fresh_name(self, op: str, a: str) -> str:
        n = len(self.derived) + 1
        name = f"_{op}_{_symbol_tag(a)}_{n}"
        while name in self._taken:
            n += 1
            name = f"_{op}_{_symbol_tag(a)}_{n}"
        self._taken.add(name)
        return name

    def _promise(self, op: str, e: Expr, a: str, compute) -> Expr:
        key = (op, e.id, a)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        cell = self._pending.get(key)
        if cell is not None:
            if cell.rule is None:
                if self.rule_count >= self.max_rules:
                    raise DerivativeBudgetExceeded(
                        f"more than {self.max_rules} rules in derivative session"
                    )
                cell.rule = self.pool.new_rule()
                self._names[cell.rule] = self._fresh_name(op, a)
                self.derived[cell.rule] = cell
            return self.pool.nonterm(cell.rule)
        cell = DerivedCell(op, e, a)
        self._pending[key] = cell
        try:
            body = compute()
        finally:
            del self._pending[key]
        if cell.rule is None:
            result = body
        else:
            cell.body = body
            result = self.pool.nonterm(cell.rule)
        self.memo[key] = result
        return result

    def _derive(self, a: str, e: Expr) -> Expr:
        key = (DERIVE, e.id, a)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.steps += 1
        pool = self.pool
        k = e.kind
        if k == TERM:
            return pool.eps if e.a == a else pool.nothing
        if k == WILD:
            return pool.eps
        if k in (EMPTY, FAIL, NOT, AND):
            return pool.nothing
        if k == NONTERM:
            return self._promise(DERIVE, e, a, lambda: self._derive(a, self.body(e.a)))
        if k == STAR:
            return self._promise(DERIVE, e, a, lambda: self._derive_star(a, e))
        if k == SEQ:
            left = pool.seq(self._derive(a, e.a), e.b)
            n = self._delta(a, e.a)
            out = left if n is pool.nothing else pool.choice(left, pool.seq(n, self._derive(a, e.b)))
        elif k == CHOICE:
            left = self._derive(a, e.a)
            guard = self._delta_not(a, e.a)
            out = left if guard is pool.nothing else pool.choice(left, pool.seq(guard, self._derive(a, e.b)))
        else:
            raise ValueError(k)
        self.memo[key] = out
        return out

    def _derive_star(self, a: str, e: Expr) -> Expr:
        pool = self.pool
        left = pool.seq(self._derive(a, e.a), e)
        n = self._delta(a, e.a)
        if n is pool.nothing:
            return left
        return pool.choice(left, pool.seq(n, self._derive(a, e)))

    def _delta_not(self, a: str, e: Expr) -> Expr:
        """δ of ``!e``: succeeds iff ``e`` fails on input starting with ``a``."""
        return self.pool.not_(self._derive(a, self.pool.seq(e, self._any_star)))

    def _delta(self, a: str, e: Expr) -> Expr:
        key = (DELTA, e.id, a)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.steps += 1
        pool = self.pool
        k = e.kind
        if k == EMPTY:
            return pool.eps
        if k in (TERM, WILD, FAIL):
            return pool.nothing
        if k == NONTERM:
            return self._promise(DELTA, e, a, lambda: self._delta(a, self.body(e.a)))
        if k == STAR:
            return self._promise(DELTA, e, a, lambda: self._delta_star(a, e))
        if k == SEQ:
            n = self._delta(a, e.a)
            out = n if n is pool.nothing else pool.seq(n, self._delta(a, e.b))
        elif k == CHOICE:
            left = self._delta(a, e.a)
            guard = self._delta_not(a, e.a)
            out = left if guard is pool.nothing else pool.choice(left, pool.seq(guard, self._delta(a, e.b)))
        elif k == NOT:
            out = self._delta_not(a, e.a)
        elif k == AND:
            out = pool.and_(self._derive(a, pool.seq(e.a, self._any_star)))
        else:
            raise ValueError(k)
        self.memo[key] = out
        return out

    def _delta_star(self, a: str, e: Expr) -> Expr:
        pool = self.pool
        stop = self._delta_not(a, e.a)
        n = self._delta(a, e.a)
        if n is pool.nothing:
            return stop
        return pool.choice(pool.seq(n, self._delta(a, e)), stop)

    # views

    def grammar_for(self, e: Expr) -> Grammar:
        """A standalone Grammar with start ``e`` and every rule it reaches."""
        rids = reachable_rules([e], self.body)
        return Grammar(
            pool=self.pool,
            alphabet=self.alphabet,
            rules={rid: self.body(rid) for rid in rids},
            start=e,
            names={rid: self.name(rid) for rid in rids},
        )
