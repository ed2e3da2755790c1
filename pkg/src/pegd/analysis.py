"""Fixed points over finite lattices, and the grammar analyses built on them.

Analyses are per-environment (a Grammar or a DeriveSession) and cache
their results on it. Rule values are solved together by :func:`fix`;
expression values are structural on top of those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable

from .expr import AND, CHOICE, EMPTY, FAIL, NONTERM, NOT, SEQ, STAR, TERM, WILD, Expr, iter_nodes, reachable_rules

# outcomes of the consumption analysis
SUCCEEDS_EMPTY = "0"
CONSUMES = "1"
FAILS = "f"


class IterationBudgetExceeded(RuntimeError):
    """A fixed-point computation did not settle within its pass budget."""


@dataclass(frozen=True)
class Lattice:
    bottom: Any
    join: Callable[[Any, Any], Any]
    height: int

    def eq(self, a, b) -> bool:
        return a == b


BOOLEAN = Lattice(False, lambda a, b: a or b, 1)


def powerset(size: int) -> Lattice:
    return Lattice(frozenset(), frozenset.union, size)


def fix(
    keys: Iterable[Hashable],
    equation: Callable[[Hashable, Callable[[Hashable], Any]], Any],
    lattice: Lattice,
    *,
    on_pass: Callable[[], None] | None = None,
) -> dict:
    """Least fixed point of ``key -> equation(key, get)`` by joined iteration.

    Every key starts at ``lattice.bottom``. Each pass re-evaluates every key
    and joins the result into the table; iteration stops after a pass that
    changes nothing. ``get`` reads another key's value. A key that has not
    been evaluated yet in the current pass is evaluated first, on demand, so
    acyclic dependencies see settled values whatever the key order; a key
    already being evaluated yields its current value. Unknown keys passed to
    ``get`` join the table at bottom.

    Raises IterationBudgetExceeded after ``#keys * height + #keys + 1`` passes.
    """
    table: dict = {}
    order: list = []
    for k in keys:
        if k not in table:
            table[k] = lattice.bottom
            order.append(k)

    passes = 0
    while True:
        passes += 1
        if passes > len(order) * lattice.height + len(order) + 1:
            raise IterationBudgetExceeded(
                f"no fixed point after {passes - 1} passes over {len(order)} keys"
            )
        if on_pass is not None:
            on_pass()
        done: set = set()
        active: set = set()
        changed = False

        def get(k):
            if k not in table:
                table[k] = lattice.bottom
                order.append(k)
            if k not in done and k not in active:
                evaluate(k)
            return table[k]

        def evaluate(k):
            nonlocal changed
            active.add(k)
            new = equation(k, get)
            active.discard(k)
            done.add(k)
            old = table[k]
            joined = lattice.join(old, new)
            if not lattice.eq(joined, old):
                table[k] = joined
                changed = True

        i = 0
        while i < len(order):
            k = order[i]
            if k not in done:
                evaluate(k)
            i += 1
        if not changed:
            return table


_MISSING = object()


class _RuleAnalysis:
    """Structural analysis whose nonterminal cases are solved with :func:`fix`.

    ``node(e, sub)`` gives the value of a non-nonterminal node from its
    children's values (``sub(child)``). Settled values are kept forever: a
    rule body never changes once it exists, so adding rules to the
    environment cannot invalidate them.
    """

    def __init__(self, env, lattice: Lattice, node):
        self.env = env
        self.lattice = lattice
        self.node = node
        self.rules: dict[int, Any] = {}
        self.exprs: dict[int, Any] = {}

    def __call__(self, e: Expr):
        hit = self.exprs.get(e.id, _MISSING)
        if hit is not _MISSING:
            return hit
        settled_rules = self.rules
        settled = self.exprs
        memo: dict[int, Any] = {}
        node = self.node
        body = self.env.body

        def ev(x: Expr, get):
            v = settled.get(x.id, _MISSING)
            if v is not _MISSING:
                return v
            v = memo.get(x.id, _MISSING)
            if v is not _MISSING:
                return v
            if x.kind == NONTERM:
                v = settled_rules.get(x.a, _MISSING)
                if v is _MISSING:
                    v = get(x.a)
            else:
                v = node(x, lambda c: ev(c, get))
            memo[x.id] = v
            return v

        def equation(key, get):
            if isinstance(key, Expr):
                return ev(key, get)
            return ev(body(key), get)

        table = fix([e], equation, self.lattice, on_pass=memo.clear)
        for k, v in table.items():
            if not isinstance(k, Expr):
                settled_rules[k] = v
        settled.update(memo)
        return settled[e.id]

    def rule(self, rid: int):
        if rid not in self.rules:
            self(self.env.pool.nonterm(rid))
        return self.rules[rid]


def _analysis(env, key, make):
    cache = env.analysis
    a = cache.get(key)
    if a is None:
        a = cache[key] = make()
    return a


# nullability


def _nullable_node(e: Expr, sub) -> bool:
    k = e.kind
    if k == EMPTY or k == STAR:
        return True
    if k in (TERM, WILD, FAIL):
        return False
    if k == SEQ:
        return sub(e.a) and sub(e.b)
    if k == CHOICE:
        return sub(e.a) or sub(e.b)
    if k == NOT:
        return not sub(e.a)
    if k == AND:
        return sub(e.a)
    raise ValueError(k)


def _nullability(env) -> _RuleAnalysis:
    return _analysis(env, "nullable", lambda: _RuleAnalysis(env, BOOLEAN, _nullable_node))


def nullable(e: Expr, env) -> bool:
    """Whether ``e`` accepts the empty input without further lookahead.

    Agrees with ``reference_accepts_exact(e, '')`` on well-formed input; on
    other grammars the value is whatever the joined iteration settles on.
    """
    return _nullability(env)(e)


# consumption (which of: succeed without consuming, consume, fail)


def _consumption_node(e: Expr, sub) -> frozenset:
    k = e.kind
    if k == EMPTY:
        return frozenset({SUCCEEDS_EMPTY})
    if k in (TERM, WILD):
        return frozenset({CONSUMES, FAILS})
    if k == FAIL:
        return frozenset({FAILS})
    out = set()
    if k == SEQ:
        c1, c2 = sub(e.a), sub(e.b)
        ok1 = SUCCEEDS_EMPTY in c1 or CONSUMES in c1
        if SUCCEEDS_EMPTY in c1 and SUCCEEDS_EMPTY in c2:
            out.add(SUCCEEDS_EMPTY)
        if (CONSUMES in c1 and (SUCCEEDS_EMPTY in c2 or CONSUMES in c2)) or (
            SUCCEEDS_EMPTY in c1 and CONSUMES in c2
        ):
            out.add(CONSUMES)
        if FAILS in c1 or (ok1 and FAILS in c2):
            out.add(FAILS)
    elif k == CHOICE:
        c1, c2 = sub(e.a), sub(e.b)
        if SUCCEEDS_EMPTY in c1 or (FAILS in c1 and SUCCEEDS_EMPTY in c2):
            out.add(SUCCEEDS_EMPTY)
        if CONSUMES in c1 or (FAILS in c1 and CONSUMES in c2):
            out.add(CONSUMES)
        if FAILS in c1 and FAILS in c2:
            out.add(FAILS)
    elif k == STAR:
        c = sub(e.a)
        if CONSUMES in c:
            out.add(CONSUMES)
        if FAILS in c:
            out.add(SUCCEEDS_EMPTY)
    elif k == NOT:
        c = sub(e.a)
        if FAILS in c:
            out.add(SUCCEEDS_EMPTY)
        if SUCCEEDS_EMPTY in c or CONSUMES in c:
            out.add(FAILS)
    elif k == AND:
        c = sub(e.a)
        if SUCCEEDS_EMPTY in c or CONSUMES in c:
            out.add(SUCCEEDS_EMPTY)
        if FAILS in c:
            out.add(FAILS)
    else:
        raise ValueError(k)
    return frozenset(out)


def consumption(e: Expr, env) -> frozenset:
    """Over-approximation of the outcomes of ``e`` on any input.

    Result is a subset of {SUCCEEDS_EMPTY, CONSUMES, FAILS}.
    """
    return _analysis(
        env, "consumption", lambda: _RuleAnalysis(env, powerset(3), _consumption_node)
    )(e)


# well-formedness


def _wf_node(env, strict: bool):
    def node(e: Expr, sub) -> bool:
        k = e.kind
        if k in (EMPTY, TERM, WILD, FAIL):
            return True
        if k == SEQ:
            if not sub(e.a):
                return False
            if strict:
                empty_ok = SUCCEEDS_EMPTY in consumption(e.a, env)
            else:
                empty_ok = nullable(e.a, env)
            return sub(e.b) if empty_ok else True
        if k == CHOICE:
            return sub(e.a) and sub(e.b)
        if k == STAR:
            if strict:
                return sub(e.a) and SUCCEEDS_EMPTY not in consumption(e.a, env)
            return sub(e.a) and not nullable(e.a, env)
        if k in (NOT, AND):
            return sub(e.a)
        raise ValueError(k)

    return node


def _well_formedness(env, strict: bool) -> _RuleAnalysis:
    key = "wf-strict" if strict else "wf"
    return _analysis(env, key, lambda: _RuleAnalysis(env, BOOLEAN, _wf_node(env, strict)))


def is_well_formed(e: Expr, env, *, strict: bool = False) -> bool:
    """Well-formedness of ``e``.

    The default rule uses nullability at the end of input, so it accepts
    rules such as ``A <- &'b' A`` that loop on input ``b``. ``strict=True``
    replaces nullability with "can succeed without consuming" from
    :func:`consumption` and requires every node reachable from ``e``
    (through rules too) to pass, not just ``e``. That rules those grammars
    out and guarantees that the reference interpreter terminates.
    """
    wf = _well_formedness(env, strict)
    if not strict:
        return wf(e)
    cache = env.analysis.setdefault("wf-strict-closed", {})
    hit = cache.get(e.id)
    if hit is not None:
        return hit
    nodes = list(iter_nodes(e))
    for rid in reachable_rules([e], env.body):
        nodes.extend(iter_nodes(env.body(rid)))
    ok = all(wf(n) for n in nodes)
    cache[e.id] = ok
    return ok


@dataclass(frozen=True)
class WellFormedness:
    rules: dict[int, bool]
    start: bool


def well_formed(g, *, strict: bool = False) -> WellFormedness:
    a = _well_formedness(g, strict)
    return WellFormedness({rid: a.rule(rid) for rid in g.rules}, a(g.start))


# first sets
#
# The set passed along as "what may follow" enters linearly, so every
# expression's transfer function has the form t -> C | (t & M); that pair is
# what gets solved for each rule.


def _firsts_node(universe: frozenset):
    everything = (frozenset(), universe)
    nothing = (frozenset(), frozenset())

    def node(e: Expr, sub):
        k = e.kind
        if k == EMPTY or k == NOT:
            return everything
        if k == TERM:
            return (frozenset((e.a,)), frozenset())
        if k == WILD:
            return (universe, frozenset())
        if k == FAIL:
            return nothing
        if k == SEQ:
            c1, m1 = sub(e.a)
            c2, m2 = sub(e.b)
            return (c1 | (c2 & m1), m1 & m2)
        if k == CHOICE:
            c1, m1 = sub(e.a)
            c2, m2 = sub(e.b)
            return (c1 | c2, m1 | m2)
        if k == STAR:
            c, _ = sub(e.a)
            return (c, universe)
        if k == AND:
            # t & firsts'(e, everything): restrict what follows to what e can
            # start with, unless e can let anything through
            c, m = sub(e.a)
            return (frozenset(), c | m)
        raise ValueError(k)

    return node


def _pair_lattice(size: int) -> Lattice:
    return Lattice(
        (frozenset(), frozenset()),
        lambda x, y: (x[0] | y[0], x[1] | y[1]),
        2 * size,
    )


def first_transfer(e: Expr, env, alphabet=None) -> tuple[frozenset, frozenset]:
    universe = frozenset(env.alphabet if alphabet is None else alphabet)
    a = _analysis(
        env,
        ("firsts", universe),
        lambda: _RuleAnalysis(env, _pair_lattice(len(universe)), _firsts_node(universe)),
    )
    return a(e)


def first_set(e: Expr, env, alphabet=None) -> frozenset:
    """Terminals that may begin a sentence of ``e`` (an over-approximation)."""
    return first_transfer(e, env, alphabet)[0]
