"""Recognition, sentence generation and equivalence checks driven by derivatives."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum

from .analysis import first_set, is_well_formed, nullable
from .derivative import AlphabetError, DeriveSession
from .expr import Expr, Grammar
from .reference import reference_accepts_exact


class Mode(str, Enum):
    EXACT = "exact"
    PREFIX = "prefix"


class GenMode(str, Enum):
    RANDOM = "random"
    EXHAUSTIVE = "exhaustive"


class IllFormedGrammar(ValueError):
    pass


class GenerationBudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_length: int = 16
    step_budget: int = 100_000
    mode: GenMode = GenMode.RANDOM
    empty_bias: float = 0.25

    def __post_init__(self):
        if self.max_length < 0:
            raise ValueError("max_length must be >= 0")
        if self.step_budget <= 0:
            raise ValueError("step_budget must be > 0")
        if not 0.0 <= self.empty_bias <= 1.0:
            raise ValueError("empty_bias must be in [0, 1]")


@dataclass(frozen=True)
class Sentence:
    text: str


class _Failure:
    def __repr__(self):
        return "Failure"


class _BudgetExhausted:
    def __repr__(self):
        return "BudgetExhausted"


Failure = _Failure()
BudgetExhausted = _BudgetExhausted()

GenResult = Sentence | _Failure | _BudgetExhausted  # type: ignore[operator]


def _check_input(session: DeriveSession, x: str):
    bad = sorted(set(x) - set(session.alphabet))
    if bad:
        raise AlphabetError(f"input symbols outside the alphabet: {bad!r}")


def recognize(session: DeriveSession, e: Expr, x: str, mode: Mode = Mode.EXACT) -> bool:
    """``x`` is accepted iff the derivative of ``e`` by ``x`` is nullable.

    Exact mode requires ``e`` to consume all of ``x``; prefix mode recognizes
    ``e _*``, i.e. ``e`` matching some prefix of ``x``.
    """
    _check_input(session, x)
    if Mode(mode) is Mode.PREFIX:
        e = session.pool.seq(e, session.pool.star(session.pool.wild()))
    return nullable(session.derive_string(x, e), session)


def _require_generable(session: DeriveSession, e: Expr):
    if not session.alphabet:
        raise IllFormedGrammar("cannot generate over an empty alphabet")
    if not is_well_formed(e, session, strict=True):
        raise IllFormedGrammar("expression is not well-formed")


class _Search:
    def __init__(self, session: DeriveSession, budget: int, use_firsts: bool = True):
        self.session = session
        self.budget = budget
        self.spent = 0
        self.use_firsts = use_firsts
        self.fail = session.pool.fail()

    def candidates(self, e: Expr) -> list[str]:
        if self.use_firsts:
            return sorted(first_set(e, self.session))
        return list(self.session.alphabet)

    def step(self, a: str, e: Expr) -> Expr:
        self.spent += 1
        if self.spent > self.budget:
            raise GenerationBudgetExhausted(f"more than {self.budget} derivative steps")
        return self.session.derive(a, e)


def generate(
    session: DeriveSession,
    e: Expr,
    cfg: GenConfig = GenConfig(),
    rng: random.Random | None = None,
    *,
    use_firsts: bool = True,
):
    """One sentence of ``e``: pick a first-set terminal, recurse on the derivative.

    Terminals are tried in a seeded random order and the search backtracks
    when a choice leads nowhere. Once ``max_length`` symbols have been
    produced only the empty continuation is allowed; before that, a nullable
    expression stops early with probability ``empty_bias``, and after every
    terminal has failed. Returns a Sentence, Failure, or BudgetExhausted.
    Pass ``rng`` to continue a random stream across calls.
    """
    _require_generable(session, e)
    if GenMode(cfg.mode) is GenMode.EXHAUSTIVE:
        try:
            found = enumerate_sentences(session, e, cfg.max_length, budget=cfg.step_budget)
        except GenerationBudgetExhausted:
            return BudgetExhausted
        return Sentence(found[0]) if found else Failure
    rng = rng if rng is not None else random.Random(cfg.seed)
    search = _Search(session, cfg.step_budget, use_firsts)

    def gen(x: Expr, length: int) -> str | None:
        if x is search.fail:
            return None
        ok_empty = nullable(x, session)
        if length >= cfg.max_length:
            return "" if ok_empty else None
        if ok_empty and rng.random() < cfg.empty_bias:
            return ""
        options = search.candidates(x)
        rng.shuffle(options)
        for a in options:
            rest = gen(search.step(a, x), length + 1)
            if rest is not None:
                return a + rest
        return "" if ok_empty else None

    try:
        out = gen(e, 0)
    except GenerationBudgetExhausted:
        return BudgetExhausted
    return Failure if out is None else Sentence(out)


def enumerate_sentences(
    session: DeriveSession,
    e: Expr,
    max_length: int,
    *,
    budget: int | None = None,
    use_firsts: bool = True,
) -> list[str]:
    """Every sentence of ``e`` up to ``max_length``, shortest first then lexicographic."""
    _require_generable(session, e)
    search = _Search(session, budget if budget is not None else 10**9, use_firsts)
    found = []

    def walk(x: Expr, prefix: str):
        if nullable(x, session):
            found.append(prefix)
        if len(prefix) >= max_length:
            return
        for a in search.candidates(x):
            d = search.step(a, x)
            if d is not search.fail:
                walk(d, prefix + a)

    walk(e, "")
    found.sort(key=lambda s: (len(s), s))
    return found


@dataclass(frozen=True)
class Equivalent:
    """No difference found within the sampling and exhaustive budgets."""

    samples: int
    exhaustive_length: int


@dataclass(frozen=True)
class Counterexample:
    text: str
    accepted_by: str  # "left" or "right"


def _union_alphabet(g: Grammar, alphabet: tuple[str, ...]) -> Grammar:
    if g.alphabet == alphabet:
        return g
    return Grammar(g.pool, alphabet, g.rules, g.start, g.names)


def equiv_check(
    g1: Grammar,
    g2: Grammar,
    samples: int = 200,
    max_length: int = 8,
    seed: int = 0,
    *,
    exhaustive_limit: int = 4,
):
    """Probabilistic language-equivalence test of two grammars' start expressions.

    Every string up to ``min(max_length, exhaustive_limit)`` is checked with
    the reference interpreter, then ``samples`` sentences generated from each
    side are checked against the other. Returns Equivalent or the first
    Counterexample found.
    """
    alphabet = tuple(sorted(set(g1.alphabet) | set(g2.alphabet)))
    g1 = _union_alphabet(g1, alphabet)
    g2 = _union_alphabet(g2, alphabet)
    s1, s2 = DeriveSession(g1), DeriveSession(g2)
    for s in (s1, s2):
        if not is_well_formed(s.start, s, strict=True):
            raise IllFormedGrammar("input grammar is not well-formed")

    limit = min(max_length, exhaustive_limit)
    for n in range(limit + 1):
        for chars in itertools.product(alphabet, repeat=n):
            x = "".join(chars)
            in1 = reference_accepts_exact(g1.start, x, g1)
            in2 = reference_accepts_exact(g2.start, x, g2)
            if in1 != in2:
                return Counterexample(x, "left" if in1 else "right")

    if alphabet:
        rng = random.Random(seed)
        cfg = GenConfig(seed=seed, max_length=max_length)
        for source, other, other_env, side in (
            (s1, g2.start, g2, "left"),
            (s2, g1.start, g1, "right"),
        ):
            for _ in range(samples):
                r = generate(source, source.start, cfg, rng)
                if isinstance(r, Sentence) and not reference_accepts_exact(other, r.text, other_env):
                    return Counterexample(r.text, side)
    return Equivalent(samples, limit)
