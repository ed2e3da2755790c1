"""Ford's matching relation, executed directly.

``reference_match(e, x, env)`` returns the unconsumed suffix of ``x`` or
``None`` for failure. It is deliberately naive (no packrat table): it is the
oracle the derivative machinery is checked against.
"""

from __future__ import annotations

from .expr import AND, CHOICE, EMPTY, FAIL, NONTERM, NOT, SEQ, STAR, TERM, WILD, Expr

DEFAULT_FUEL = 1_000_000
_FAILED = -1


class FuelExhausted(RuntimeError):
    """The step budget ran out, usually because the grammar is not well-formed."""


class _Matcher:
    def __init__(self, env, text: str, fuel: int):
        self.env = env
        self.text = text
        self.fuel = fuel

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("reference interpreter ran out of fuel")

    def match(self, e: Expr, pos: int) -> int:
        self.tick()
        k = e.kind
        text = self.text
        if k == EMPTY:
            return pos
        if k == TERM:
            if pos < len(text) and text[pos] == e.a:
                return pos + 1
            return _FAILED
        if k == WILD:
            return pos + 1 if pos < len(text) else _FAILED
        if k == FAIL:
            return _FAILED
        if k == NONTERM:
            return self.match(self.env.body(e.a), pos)
        if k == SEQ:
            mid = self.match(e.a, pos)
            if mid == _FAILED:
                return _FAILED
            return self.match(e.b, mid)
        if k == CHOICE:
            r = self.match(e.a, pos)
            if r != _FAILED:
                return r
            return self.match(e.b, pos)
        if k == STAR:
            while True:
                r = self.match(e.a, pos)
                if r == _FAILED:
                    return pos
                # rule 10 would repeat forever; any fuel budget runs out
                if r == pos:
                    raise FuelExhausted("repetition body matched without consuming input")
                pos = r
                self.tick()
        if k == NOT:
            return pos if self.match(e.a, pos) == _FAILED else _FAILED
        if k == AND:
            # &e is !!e
            return _FAILED if self.match(e.a, pos) == _FAILED else pos
        raise ValueError(f"unknown expression kind {k!r}")


def reference_match(e: Expr, text: str, env, fuel: int = DEFAULT_FUEL) -> str | None:
    """Suffix left after matching ``e`` against a prefix of ``text``, or None."""
    m = _Matcher(env, text, fuel)
    try:
        r = m.match(e, 0)
    except RecursionError:
        raise FuelExhausted("reference interpreter recursed too deeply") from None
    return None if r == _FAILED else text[r:]


def reference_accepts_exact(e: Expr, text: str, env, fuel: int = DEFAULT_FUEL) -> bool:
    """True iff ``e`` matches all of ``text``."""
    return reference_match(e, text, env, fuel) == ""
