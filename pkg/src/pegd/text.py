"""Reading and writing grammar files.

Format::

    # comment
    %alphabet 'abc'          # optional; symbols of every listed literal
    %start S                 # optional; defaults to the first rule
    S <- 'a' S 'b' / ''

Expressions: ``'x'`` terminal (a longer literal is a sequence of its
characters, ``''`` is ε), ``.`` wildcard, ``%fail``, ``Name``, ``( e )``,
postfix ``* + ?``, prefix ``! &``, juxtaposition for sequence and ``/`` for
prioritized choice. Precedence: postfix > prefix > sequence > choice.
Literal escapes: ``\\'`` ``\\\\`` ``\\n`` ``\\t`` ``\\xHH``.
"""

from __future__ import annotations

import re

from .expr import (
    NONTERM,
    Expr,
    Grammar,
    Pool,
    contains_wild,
    pretty,
    quote_symbol,
    reachable_rules,
    terminals_of,
)


class GrammarError(ValueError):
    """Grammar text that cannot be turned into a Grammar."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class GrammarSyntaxError(GrammarError):
    pass


class UndefinedRuleError(GrammarError):
    pass


class DuplicateRuleError(GrammarError):
    pass


class EmptyAlphabetError(GrammarError):
    pass


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SPACE = re.compile(r"(?:[ \t\r\n]+|#[^\n]*)+")
_PUNCT = ("<-", "/", "(", ")", "*", "+", "?", "!", "&", ".")


def _tokenize(text: str):
    """Yield (kind, value, line, column); kinds: ident, lit, directive, punct, eof."""
    pos = 0
    line, line_start = 1, 0
    n = len(text)

    def col(p):
        return p - line_start + 1

    while True:
        m = _SPACE.match(text, pos)
        if m:
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
            pos = m.end()
        if pos >= n:
            yield ("eof", None, line, col(pos))
            return
        ch = text[pos]
        start_col = col(pos)
        if ch == "'":
            value, pos = _read_literal(text, pos, line, start_col)
            yield ("lit", value, line, start_col)
            continue
        if ch == "%":
            m = _IDENT.match(text, pos + 1)
            if not m:
                raise GrammarSyntaxError("expected directive name after '%'", line, start_col)
            yield ("directive", m.group(), line, start_col)
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            yield ("ident", m.group(), line, start_col)
            pos = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, pos):
                yield ("punct", p, line, start_col)
                pos += len(p)
                break
        else:
            raise GrammarSyntaxError(f"unexpected character {ch!r}", line, start_col)


def _read_literal(text: str, pos: int, line: int, column: int) -> tuple[str, int]:
    out = []
    i = pos + 1
    while True:
        if i >= len(text) or text[i] == "\n":
            raise GrammarSyntaxError("unterminated literal", line, column)
        ch = text[i]
        if ch == "'":
            return "".join(out), i + 1
        if ch == "\\":
            nxt = text[i + 1 : i + 2]
            if nxt in ("'", "\\"):
                out.append(nxt)
                i += 2
            elif nxt == "n":
                out.append("\n")
                i += 2
            elif nxt == "t":
                out.append("\t")
                i += 2
            elif nxt == "x":
                hexdigits = text[i + 2 : i + 4]
                if not re.fullmatch(r"[0-9A-Fa-f]{2}", hexdigits):
                    raise GrammarSyntaxError("bad \\x escape", line, column + (i - pos))
                out.append(chr(int(hexdigits, 16)))
                i += 4
            else:
                raise GrammarSyntaxError(f"unknown escape \\{nxt}", line, column + (i - pos))
        else:
            out.append(ch)
            i += 1


class _Parser:
    def __init__(self, text: str, pool: Pool):
        self.toks = list(_tokenize(text))
        self.i = 0
        self.pool = pool
        self.rule_ids: dict[str, int] = {}
        self.refs: list[tuple[str, int, int]] = []
        self.wild_at: tuple[int, int] | None = None
        self.symbol_at: dict[str, tuple[int, int]] = {}

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return GrammarSyntaxError(message, tok[2], tok[3])

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.tok
        if t[0] != kind or (value is not None and t[1] != value):
            want = value or kind
            got = "end of input" if t[0] == "eof" else repr(t[1])
            raise self.error(f"expected {want!r}, got {got}")
        return self.advance()

    def at_rule_start(self):
        return self.tok[0] == "ident" and self.peek()[:2] == ("punct", "<-")

    def rule_ref(self, name, tok):
        rid = self.rule_ids.get(name)
        if rid is None:
            rid = self.rule_ids[name] = self.pool.new_rule()
        self.refs.append((name, tok[2], tok[3]))
        return self.pool.nonterm(rid)

    # expression grammar

    def expression(self) -> Expr:
        first = self.sequence()
        if self.tok[:2] == ("punct", "/"):
            self.advance()
            return self.pool.choice(first, self.expression())
        return first

    def starts_item(self):
        kind, value = self.tok[:2]
        if kind == "lit":
            return True
        if kind == "ident":
            return not self.at_rule_start()
        if kind == "directive":
            return value == "fail"
        return kind == "punct" and value in ("(", "!", "&", ".")

    def sequence(self) -> Expr:
        if not self.starts_item():
            raise self.error("expected an expression")
        items: list[Expr] = []
        while self.starts_item():
            kind = self.tok[0]
            is_plain_literal = kind == "lit" and not (
                self.peek()[0] == "punct" and self.peek()[1] in ("*", "+", "?")
            )
            if is_plain_literal:
                tok = self.advance()
                for ch in tok[1]:
                    self.symbol_at.setdefault(ch, tok[2:4])
                    items.append(self.pool.term(ch))
            else:
                items.append(self.prefixed())
        e = self.pool.eps
        for item in reversed(items):
            e = self.pool.seq(item, e)
        return e

    def prefixed(self) -> Expr:
        if self.tok[:2] == ("punct", "!"):
            self.advance()
            return self.pool.not_(self.prefixed())
        if self.tok[:2] == ("punct", "&"):
            self.advance()
            return self.pool.and_(self.prefixed())
        return self.postfixed()

    def postfixed(self) -> Expr:
        e = self.primary()
        while self.tok[0] == "punct" and self.tok[1] in ("*", "+", "?"):
            op = self.advance()[1]
            if op == "*":
                e = self.pool.star(e)
            elif op == "+":
                e = self.pool.plus(e)
            else:
                e = self.pool.optional(e)
        return e

    def primary(self) -> Expr:
        tok = self.tok
        kind, value = tok[:2]
        if kind == "lit":
            self.advance()
            for ch in value:
                self.symbol_at.setdefault(ch, tok[2:4])
            return self.pool.literal(value)
        if kind == "ident":
            self.advance()
            return self.rule_ref(value, tok)
        if kind == "directive" and value == "fail":
            self.advance()
            return self.pool.fail()
        if (kind, value) == ("punct", "."):
            self.advance()
            if self.wild_at is None:
                self.wild_at = tok[2:4]
            return self.pool.wild()
        if (kind, value) == ("punct", "("):
            self.advance()
            e = self.expression()
            self.expect("punct", ")")
            return e
        raise self.error("expected an expression")

    # file structure

    def grammar(self) -> Grammar:
        alphabet: list[str] | None = None
        start_name = None
        start_tok = None
        order: list[str] = []
        bodies: dict[str, Expr] = {}
        while self.tok[0] != "eof":
            tok = self.tok
            if tok[0] == "directive":
                self.advance()
                if tok[1] == "alphabet":
                    if alphabet is not None:
                        raise GrammarSyntaxError("duplicate %alphabet", tok[2], tok[3])
                    alphabet = []
                    while self.tok[0] == "lit":
                        lit = self.advance()
                        for ch in lit[1]:
                            if ch in alphabet:
                                raise GrammarSyntaxError(
                                    f"symbol {ch!r} listed twice in %alphabet", lit[2], lit[3]
                                )
                            alphabet.append(ch)
                elif tok[1] == "start":
                    if start_name is not None:
                        raise GrammarSyntaxError("duplicate %start", tok[2], tok[3])
                    start_tok = self.expect("ident")
                    start_name = start_tok[1]
                else:
                    raise GrammarSyntaxError(f"unknown directive %{tok[1]}", tok[2], tok[3])
                continue
            if not self.at_rule_start():
                raise self.error("expected a rule definition 'Name <- expression'")
            name = self.advance()[1]
            self.advance()
            if name in bodies:
                raise DuplicateRuleError(f"rule {name!r} defined twice", tok[2], tok[3])
            bodies[name] = self.expression()
            order.append(name)
            if name not in self.rule_ids:
                self.rule_ids[name] = self.pool.new_rule()

        for name, line, column in self.refs:
            if name not in bodies:
                raise UndefinedRuleError(f"undefined rule {name!r}", line, column)
        if not order:
            raise GrammarSyntaxError("grammar defines no rules", self.tok[2], self.tok[3])
        if start_name is None:
            start_name = order[0]
        elif start_name not in bodies:
            raise UndefinedRuleError(
                f"%start names undefined rule {start_name!r}", start_tok[2], start_tok[3]
            )

        rules = {self.rule_ids[n]: bodies[n] for n in order}
        names = {self.rule_ids[n]: n for n in order}
        if alphabet is None:
            symbols: set[str] = set()
            for body in rules.values():
                symbols |= terminals_of(body)
            alphabet = sorted(symbols)
        else:
            for body in rules.values():
                missing = sorted(terminals_of(body) - set(alphabet))
                if missing:
                    raise GrammarError(
                        f"terminal {missing[0]!r} is not in %alphabet", *self.symbol_at[missing[0]]
                    )
        if not alphabet and any(contains_wild(b) for b in rules.values()):
            raise EmptyAlphabetError("grammar uses '.' but its alphabet is empty", *self.wild_at)
        return Grammar(
            pool=self.pool,
            alphabet=tuple(alphabet),
            rules=rules,
            start=self.pool.nonterm(self.rule_ids[start_name]),
            names=names,
        )


def parse_grammar(text: str, pool: Pool | None = None) -> Grammar:
    return _Parser(text, pool or Pool()).grammar()


def parse_expression(text: str, grammar: Grammar) -> Expr:
    """Parse a single expression whose names refer to ``grammar``'s rules."""
    p = _Parser(text, grammar.pool)
    p.rule_ids = {n: rid for rid, n in grammar.names.items()}
    e = p.expression()
    if p.tok[0] != "eof":
        raise p.error("unexpected text after expression")
    for name, line, column in p.refs:
        if name not in p.rule_ids or p.rule_ids[name] not in grammar.rules:
            raise UndefinedRuleError(f"undefined rule {name!r}", line, column)
    return e


def serialize_grammar(g: Grammar, *, start_name: str = "_start") -> str:
    """Canonical text for ``g``: start rule first, then reachable rules in discovery order.

    Rules not reachable from the start are kept after the reachable ones. A
    start that is not a bare rule reference becomes a rule named
    ``start_name`` (made unique if needed).
    """
    lines = []
    inferred = set()
    for body in g.rules.values():
        inferred |= terminals_of(body)
    inferred |= terminals_of(g.start)
    if list(g.alphabet) != sorted(inferred):
        lines.append("%alphabet " + " ".join(quote_symbol(ch) for ch in g.alphabet))

    names = dict(g.names)
    order = []
    if g.start.kind == NONTERM and g.start.a in g.rules:
        order.append(g.start.a)
        head = None
    else:
        taken = set(names.values())
        name = start_name
        n = 1
        while name in taken:
            n += 1
            name = f"{start_name}{n}"
        head = name
    for rid in reachable_rules([g.start], g.body):
        if rid not in order:
            order.append(rid)
    for rid in g.rules:
        if rid not in order:
            order.append(rid)

    class _Names:
        def name(self, rid):
            return names[rid]

    env = _Names()
    if head is not None:
        lines.append(f"{head} <- {pretty(g.start, env)}")
    for rid in order:
        lines.append(f"{names[rid]} <- {pretty(g.rules[rid], env)}")
    return "\n".join(lines) + "\n"
