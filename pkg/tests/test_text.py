import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS
from pegd.derivative import DeriveSession
from pegd.expr import CHOICE, SEQ, reachable_rules
from pegd.synth import random_grammar
from pegd.text import (
    DuplicateRuleError,
    EmptyAlphabetError,
    GrammarError,
    GrammarSyntaxError,
    UndefinedRuleError,
    parse_expression,
    parse_grammar,
    serialize_grammar,
)


def isomorphic(g1, g2) -> bool:
    """Same start shape and rule bodies up to a renaming of rule ids."""
    mapping = {}

    def same(x, y) -> bool:
        if x.kind != y.kind:
            return False
        if x.kind == "nonterm":
            if x.a in mapping:
                return mapping[x.a] == y.a
            mapping[x.a] = y.a
            return same(g1.body(x.a), g2.body(y.a))
        if x.kind == "term":
            return x.a == y.a
        return all(same(a, b) for a, b in zip(x.children(), y.children()))

    return g1.alphabet == g2.alphabet and same(g1.start, g2.start)


def test_parse_simple_grammar():
    g = parse_grammar("S <- 'a' S 'b' / ''")
    p = g.pool
    s = p.nonterm(g.rule_id("S"))
    assert g.start is s
    assert g.alphabet == ("a", "b")
    assert g.body(s.a) is p.choice(p.seq(p.term("a"), p.seq(s, p.term("b"))), p.eps)


def test_left_recursive_grammar_parses():
    g = parse_grammar("X <- X 'x' / ''")
    assert g.body(g.rule_id("X")).kind == CHOICE


def test_sugar():
    g = parse_grammar("S <- 'a'+ 'b'? 'cd'")
    p = g.pool
    a, b = p.term("a"), p.term("b")
    want = p.seq(p.seq(a, p.star(a)), p.seq(p.choice(b, p.eps), p.seq(p.term("c"), p.term("d"))))
    assert g.body(g.rule_id("S")) is want


def test_precedence():
    g = parse_grammar("S <- !'a' 'b'* / 'c' &'d'")
    p = g.pool
    a, b, c, d = (p.term(x) for x in "abcd")
    assert g.body(g.rule_id("S")) is p.choice(p.seq(p.not_(a), p.star(b)), p.seq(c, p.and_(d)))


def test_choice_and_sequence_nest_right():
    g = parse_grammar("S <- 'a' / 'b' / 'c'\nT <- 'a' 'b' 'c'")
    s = g.body(g.rule_id("S"))
    t = g.body(g.rule_id("T"))
    assert s.b.kind == CHOICE and s.a.kind == "term"
    assert t.b.kind == SEQ and t.a.kind == "term"


def test_escapes_and_comments():
    g = parse_grammar("# leading comment\nS <- '\\x41' '\\n' '\\t' '\\'' '\\\\'  # trailing\n")
    assert g.alphabet == ("\t", "\n", "'", "A", "\\")


def test_directives():
    g = parse_grammar("%alphabet 'cba'\n%start T\nS <- 'a'\nT <- S 'b'")
    assert g.alphabet == ("c", "b", "a")
    assert g.name(g.start.a) == "T"


def test_fail_and_wildcard():
    g = parse_grammar("%alphabet 'ab'\nS <- . / %fail")
    p = g.pool
    assert g.body(g.rule_id("S")) is p.wild()


@pytest.mark.parametrize(
    "text,error",
    [
        ("S <- 'a' (", GrammarSyntaxError),
        ("S <- A", UndefinedRuleError),
        ("S <- 'a'\nS <- 'b'", DuplicateRuleError),
        ("S <- .", EmptyAlphabetError),
        ("%alphabet 'aa'\nS <- 'a'", GrammarSyntaxError),
        ("%start T\nS <- 'a'", UndefinedRuleError),
        ("%alphabet 'a'\nS <- 'b'", GrammarError),
        ("S <- 'a", GrammarSyntaxError),
        ("S <- '\\q'", GrammarSyntaxError),
        ("", GrammarSyntaxError),
    ],
)
def test_errors(text, error):
    with pytest.raises(error) as info:
        parse_grammar(text)
    assert info.value.line is not None


def test_error_position():
    with pytest.raises(GrammarSyntaxError) as info:
        parse_grammar("S <- 'a'\nT <- 'b' )")
    assert (info.value.line, info.value.column) == (2, 10)


@settings(max_examples=300)
@given(st.text(alphabet="SAB<-'ab./!&*+?()%# \n", max_size=30))
def test_parser_is_total(text):
    try:
        parse_grammar(text)
    except GrammarError as exc:
        assert exc.line is not None and exc.column is not None


def test_serialize_examples():
    assert serialize_grammar(parse_grammar("S <- ''")) == "S <- ''\n"
    text = "P <- &('a' 'b' 'c') . . .\n"
    assert serialize_grammar(parse_grammar(text)) == text


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.peg")), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    g = parse_grammar(path.read_text(encoding="utf-8"))
    text = serialize_grammar(g)
    g2 = parse_grammar(text)
    assert isomorphic(g, g2)
    assert serialize_grammar(g2) == text


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_random_round_trip(seed):
    g = random_grammar(random.Random(seed))
    text = serialize_grammar(g)
    g2 = parse_grammar(text)
    assert isomorphic(g, g2)
    assert serialize_grammar(g2) == text


def test_derived_session_serializes_every_reachable_rule_once():
    # derived rules only survive where a derivative re-enters itself, which
    # takes left recursion
    g = parse_grammar("X <- X 'x' / ''")
    s = DeriveSession(g)
    d = s.derive_string("xx", g.start)
    text = serialize_grammar(s.grammar_for(d))
    names = [line.split(" <- ")[0] for line in text.splitlines() if " <- " in line]
    assert len(names) == len(set(names))
    reachable = {s.name(r) for r in reachable_rules([d], s.body)}
    assert reachable <= set(names)
    assert any(n.startswith("_D_x_") for n in names)
    assert any(n.startswith("_N_x_") for n in names)
    g2 = parse_grammar(text)
    assert isomorphic(s.grammar_for(d), g2)


def test_derived_names_avoid_base_names():
    g = parse_grammar("_D_x_1 <- _D_x_1 'x' / ''\n_D_x_2 <- 'x'")
    s = DeriveSession(g)
    d = s.derive("x", g.start)
    view = s.grammar_for(d)
    assert len(set(view.names.values())) == len(view.names)
    g2 = parse_grammar(serialize_grammar(view))
    assert len(g2.rules) == len(view.rules)


def test_parse_expression_uses_grammar_rules():
    g = parse_grammar("S <- 'a' / 'b'")
    e = parse_expression("S S", g)
    assert e is g.pool.seq(g.start, g.start)
    with pytest.raises(UndefinedRuleError):
        parse_expression("T", g)
