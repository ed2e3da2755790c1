"""Acceptance criteria, one check per criterion.

Each check returns ``(passed, detail)``. Under pytest every check is a test
that prints a ``PASS``/``FAIL`` line; ``python3 tests/test_acceptance.py``
runs them all and prints the same lines.
"""

import io
import itertools
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from identities import IDENTITIES, instantiate  # noqa: E402
from pegd.analysis import first_set, is_well_formed, nullable, well_formed  # noqa: E402
from pegd.cli import main  # noqa: E402
from pegd.derivative import DeriveSession  # noqa: E402
from pegd.engine import (  # noqa: E402
    Counterexample,
    Equivalent,
    GenConfig,
    Mode,
    Sentence,
    enumerate_sentences,
    equiv_check,
    generate,
    recognize,
)
from pegd.expr import Grammar, Pool, inline, pretty  # noqa: E402
from pegd.reference import reference_accepts_exact, reference_match  # noqa: E402
from pegd.synth import random_expr, random_grammar, shrink  # noqa: E402
from pegd.text import parse_grammar, serialize_grammar  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

POPULATION = 500
POPULATION_SEED = 20240601
MAX_INPUT = 5


def load(name):
    return parse_grammar((CORPUS / name).read_text(encoding="utf-8"))


def strings(alphabet, max_length):
    for n in range(max_length + 1):
        for chars in itertools.product(alphabet, repeat=n):
            yield "".join(chars)


def both_accept(g, x):
    return recognize(DeriveSession(g), g.start, x), reference_accepts_exact(g.start, x, g)


# 1-5: worked examples


def criterion_1():
    g = load("example1.peg")
    s = DeriveSession(g)
    text = pretty(inline(s.derive("a", g.start), s, 20), s)
    return text == "&('b' 'c') . .", f"D_a = {text}"


def criterion_2():
    g = load("example2.peg")
    s = DeriveSession(g)
    d = s.derive("a", g.start)
    text = pretty(inline(d, s, 20), s)
    # ".*" would accept a following 'b'; the derivative must not
    p = g.pool
    any_star = p.star(p.wild())
    differs = [
        x
        for x in strings(g.alphabet, 3)
        if nullable(s.derive_string(x, d), s) != reference_accepts_exact(any_star, x, g)
    ]
    ok = text == "!'b' .*" and "b" in differs
    return ok, f"D_a = {text}; differs from .* on {differs[:3]}"


def criterion_3():
    g = load("example3.peg")
    s = DeriveSession(g)
    nu = nullable(s.derive_string("cc", g.start), s)
    engines = both_accept(g, "cc")
    return nu and engines == (True, True), f"nu(D_cc) = {nu}; engines {engines}"


def criterion_4():
    g = parse_grammar("X <- X 'x' / ''\nY <- 'x' Y / ''")
    x = g.pool.nonterm(g.rule_id("X"))
    y = g.rule_id("Y")
    wf = well_formed(g)
    nu_x = nullable(x, g)
    ok = nu_x is True and wf.rules[x.a] is False and wf.rules[y] is True
    return ok, f"nu(X) = {nu_x}, WF(X) = {wf.rules[x.a]}, WF(X') = {wf.rules[y]}"


def criterion_5():
    g = load("ford.peg")
    want = {"aaa": True, "abc": True, "aabbcc": True, "aabbc": False}
    got = {x: both_accept(g, x) for x in want}
    ok = all(got[x] == (v, v) for x, v in want.items())
    found = enumerate_sentences(DeriveSession(g), g.start, 3)
    ok = ok and "aaa" in found
    return ok, f"engines {got}; enumerate(3) = {found}"


# 6: property suites over a random population


class Population:
    """The synthesized grammars shared by the property suites."""

    def __init__(self):
        rng = random.Random(POPULATION_SEED)
        self.grammars = [random_grammar(rng) for _ in range(POPULATION)]

    @staticmethod
    def counterexample(g, check):
        small = shrink(g, lambda h: check(h) is not None)
        return f"{check(small)} in\n{serialize_grammar(small)}"


_population = None


def population():
    global _population
    if _population is None:
        _population = Population()
    return _population


def _run_suite(check, pairs):
    pop = population()
    total = 0
    for g in pop.grammars:
        bad = check(g)
        if bad is not None:
            return False, "counterexample: " + pop.counterexample(g, check)
        total += pairs(g)
    return True, total


def _input_count(g):
    return sum(1 for _ in strings(g.alphabet, MAX_INPUT))


def _check_exact(g):
    s = DeriveSession(g)
    for x in strings(g.alphabet, MAX_INPUT):
        if recognize(s, g.start, x, Mode.EXACT) != reference_accepts_exact(g.start, x, g):
            return f"input {x!r}"
    return None


def _check_prefix(g):
    s = DeriveSession(g)
    p = g.pool
    prefixed = p.seq(g.start, p.star(p.wild()))
    for x in strings(g.alphabet, MAX_INPUT):
        if recognize(s, g.start, x, Mode.PREFIX) != reference_accepts_exact(prefixed, x, g):
            return f"input {x!r}"
    return None


def _check_wf(g):
    s = DeriveSession(g)
    p = g.pool
    for root in (g.start, p.seq(g.start, p.star(p.wild()))):
        layer = [root]
        for _ in range(MAX_INPUT):
            nxt = []
            for e in layer:
                for a in g.alphabet:
                    d = s.derive(a, e)
                    if not is_well_formed(d, s):
                        return f"D_{a} of {pretty(e, s)}"
                    nxt.append(d)
            layer = list({d.id: d for d in nxt}.values())
    return None


def _check_generation(g):
    s = DeriveSession(g)
    rng = random.Random(0)
    for _ in range(10):
        r = generate(s, g.start, GenConfig(max_length=MAX_INPUT), rng)
        if isinstance(r, Sentence) and not reference_accepts_exact(g.start, r.text, g):
            return f"generated {r.text!r}"
    want = [x for x in strings(g.alphabet, MAX_INPUT) if reference_accepts_exact(g.start, x, g)]
    got = enumerate_sentences(s, g.start, MAX_INPUT)
    if got != want:
        return f"enumerate differs on {sorted(set(got) ^ set(want))[:3]}"
    return None


def _check_firsts(g):
    fs = first_set(g.start, g)
    for x in strings(g.alphabet, MAX_INPUT):
        if x and x[0] not in fs and reference_accepts_exact(g.start, x, g):
            return f"{x[0]!r} starts {x!r} but first set is {sorted(fs)}"
    return None


def _suite(check, minimum_pairs=0):
    ok, detail = _run_suite(check, _input_count)
    if not ok:
        return False, detail
    ok = detail >= minimum_pairs
    return ok, f"{POPULATION} grammars, {detail} (grammar, string) pairs"


def criterion_6a():
    return _suite(_check_exact, 10_000)


def criterion_6b():
    return _suite(_check_prefix, 10_000)


def criterion_6c():
    return _suite(_check_wf)


def criterion_6d():
    return _suite(_check_generation)


def criterion_6e():
    return _suite(_check_firsts)


# 7: identity table


def criterion_7():
    rng = random.Random(7)
    pool = Pool()
    env = Grammar(pool, ("a", "b", "c"), {}, pool.eps, {})
    inputs = list(strings("abc", 4))
    for name, arity, lhs, rhs in IDENTITIES:
        for _ in range(100):
            args = instantiate(rng, pool, env, arity)
            left, right = lhs(pool, *args), rhs(pool, *args)
            built = pool.rebuild(left, left.children())
            for x in inputs:
                want = reference_match(left, x, env)
                if reference_match(right, x, env) != want or reference_match(built, x, env) != want:
                    return False, f"{name} fails on {x!r} with {[pretty(a, env) for a in args]}"
    return True, f"{len(IDENTITIES)} rewrites x 100 instantiations x {len(inputs)} strings"


# 8: keyword lookahead


def criterion_8():
    g = load("keyword.peg")
    found = enumerate_sentences(DeriveSession(g), g.start, 3)
    brute = [x for x in strings(g.alphabet, 3) if reference_accepts_exact(g.start, x, g)]
    return found == ["ab"] == brute, f"enumerate(3) = {found}, brute force = {brute}"


# 9: equivalence checking


def _consuming(rng, pool, env):
    while True:
        e = random_expr(rng, pool, "abc", [], rng.randint(1, 3))
        if is_well_formed(pool.star(e), env, strict=True):
            return e


def _closed(rng, pool, env):
    while True:
        e = random_expr(rng, pool, "abc", [], rng.randint(1, 3))
        if is_well_formed(e, env, strict=True):
            return e


def criterion_9():
    rng = random.Random(9)
    for i in range(50):
        pool = Pool()
        env = Grammar(pool, ("a", "b", "c"), {}, pool.eps, {})
        e1, e3 = _closed(rng, pool, env), _closed(rng, pool, env)
        e2 = _consuming(rng, pool, env)
        star = pool.star(e2)
        # build the left side without letting the constructor factor it
        left = pool.raw("choice", pool.seq(e1, star), pool.seq(e3, star))
        right = pool.seq(pool.choice(e1, e3), star)
        g1 = Grammar(pool, ("a", "b", "c"), {}, left, {})
        g2 = Grammar(pool, ("a", "b", "c"), {}, right, {})
        r = equiv_check(g1, g2, samples=50, max_length=6, seed=i)
        if not isinstance(r, Equivalent):
            return False, f"instance {i}: {pretty(left, env)} vs {pretty(right, env)}: {r}"
    r = equiv_check(parse_grammar("S <- 'a'"), parse_grammar("S <- 'a' / 'b'"))
    ok = isinstance(r, Counterexample) and r.text == "b" and r.accepted_by == "right"
    return ok, f"50 instances equivalent; 'a' vs 'a'/'b' -> {r}"


# 10: determinism


def criterion_10():
    outputs = {}
    for path in sorted(CORPUS.glob("*.peg")):
        runs = []
        for _ in range(2):
            out, err = io.StringIO(), io.StringIO()
            code = main(["generate", str(path), "--seed", "42", "--count", "20"], stdout=out, stderr=err)
            runs.append((code, out.getvalue().encode("utf-8")))
        if runs[0] != runs[1]:
            return False, f"{path.name} differs between runs"
        outputs[path.name] = runs[0][0]
    return True, f"{len(outputs)} corpus grammars, exit codes {sorted(set(outputs.values()))}"


CRITERIA = [
    ("1", "Example 1 golden derivative", criterion_1),
    ("2", "Example 2 lookahead stepping", criterion_2),
    ("3", "Example 3 accepts cc", criterion_3),
    ("4", "fixed points for X <- X'x'/''", criterion_4),
    ("5", "Ford a^n b^n c^n accepts aaa", criterion_5),
    ("6a", "exact recognition vs reference", criterion_6a),
    ("6b", "prefix recognition vs reference", criterion_6b),
    ("6c", "derivatives stay well-formed", criterion_6c),
    ("6d", "generation sound, enumeration complete", criterion_6d),
    ("6e", "first sets cover the language", criterion_6e),
    ("7", "identity table soundness", criterion_7),
    ("8", "keyword lookahead enumeration", criterion_8),
    ("9", "equiv on a known identity and a non-identity", criterion_9),
    ("10", "generate is byte-identical across runs", criterion_10),
]

TIME_LIMIT = 60.0


def run_criterion(check):
    start = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - start
    if elapsed >= TIME_LIMIT:
        ok = False
        detail = f"{detail}; took {elapsed:.1f}s"
    return ok, detail, elapsed


def report_line(number, title, ok, detail, elapsed):
    return f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title} ({elapsed:.1f}s): {detail}"


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(number, title, check, capsys):
    ok, detail, elapsed = run_criterion(check)
    with capsys.disabled():
        print("\n" + report_line(number, title, ok, detail, elapsed))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, title, check in CRITERIA:
        ok, detail, elapsed = run_criterion(check)
        failed += not ok
        print(report_line(number, title, ok, detail, elapsed), flush=True)
    sys.exit(1 if failed else 0)
