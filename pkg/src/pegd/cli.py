"""Command-line interface: ``pegd {check,recognize,derive,generate,firsts,equiv}``.

Exit codes: 0 success, 1 rejected / counterexample / no sentence,
2 usage or parse error, 3 grammar not well-formed, 4 budget exhausted,
5 engines disagree.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .analysis import IterationBudgetExceeded, consumption, first_set, is_well_formed, nullable, well_formed
from .derivative import AlphabetError, DerivativeBudgetExceeded, DeriveSession
from .engine import (
    BudgetExhausted,
    Counterexample,
    GenConfig,
    GenerationBudgetExhausted,
    GenMode,
    IllFormedGrammar,
    Mode,
    Sentence,
    enumerate_sentences,
    equiv_check,
    generate,
    recognize,
)
from .expr import UnboundNonterminal, inline, pretty
from .reference import FuelExhausted, reference_accepts_exact
from .text import GrammarError, parse_grammar, serialize_grammar

SCHEMA = "pegd/1"

EXIT_OK = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_ILL_FORMED = 3
EXIT_BUDGET = 4
EXIT_DISAGREE = 5

_BUDGET_ERRORS = (
    DerivativeBudgetExceeded,
    GenerationBudgetExhausted,
    FuelExhausted,
    IterationBudgetExceeded,
)


class _UsageError(Exception):
    pass


class _IllFormed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def escape(x: str) -> str:
    """One-line rendering of a sentence: backslash escapes for control characters."""
    out = []
    for ch in x:
        if ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif not ch.isprintable():
            out.append("\\u%04x" % ord(ch) if ord(ch) < 0x10000 else "\\U%08x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise _UsageError(f"{path} is not valid UTF-8") from None
    try:
        return parse_grammar(text)
    except GrammarError as exc:
        raise _UsageError(f"{path}: {exc}") from None


def _require_wf(g, what="grammar"):
    if not is_well_formed(g.start, g, strict=True):
        raise _IllFormed(f"{what} is not well-formed")


def _symbols(s) -> list[str]:
    return sorted(s)


# subcommands; each returns (exit code, json payload, text lines)


def _cmd_check(args):
    g = _load(args.grammar)
    figure = well_formed(g)
    rules = []
    for rid in g.rules:
        ref = g.pool.nonterm(rid)
        outcomes = consumption(ref, g)
        rules.append(
            {
                "rule": g.name(rid),
                "well_formed": is_well_formed(ref, g, strict=True),
                "well_formed_nullability": figure.rules[rid],
                "nullable": nullable(ref, g),
                # nullability only has its meaning for well-formed rules
                "nullable_defined": figure.rules[rid],
                "may_succeed_empty": "0" in outcomes,
                "firsts": _symbols(first_set(ref, g)),
            }
        )
    start_wf = is_well_formed(g.start, g, strict=True)
    payload = {"alphabet": list(g.alphabet), "start_well_formed": start_wf, "rules": rules}
    yes = {True: "yes", False: "no"}
    lines = []
    for r in rules:
        lines.append(
            f"{r['rule']}: wf={yes[r['well_formed']]} nullable={yes[r['nullable']]}"
            + ("" if r["nullable_defined"] else " (undefined)")
            + f" firsts={{{', '.join(escape(a) for a in r['firsts'])}}}"
        )
    lines.append("start: " + ("well-formed" if start_wf else "not well-formed"))
    return (EXIT_OK if start_wf else EXIT_ILL_FORMED), payload, lines


def _read_input(args) -> str:
    if args.stdin:
        if args.input is not None:
            raise _UsageError("give INPUT or --stdin, not both")
        try:
            x = sys.stdin.buffer.read().decode("utf-8")
        except UnicodeDecodeError:
            raise _UsageError("standard input is not valid UTF-8") from None
        if x.endswith("\n"):
            x = x[:-1]
        return x
    if args.input is None:
        raise _UsageError("recognize needs INPUT or --stdin")
    return args.input


def _cmd_recognize(args):
    g = _load(args.grammar)
    x = _read_input(args)
    _require_wf(g)
    bad = sorted(set(x) - set(g.alphabet))
    if bad:
        raise _UsageError(f"input symbols outside the alphabet: {', '.join(map(repr, bad))}")
    mode = Mode(args.mode)
    results = {}
    if args.engine in ("derivative", "both"):
        results["derivative"] = recognize(DeriveSession(g), g.start, x, mode)
    if args.engine in ("reference", "both"):
        e = g.start
        if mode is Mode.PREFIX:
            e = g.pool.seq(e, g.pool.star(g.pool.wild()))
        results["reference"] = reference_accepts_exact(e, x, g)
    verdicts = set(results.values())
    payload = {"input": x, "mode": mode.value, "engines": results}
    if len(verdicts) > 1:
        payload["accepted"] = None
        lines = ["disagreement: " + ", ".join(f"{k} {'accepts' if v else 'rejects'}" for k, v in results.items())]
        return EXIT_DISAGREE, payload, lines
    ok = verdicts.pop()
    payload["accepted"] = ok
    return (EXIT_OK if ok else EXIT_NO), payload, ["accepted" if ok else "rejected"]


def _cmd_derive(args):
    g = _load(args.grammar)
    if args.inline_depth < 0:
        raise _UsageError("--inline-depth must be >= 0")
    bad = sorted(set(args.string) - set(g.alphabet))
    if bad:
        raise _UsageError(f"symbols outside the alphabet: {', '.join(map(repr, bad))}")
    s = DeriveSession(g)
    d = s.derive_string(args.string, g.start)
    if args.inline_depth:
        d = inline(d, s, args.inline_depth)
    text = serialize_grammar(s.grammar_for(d))
    payload = {"string": args.string, "expression": pretty(d, s), "grammar": text, "nullable": nullable(d, s)}
    return EXIT_OK, payload, text.rstrip("\n").split("\n")


def _cmd_generate(args):
    g = _load(args.grammar)
    if args.count is not None and args.count < 0:
        raise _UsageError("--count must be >= 0")
    if args.max_length < 0:
        raise _UsageError("--max-length must be >= 0")
    if args.budget <= 0:
        raise _UsageError("--budget must be > 0")
    if not g.alphabet:
        raise _UsageError("cannot generate over an empty alphabet")
    _require_wf(g)
    s = DeriveSession(g)
    code = EXIT_OK
    if args.exhaustive:
        found = enumerate_sentences(s, g.start, args.max_length, budget=args.budget)
        if args.count is not None:
            found = found[: args.count]
    else:
        count = 10 if args.count is None else args.count
        cfg = GenConfig(seed=args.seed, max_length=args.max_length, step_budget=args.budget, mode=GenMode.RANDOM)
        rng = random.Random(args.seed)
        found = []
        for _ in range(count):
            r = generate(s, g.start, cfg, rng)
            if r is BudgetExhausted:
                code = EXIT_BUDGET
                break
            if isinstance(r, Sentence):
                found.append(r.text)
            else:
                code = EXIT_NO
                break
    payload = {"sentences": found}
    lines = [escape(x) for x in found]
    if args.verify:
        rejected = [x for x in found if not reference_accepts_exact(g.start, x, g)]
        payload["rejected_by_reference"] = rejected
        if rejected:
            code = EXIT_DISAGREE
    if code == EXIT_BUDGET:
        payload["budget_exhausted"] = True
    return code, payload, lines


def _cmd_firsts(args):
    g = _load(args.grammar)
    if args.rule is None:
        e, label = g.start, "start"
    else:
        try:
            e, label = g.pool.nonterm(g.rule_id(args.rule)), args.rule
        except UnboundNonterminal:
            raise _UsageError(f"no rule named {args.rule!r}") from None
    fs = _symbols(first_set(e, g))
    return EXIT_OK, {"rule": label, "firsts": fs}, [escape(a) for a in fs]


def _cmd_equiv(args):
    g1, g2 = _load(args.left), _load(args.right)
    if args.samples < 0:
        raise _UsageError("--samples must be >= 0")
    if args.max_length < 0:
        raise _UsageError("--max-length must be >= 0")
    _require_wf(g1, "left grammar")
    _require_wf(g2, "right grammar")
    r = equiv_check(g1, g2, samples=args.samples, max_length=args.max_length, seed=args.seed)
    if isinstance(r, Counterexample):
        payload = {"equivalent": False, "counterexample": r.text, "accepted_by": r.accepted_by}
        return EXIT_NO, payload, [f"counterexample: {escape(r.text)!s} (accepted by {r.accepted_by})"]
    payload = {"equivalent": True, "samples": r.samples, "exhaustive_length": r.exhaustive_length}
    return EXIT_OK, payload, [f"equivalent up to budget ({r.samples} samples, exhaustive to length {r.exhaustive_length})"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON object (schema pegd/1)")

    p = _Parser(prog="pegd", description="Derivatives of parsing expression grammars.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="well-formedness, nullability and first sets per rule")
    c.add_argument("grammar")
    c.set_defaults(run=_cmd_check)

    c = sub.add_parser("recognize", parents=[common], help="decide membership of an input")
    c.add_argument("grammar")
    c.add_argument("input", nargs="?")
    c.add_argument("--engine", choices=["derivative", "reference", "both"], default="derivative")
    c.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EXACT.value)
    c.add_argument("--stdin", action="store_true", help="read the input from standard input")
    c.set_defaults(run=_cmd_recognize)

    c = sub.add_parser("derive", parents=[common], help="print the grammar left after consuming STRING")
    c.add_argument("grammar")
    c.add_argument("string")
    c.add_argument("--inline-depth", type=int, default=0)
    c.set_defaults(run=_cmd_derive)

    c = sub.add_parser("generate", parents=[common], help="generate sentences")
    c.add_argument("grammar")
    c.add_argument("--count", type=int, default=None, help="sentences to print (default 10; all with --exhaustive)")
    c.add_argument("--max-length", type=int, default=16)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--budget", type=int, default=GenConfig.step_budget, help="derivative steps per sentence")
    c.add_argument("--exhaustive", action="store_true", help="every sentence up to --max-length")
    c.add_argument("--verify", action="store_true", help="re-check each sentence with the reference engine")
    c.set_defaults(run=_cmd_generate)

    c = sub.add_parser("firsts", parents=[common], help="first set of the start or of RULE")
    c.add_argument("grammar")
    c.add_argument("rule", nargs="?")
    c.set_defaults(run=_cmd_firsts)

    c = sub.add_parser("equiv", parents=[common], help="probabilistic equivalence of two grammars")
    c.add_argument("left")
    c.add_argument("right")
    c.add_argument("--samples", type=int, default=200)
    c.add_argument("--max-length", type=int, default=8)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(run=_cmd_equiv)
    return p


def _emit(args, command, code, payload, lines, out):
    if getattr(args, "json", False):
        doc = {"schema": SCHEMA, "command": command, "exit": code}
        doc.update(payload)
        out.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")
    else:
        for line in lines:
            out.write(line + "\n")


def main(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        err.write(f"pegd: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    def fail(code, kind, message):
        err.write(f"pegd: {message}\n")
        _emit(args, args.command, code, {"error": kind, "message": message}, [], out)
        return code

    try:
        code, payload, lines = args.run(args)
    except _UsageError as exc:
        return fail(EXIT_USAGE, "usage", str(exc))
    except (_IllFormed, IllFormedGrammar) as exc:
        return fail(EXIT_ILL_FORMED, "ill-formed", str(exc))
    except _BUDGET_ERRORS as exc:
        return fail(EXIT_BUDGET, "budget", str(exc))
    except AlphabetError as exc:
        return fail(EXIT_USAGE, "usage", str(exc))
    except RecursionError:
        return fail(EXIT_BUDGET, "budget", "expression nesting too deep")
    _emit(args, args.command, code, payload, lines, out)
    if code == EXIT_BUDGET:
        err.write("pegd: step budget exhausted\n")
    elif code == EXIT_DISAGREE:
        err.write("pegd: engines disagree\n")
    return code


def main_exit():
    sys.exit(main())
