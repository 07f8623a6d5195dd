"""Command-line driver.

Exit codes: 0 yes / ok / included, 1 no / not included / check failed,
2 unknown, 3 usage or input error.
"""
from __future__ import annotations

import argparse
import enum
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .automata import (AutomatonError, WeightedAutomaton, check_compatible, format_automaton,
                       format_word, load_automaton, parse_word, random_automaton, word_weight)
from .linalg import Matrix, MatrixError, format_matrix, load_matrix
from .partial_execution import bpe, bpe_param, fpe, fpe_param, lemma43_witness
from .semiring import SemiringError, SemiringKind, semiring
from .simulation import Direction, SearchOutcome, Status, find_simulation, verify_sim_matrix

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

# Words sampled on the original pair before an inclusion verdict is reported.
SAMPLE_WORD_CAP = 20000


class VerdictTag(enum.Enum):
    INCLUDED = "Included"
    NOT_INCLUDED = "NotIncluded"
    UNKNOWN = "Unknown"


@dataclass
class Verdict:
    tag: VerdictTag
    witness: Matrix | None = None
    pe_depth: int | None = None
    direction: Direction | None = None
    word: tuple | None = None
    weights: tuple | None = None
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {VerdictTag.INCLUDED: EXIT_YES, VerdictTag.NOT_INCLUDED: EXIT_NO,
                VerdictTag.UNKNOWN: EXIT_UNKNOWN}[self.tag]


def counterexample(A: WeightedAutomaton, B: WeightedAutomaton, max_len: int,
                   lengths: range | None = None):
    """Shortest word ``w`` (up to ``max_len``) with ``L(A)(w)`` not below ``L(B)(w)``.

    Returns ``(word, weight_A, weight_B)`` or ``None``.  With ``lengths``
    only words of those lengths are tested.
    """
    for w, wa, wb in joint_weights(A, B, max_len):
        if lengths is not None and len(w) not in lengths:
            continue
        if not A.semiring.leq(wa, wb):
            return w, wa, wb
    return None


def joint_weights(A: WeightedAutomaton, B: WeightedAutomaton, max_len: int, min_len: int = 0):
    """Yield ``(word, L(A)(word), L(B)(word))`` breadth-first up to ``max_len``."""
    from .linalg import mat_mul
    check_compatible(A, B)
    level = [((), A.alpha, B.alpha)]
    for length in range(max_len + 1):
        if length >= min_len:
            for w, va, vb in level:
                yield w, mat_mul(va, A.beta).get(0, 0), mat_mul(vb, B.beta).get(0, 0)
        if length == max_len:
            break
        level = [(w + (a,), mat_mul(va, A.M[a]), mat_mul(vb, B.M[a]))
                 for w, va, vb in level for a in A.alphabet]


def sample_length(alphabet_size: int, max_len: int, cap: int = SAMPLE_WORD_CAP) -> int:
    """Largest ``L <= max_len`` with at most ``cap`` words of length ``<= L``."""
    total, L = 1, 0
    while L < max_len:
        total += alphabet_size ** (L + 1)
        if total > cap:
            break
        L += 1
    return L


def transform_pair(A, B, direction: Direction, d: int):
    """The operands searched at stage ``d``; stage 0 is the untransformed pair.

    Forward search unfolds ``A`` forwards and ``B`` backwards; backward search
    does the opposite.  Parameters are always computed on the originals.
    """
    if d == 0:
        return A, B
    if direction is Direction.FWD:
        return fpe(A, fpe_param(A, d - 1)), bpe(B, bpe_param(B, d - 1))
    return bpe(A, bpe_param(A, d - 1)), fpe(B, fpe_param(B, d - 1))


def langincl(A: WeightedAutomaton, B: WeightedAutomaton, direction: Direction,
             max_depth: int = 3, max_len: int = 8, budget: float = 60.0) -> Verdict:
    """Interleave simulation search under growing partial execution with counterexample search.

    Stage ``d`` first tests words of length ``d`` and then searches the
    stage-``d`` operands; remaining word lengths are tested afterwards.  The
    wall-clock ``budget`` is checked between steps.
    """
    check_compatible(A, B)
    deadline = time.monotonic() + budget
    sr = A.semiring
    searched = []

    def out_of_time():
        return time.monotonic() > deadline

    def refute(lengths):
        hit = counterexample(A, B, max(lengths), lengths=lengths) if lengths else None
        if hit is not None:
            w, wa, wb = hit
            assert not sr.leq(word_weight(A, w), word_weight(B, w))
            return Verdict(VerdictTag.NOT_INCLUDED, word=w, weights=(wa, wb))
        return None

    for d in range(max_depth + 1):
        if out_of_time():
            return Verdict(VerdictTag.UNKNOWN, details={"reason": "budget exhausted", "searched": searched})
        if d <= max_len:
            v = refute(range(d, d + 1))
            if v is not None:
                return v
        A2, B2 = transform_pair(A, B, direction, d)
        out = find_simulation(A2, B2, direction)
        searched.append((d, out.status.value))
        if out.found:
            assert verify_sim_matrix(A2, B2, direction, out.matrix)
            L = sample_length(len(A.alphabet), max_len)
            for w, wa, wb in joint_weights(A, B, L):
                if not sr.leq(wa, wb):
                    raise RuntimeError(f"verified witness contradicted by word {format_word(w)}")
            return Verdict(VerdictTag.INCLUDED, witness=out.matrix, pe_depth=d, direction=direction,
                           details={"states": (A2.n, B2.n)})
    for length in range(max_depth + 1, max_len + 1):
        if out_of_time():
            return Verdict(VerdictTag.UNKNOWN, details={"reason": "budget exhausted", "searched": searched})
        v = refute(range(length, length + 1))
        if v is not None:
            return v
    return Verdict(VerdictTag.UNKNOWN, details={"reason": "no simulation and no counterexample",
                                                "searched": searched})


def format_verdict(v: Verdict, kind: SemiringKind) -> str:
    sr = semiring(kind)
    if v.tag is VerdictTag.INCLUDED:
        a, b = v.details["states"]
        return (f"Included ({v.direction} simulation, pe depth {v.pe_depth}, {a}x{b} states)\n"
                + format_matrix(v.witness))
    if v.tag is VerdictTag.NOT_INCLUDED:
        wa, wb = v.weights
        return f"NotIncluded\nword {format_word(v.word)}\nL(A) = {sr.format(wa)}\nL(B) = {sr.format(wb)}\n"
    lines = [f"Unknown ({v.details.get('reason', '')})"]
    for d, status in v.details.get("searched", []):
        lines.append(f"depth {d}: {status}")
    return "\n".join(lines) + "\n"


# argparse plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _status_code(out: SearchOutcome) -> int:
    return {Status.FOUND: EXIT_YES, Status.NO_SIMULATION: EXIT_NO, Status.UNKNOWN: EXIT_UNKNOWN}[out.status]


def _parse_states(text: str) -> set:
    if not text.strip():
        return set()
    try:
        return {int(t) for t in text.split(",") if t.strip()}
    except ValueError:
        raise InputError(f"bad state list {text!r}") from None


def cmd_weight(args):
    A = load_automaton(args.automaton)
    w = parse_word(args.word)
    print(A.semiring.format(word_weight(A, w)))
    return EXIT_YES


def cmd_simsearch(args):
    A, B = load_automaton(args.a), load_automaton(args.b)
    out = find_simulation(A, B, Direction.parse(args.dir))
    print(out.status.value)
    if out.found:
        _emit(format_matrix(out.matrix), args.output)
    elif "error" in out.info:
        print(out.info["error"], file=sys.stderr)
    return _status_code(out)


def cmd_simcheck(args):
    A, B = load_automaton(args.a), load_automaton(args.b)
    X = load_matrix(A.kind, args.matrix)
    report = verify_sim_matrix(A, B, Direction.parse(args.dir), X)
    print("ok" if report else "failed: " + report.describe(A.kind))
    return EXIT_YES if report else EXIT_NO


def cmd_langincl(args):
    A, B = load_automaton(args.a), load_automaton(args.b)
    v = langincl(A, B, Direction.parse(args.dir), args.max_depth, args.max_len, args.budget)
    _emit(format_verdict(v, A.kind), args.output)
    return v.exit_code


def cmd_pe(args):
    A = load_automaton(args.automaton)
    if (args.states is None) == (args.depth is None):
        raise InputError("give exactly one of --states and --depth")
    if args.states is not None:
        P = _parse_states(args.states)
    else:
        P = (fpe_param if args.mode == "fpe" else bpe_param)(A, args.depth)
    A2 = (fpe if args.mode == "fpe" else bpe)(A, P)
    _emit(format_automaton(A2), args.output)
    if args.witness:
        if args.mode != "fpe":
            raise InputError("--witness is only available for fpe")
        with open(args.witness, "w", encoding="utf-8") as f:
            f.write(format_matrix(lemma43_witness(A, P)))
    return EXIT_YES


def cmd_counterexample(args):
    A, B = load_automaton(args.a), load_automaton(args.b)
    hit = counterexample(A, B, args.max_len)
    if hit is None:
        print(f"None (no counterexample up to length {args.max_len})")
        return EXIT_YES
    w, wa, wb = hit
    sr = A.semiring
    print(f"{format_word(w)}\nL(A) = {sr.format(wa)}\nL(B) = {sr.format(wb)}")
    return EXIT_NO


def cmd_oracle(args):
    A, B = load_automaton(args.a), load_automaton(args.b)
    sr = A.semiring
    rows = [("word", "L(A)", "L(B)", "leq")]
    all_ok = True
    for w, wa, wb in joint_weights(A, B, args.max_len):
        ok = sr.leq(wa, wb)
        all_ok &= ok
        rows.append((format_word(w), sr.format(wa), sr.format(wb), "yes" if ok else "no"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    text = "".join("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() + "\n" for r in rows)
    _emit(text, args.output)
    return EXIT_YES if all_ok else EXIT_NO


def cmd_random(args):
    kind = SemiringKind.from_tag(args.kind)
    sr = semiring(kind)
    if args.pool:
        pool = [sr.parse(t) for t in args.pool.split(",")]
    else:
        pool = {SemiringKind.PLUS_TIMES: [Fraction(1, 2), Fraction(1)],
                SemiringKind.MAX_PLUS: [Fraction(i) for i in range(17)],
                SemiringKind.BOOLEAN: [True]}[kind]
    try:
        density = Fraction(args.density)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad density {args.density!r}") from None
    A = random_automaton(kind, args.states, args.alphabet_size, density, pool, args.seed)
    _emit(format_automaton(A), args.output)
    return EXIT_YES


def cmd_game(args):
    from .automata import remove_trap_states
    from .maxplus import build_sim_game, mpg_winner
    A, B = load_automaton(args.a), load_automaton(args.b)
    g = build_sim_game(remove_trap_states(A), B)
    winner = mpg_winner(g)
    print(winner.value)
    _emit(g.dump(), args.output)
    return EXIT_YES if winner.value == "MaxWins" else EXIT_NO


def cmd_tree_weight(args):
    from .tree import load_tree_automaton, parse_tree, tree_weight
    A = load_tree_automaton(args.automaton)
    t = parse_tree(args.tree, A.alphabet)
    print(A.semiring.format(tree_weight(A, t)))
    return EXIT_YES


def cmd_tree_simsearch(args):
    from .tree import find_tree_sim, load_tree_automaton
    A, B = load_tree_automaton(args.a), load_tree_automaton(args.b)
    out = find_tree_sim(A, B, Direction.parse(args.dir), seed=args.seed)
    print(out.status.value)
    if out.found:
        _emit(format_matrix(out.matrix), args.output)
    return _status_code(out)


def cmd_tree_simcheck(args):
    from .tree import load_tree_automaton, verify_tree_sim
    A, B = load_tree_automaton(args.a), load_tree_automaton(args.b)
    X = load_matrix(A.kind, args.matrix)
    report = verify_tree_sim(A, B, Direction.parse(args.dir), X)
    print("ok" if report else "failed: " + report.describe(A.kind))
    return EXIT_YES if report else EXIT_NO


def cmd_tree_fpe(args):
    from .tree import format_tree_automaton, load_tree_automaton, tree_fpe
    A = load_tree_automaton(args.automaton)
    _emit(format_tree_automaton(tree_fpe(A, _parse_states(args.states))), args.output)
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weightsim", description="Simulation-based inclusion checking for weighted automata.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair(sp):
        sp.add_argument("a", help="left automaton file")
        sp.add_argument("b", help="right automaton file")

    def direction(sp):
        sp.add_argument("--dir", choices=["fwd", "bwd"], default="fwd")

    def output(sp):
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")

    sp = sub.add_parser("weight", help="weight of a word")
    sp.add_argument("automaton")
    sp.add_argument("word", help="symbols, e.g. 'aab', 'a b b' or '<eps>'")
    sp.set_defaults(func=cmd_weight)

    sp = sub.add_parser("simsearch", help="search for a simulation matrix")
    pair(sp), direction(sp), output(sp)
    sp.set_defaults(func=cmd_simsearch)

    sp = sub.add_parser("simcheck", help="verify a candidate simulation matrix")
    pair(sp), direction(sp)
    sp.add_argument("--matrix", required=True)
    sp.set_defaults(func=cmd_simcheck)

    sp = sub.add_parser("langincl", help="decide or witness language inclusion")
    pair(sp), direction(sp), output(sp)
    sp.add_argument("--max-depth", type=int, default=3)
    sp.add_argument("--max-len", type=int, default=8)
    sp.add_argument("--budget", type=float, default=60.0, help="wall-clock seconds")
    sp.set_defaults(func=cmd_langincl)

    sp = sub.add_parser("pe", help="apply forward or backward partial execution")
    sp.add_argument("automaton")
    sp.add_argument("--mode", choices=["fpe", "bpe"], default="fpe")
    sp.add_argument("--states", help="comma-separated parameter states")
    sp.add_argument("--depth", type=int, help="use the reachability heuristic with this depth")
    sp.add_argument("--witness", help="also write the unfolding matrix (fpe only)")
    output(sp)
    sp.set_defaults(func=cmd_pe)

    sp = sub.add_parser("counterexample", help="shortest word violating inclusion")
    pair(sp)
    sp.add_argument("--max-len", type=int, default=8)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("oracle", help="tabulate both languages on all short words")
    pair(sp), output(sp)
    sp.add_argument("--max-len", type=int, default=4)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("random", help="generate a random automaton")
    sp.add_argument("--kind", choices=[k.value for k in SemiringKind], default="plus-times")
    sp.add_argument("--states", type=int, default=4)
    sp.add_argument("--alphabet-size", type=int, default=2)
    sp.add_argument("--density", default="1/2")
    sp.add_argument("--pool", help="comma-separated weights (write --pool=-1,2 for negatives)")
    sp.add_argument("--seed", type=int, default=0)
    output(sp)
    sp.set_defaults(func=cmd_random)

    sp = sub.add_parser("game", help="dump the max-plus simulation game and its winner")
    pair(sp), output(sp)
    sp.set_defaults(func=cmd_game)

    sp = sub.add_parser("tree-weight", help="weight of a tree")
    sp.add_argument("automaton")
    sp.add_argument("tree", help="term such as f(c,c)")
    sp.set_defaults(func=cmd_tree_weight)

    sp = sub.add_parser("tree-simsearch", help="search for a tree simulation matrix")
    pair(sp), direction(sp), output(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_tree_simsearch)

    sp = sub.add_parser("tree-simcheck", help="verify a tree simulation matrix")
    pair(sp), direction(sp)
    sp.add_argument("--matrix", required=True)
    sp.set_defaults(func=cmd_tree_simcheck)

    sp = sub.add_parser("tree-fpe", help="forward partial execution of a tree automaton")
    sp.add_argument("automaton")
    sp.add_argument("--states", required=True, help="comma-separated parameter states")
    output(sp)
    sp.set_defaults(func=cmd_tree_fpe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, AutomatonError, MatrixError, SemiringError, ValueError, OSError) as e:
        print(f"weightsim: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
