"""Weighted word automata over the three semirings.

An automaton is ``(n, alphabet, M, alpha, beta)``: ``n`` states indexed
``0..n-1``, one ``n x n`` transition matrix per symbol, an initial row vector
and a final column vector.  The weight of ``a1...ak`` is
``alpha M(a1) ... M(ak) beta``.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .linalg import Matrix, MatrixError, mat_mul, transpose
from .semiring import SemiringError, SemiringKind, Weight, semiring


class AutomatonError(ValueError):
    """Malformed automaton, bad file, or incompatible operands."""


class WeightedAutomaton:
    __slots__ = ("kind", "n", "alphabet", "M", "alpha", "beta", "state_names")

    def __init__(self, kind: SemiringKind, n: int, alphabet: Sequence[str],
                 M: Mapping[str, Matrix], alpha: Matrix, beta: Matrix,
                 state_names: Sequence[str] | None = None):
        if n < 1:
            raise AutomatonError("an automaton needs at least one state")
        alphabet = tuple(alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise AutomatonError(f"duplicate symbols in alphabet {alphabet}")
        if set(M) != set(alphabet):
            raise AutomatonError("transition matrices must be given for exactly the alphabet")
        for a in alphabet:
            m = M[a]
            if m.kind is not kind or m.shape != (n, n):
                raise AutomatonError(f"M({a}) must be a {kind} {n}x{n} matrix")
        if alpha.kind is not kind or alpha.shape != (1, n):
            raise AutomatonError(f"initial vector must be {kind} 1x{n}")
        if beta.kind is not kind or beta.shape != (n, 1):
            raise AutomatonError(f"final vector must be {kind} {n}x1")
        if state_names is not None:
            state_names = tuple(str(s) for s in state_names)
            if len(state_names) != n:
                raise AutomatonError("state_names has the wrong length")
        self.kind = kind
        self.n = n
        self.alphabet = alphabet
        self.M = {a: M[a] for a in alphabet}
        self.alpha = alpha
        self.beta = beta
        self.state_names = state_names

    @property
    def semiring(self):
        return semiring(self.kind)

    def state_label(self, i: int) -> str:
        return self.state_names[i] if self.state_names else str(i)

    def __eq__(self, other) -> bool:
        # State names are cosmetic and ignored.
        return (isinstance(other, WeightedAutomaton) and self.kind is other.kind
                and self.n == other.n and self.alphabet == other.alphabet
                and self.M == other.M and self.alpha == other.alpha and self.beta == other.beta)

    def __hash__(self):
        return hash((self.kind, self.n, self.alphabet, self.alpha, self.beta))

    def __repr__(self) -> str:
        return f"<WeightedAutomaton {self.kind.value} n={self.n} alphabet={list(self.alphabet)}>"

    def transition_count(self) -> int:
        return sum(m.nnz() for m in self.M.values())

    def weight_support(self) -> set:
        """All non-zero raw values occurring in M, alpha and beta."""
        vals = set()
        for m in (*self.M.values(), self.alpha, self.beta):
            vals.update(v for _, v in m.items())
        return vals


def build_automaton(kind: SemiringKind, n: int, alphabet: Sequence[str],
                    initial: Mapping[int, object], final: Mapping[int, object],
                    transitions: Sequence[tuple[str, int, int, object]],
                    state_names: Sequence[str] | None = None) -> WeightedAutomaton:
    """Build an automaton from sparse initial/final maps and ``(sym, src, dst, w)`` triples.

    Repeated transitions are summed in the semiring.
    """
    sr = semiring(kind)
    alphabet = tuple(alphabet)
    entries: dict[str, dict[tuple[int, int], object]] = {a: {} for a in alphabet}
    for sym, src, dst, w in transitions:
        if sym not in entries:
            raise AutomatonError(f"unknown symbol {sym!r}")
        if not (0 <= src < n and 0 <= dst < n):
            raise AutomatonError(f"transition {sym} {src} {dst} references a state outside 0..{n - 1}")
        w = w.value if isinstance(w, Weight) else sr.coerce(w)
        cell = entries[sym]
        cell[(src, dst)] = sr.add(cell[(src, dst)], w) if (src, dst) in cell else w

    def vec(d, shape):
        out = {}
        for s, w in d.items():
            if not 0 <= s < n:
                raise AutomatonError(f"state {s} outside 0..{n - 1}")
            out[(0, s) if shape == "row" else (s, 0)] = w.value if isinstance(w, Weight) else w
        return out

    try:
        M = {a: Matrix(kind, n, n, entries[a]) for a in alphabet}
        alpha = Matrix(kind, 1, n, vec(initial, "row"))
        beta = Matrix(kind, n, 1, vec(final, "col"))
    except MatrixError as e:
        raise AutomatonError(str(e)) from None
    return WeightedAutomaton(kind, n, alphabet, M, alpha, beta, state_names)


def check_compatible(A: WeightedAutomaton, B: WeightedAutomaton) -> None:
    if A.kind is not B.kind:
        raise SemiringError(f"semiring mismatch: {A.kind} vs {B.kind}")
    if A.alphabet != B.alphabet:
        if set(A.alphabet) == set(B.alphabet):
            return
        raise AutomatonError(f"alphabet mismatch: {list(A.alphabet)} vs {list(B.alphabet)}")


def word_weight(A: WeightedAutomaton, word: Sequence[str]):
    """Raw weight of ``word``."""
    v = A.alpha
    for a in word:
        m = A.M.get(a)
        if m is None:
            raise AutomatonError(f"symbol {a!r} not in alphabet")
        v = mat_mul(v, m)
    return mat_mul(v, A.beta).get(0, 0)


def prefix_weights(A: WeightedAutomaton, max_len: int) -> Iterator[tuple[tuple[str, ...], object]]:
    """Yield ``(word, weight)`` for every word up to ``max_len``, shortest first.

    Forward vectors are shared between words with a common prefix.
    """
    level = [((), A.alpha)]
    for length in range(max_len + 1):
        for w, v in level:
            yield w, mat_mul(v, A.beta).get(0, 0)
        if length == max_len:
            break
        level = [(w + (a,), mat_mul(v, A.M[a])) for w, v in level for a in A.alphabet]


def all_words(alphabet: Sequence[str], max_len: int) -> Iterator[tuple[str, ...]]:
    """Words over ``alphabet`` of length at most ``max_len`` in length-lexicographic order."""
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


def format_word(word: Sequence[str]) -> str:
    return " ".join(word) if word else "<eps>"


def parse_word(text: str) -> tuple[str, ...]:
    text = text.strip()
    if text in ("", "<eps>", "eps"):
        return ()
    if " " in text or "," in text:
        return tuple(t for t in text.replace(",", " ").split() if t)
    return tuple(text)


def transpose_automaton(A: WeightedAutomaton) -> WeightedAutomaton:
    return WeightedAutomaton(A.kind, A.n, A.alphabet,
                             {a: transpose(m) for a, m in A.M.items()},
                             transpose(A.beta), transpose(A.alpha), A.state_names)


def coreachable_states(A: WeightedAutomaton) -> set[int]:
    """States from which some final state is reachable through non-zero transitions."""
    preds: dict[int, set[int]] = {}
    for m in A.M.values():
        for (i, j), _ in m.items():
            preds.setdefault(j, set()).add(i)
    seen = {i for (i, _), _ in A.beta.items()}
    stack = list(seen)
    while stack:
        j = stack.pop()
        for i in preds.get(j, ()):
            if i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def restrict(A: WeightedAutomaton, keep: Sequence[int]) -> WeightedAutomaton:
    """Sub-automaton on the states ``keep`` (in the given order)."""
    keep = list(keep)
    index = {s: k for k, s in enumerate(keep)}
    n = len(keep)
    M = {}
    for a, m in A.M.items():
        M[a] = Matrix(A.kind, n, n, {(index[i], index[j]): v for (i, j), v in m.items()
                                     if i in index and j in index})
    alpha = Matrix(A.kind, 1, n, {(0, index[j]): v for (_, j), v in A.alpha.items() if j in index})
    beta = Matrix(A.kind, n, 1, {(index[i], 0): v for (i, _), v in A.beta.items() if i in index})
    names = [A.state_label(s) for s in keep] if A.state_names else None
    return WeightedAutomaton(A.kind, n, A.alphabet, M, alpha, beta, names)


def remove_trap_states(A: WeightedAutomaton) -> WeightedAutomaton:
    """Drop states with no non-zero path to acceptance.

    Language is preserved.  When nothing survives the result is the
    one-state automaton with zero initial and final weight.
    """
    keep = sorted(coreachable_states(A))
    if not keep:
        kind = A.kind
        return WeightedAutomaton(kind, 1, A.alphabet,
                                 {a: Matrix.zeros(kind, 1, 1) for a in A.alphabet},
                                 Matrix.zeros(kind, 1, 1), Matrix.zeros(kind, 1, 1))
    if len(keep) == A.n:
        return A
    return restrict(A, keep)


def symbol_names(k: int) -> list[str]:
    """``a, b, ..., z, a1, b1, ...``"""
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [letters[i % 26] + (str(i // 26) if i >= 26 else "") for i in range(k)]


def random_automaton(kind: SemiringKind, n: int, alphabet_size: int, p, pool: Sequence[object],
                     seed: int) -> WeightedAutomaton:
    """Random automaton with transition density ``p``.

    Every ``(symbol, src, dst)`` is present with probability ``p`` and gets a
    weight drawn uniformly from ``pool``.  One uniformly chosen state is
    initial with weight one; each state is final with probability ``p``.
    """
    if n < 1:
        raise AutomatonError("n must be at least 1")
    if not pool:
        raise AutomatonError("weight pool is empty")
    p = Fraction(p) if not isinstance(p, float) else p
    if not 0 <= p <= 1:
        raise AutomatonError(f"density {p} outside [0, 1]")
    p = float(p)
    sr = semiring(kind)
    pool = [w.value if isinstance(w, Weight) else sr.coerce(w) for w in pool]
    rng = random.Random(seed)
    alphabet = symbol_names(alphabet_size)
    trans = []
    for a in alphabet:
        for src in range(n):
            for dst in range(n):
                if rng.random() < p:
                    trans.append((a, src, dst, rng.choice(pool)))
    init = rng.randrange(n)
    final = {}
    for s in range(n):
        if rng.random() < p:
            final[s] = rng.choice(pool)
    return build_automaton(kind, n, alphabet, {init: sr.one}, final, trans)


# File format

def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _state_weight(tok: str, sr, lineno: int) -> tuple[int, object]:
    if ":" not in tok:
        raise AutomatonError(f"line {lineno}: expected state:weight, got {tok!r}")
    s, w = tok.split(":", 1)
    try:
        return int(s), sr.parse(w)
    except ValueError as e:
        raise AutomatonError(f"line {lineno}: {e}") from None


def parse_automaton(text: str) -> WeightedAutomaton:
    kind = n = None
    alphabet: list[str] = []
    initial: dict[int, object] = {}
    final: dict[int, object] = {}
    trans = []
    for lineno, toks in _tokens(text):
        head, args = toks[0], toks[1:]
        if head == "semiring":
            if len(args) != 1:
                raise AutomatonError(f"line {lineno}: expected 'semiring <kind>'")
            try:
                kind = SemiringKind.from_tag(args[0])
            except SemiringError as e:
                raise AutomatonError(f"line {lineno}: {e}") from None
            continue
        if kind is None:
            raise AutomatonError(f"line {lineno}: 'semiring' header must come first")
        sr = semiring(kind)
        if head == "states":
            try:
                n = int(args[0])
            except (IndexError, ValueError):
                raise AutomatonError(f"line {lineno}: expected 'states <n>'") from None
        elif head == "alphabet":
            alphabet.extend(args)
        elif head in ("initial", "final"):
            dst = initial if head == "initial" else final
            for tok in args:
                s, w = _state_weight(tok, sr, lineno)
                dst[s] = sr.add(dst[s], w) if s in dst else w
        elif head == "trans":
            if len(args) != 4:
                raise AutomatonError(f"line {lineno}: expected 'trans <sym> <src> <dst> <weight>'")
            try:
                trans.append((args[0], int(args[1]), int(args[2]), sr.parse(args[3])))
            except ValueError as e:
                raise AutomatonError(f"line {lineno}: {e}") from None
        else:
            raise AutomatonError(f"line {lineno}: unknown directive {head!r}")
    if kind is None:
        raise AutomatonError("missing 'semiring' header")
    if n is None:
        raise AutomatonError("missing 'states' line")
    return build_automaton(kind, n, alphabet, initial, final, trans)


def format_automaton(A: WeightedAutomaton) -> str:
    sr = A.semiring
    lines = [f"semiring {A.kind.value}", f"states {A.n}"]
    lines.append("alphabet" + "".join(" " + a for a in A.alphabet))
    lines.append("initial" + "".join(f" {j}:{sr.format(v)}" for (_, j), v in A.alpha.items()))
    lines.append("final" + "".join(f" {i}:{sr.format(v)}" for (i, _), v in A.beta.items()))
    for a in A.alphabet:
        for (i, j), v in A.M[a].items():
            lines.append(f"trans {a} {i} {j} {sr.format(v)}")
    return "\n".join(lines) + "\n"


def load_automaton(path) -> WeightedAutomaton:
    with open(path, encoding="utf-8") as f:
        return parse_automaton(f.read())


def save_automaton(A: WeightedAutomaton, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_automaton(A))
