"""Forward and backward partial execution of word automata.

Forward partial execution (FPE) with parameter ``P`` replaces every state
``x`` in ``P`` by its one-step behaviours: a fresh accepting state ``✓``
stands for "accept now" and a state ``(a, y)`` for "read ``a`` and move to
``y``".  Backward partial execution (BPE) does the same with incoming
steps and a fresh initial state ``•``.  Both preserve the weighted language and
can make simulations exist where none did before.

New states are ordered ``✓`` / ``•`` first, then ``(a, y)`` by
alphabet position and ``y``, then the untouched states ascending.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .automata import WeightedAutomaton
from .linalg import Matrix, mat_mul
from .semiring import semiring

ACCEPT = "✓"
START = "•"


class PEMode(enum.Enum):
    FPE = "fpe"
    BPE = "bpe"


@dataclass(frozen=True)
class PESpec:
    mode: PEMode
    P: frozenset

    def apply(self, A: WeightedAutomaton) -> WeightedAutomaton:
        return fpe(A, self.P) if self.mode is PEMode.FPE else bpe(A, self.P)


def _check_param(A: WeightedAutomaton, P) -> frozenset:
    P = frozenset(P)
    bad = [x for x in P if not (isinstance(x, int) and 0 <= x < A.n)]
    if bad:
        raise ValueError(f"parameter states {sorted(map(str, bad))} outside 0..{A.n - 1}")
    return P


def _fpe_layout(A: WeightedAutomaton, P: frozenset):
    """New state list for FPE: entries are ``ACCEPT``, ``(a, y)`` or an old state index."""
    states: list = []
    if any(A.beta.get(x, 0) != A.semiring.zero for x in P):
        states.append(ACCEPT)
    for a in A.alphabet:
        ys = sorted({y for x in P for y in A.M[a].row(x)})
        states.extend((a, y) for y in ys)
    states.extend(x for x in range(A.n) if x not in P)
    if not states:
        # the language is zero; keep one state so the result is an automaton
        states.append(ACCEPT)
    return states


def _bpe_layout(A: WeightedAutomaton, P: frozenset):
    states: list = []
    if any(A.alpha.get(0, x) != A.semiring.zero for x in P):
        states.append(START)
    for a in A.alphabet:
        col = {y for x in P for y in A.M[a].col(x)}
        states.extend((a, y) for y in sorted(col))
    states.extend(x for x in range(A.n) if x not in P)
    if not states:
        states.append(START)
    return states


def _names(A, states, fresh):
    out = []
    for s in states:
        if s == fresh:
            out.append(fresh)
        elif isinstance(s, tuple):
            out.append(f"({s[0]},{A.state_label(s[1])})")
        else:
            out.append(A.state_label(s))
    return out


def lemma43_witness(A: WeightedAutomaton, P) -> Matrix:
    """The unfolding matrix ``F`` (``|Q| x |Q'|``) relating ``A`` to ``fpe(A, P)``.

    ``F[x, ok] = beta_x`` and ``F[x, (a,y)] = M(a)[x,y]`` for ``x`` in ``P``,
    ``F[x, x] = 1`` otherwise.  It is a backward simulation from ``A`` to
    ``fpe(A, P)``.
    """
    P = _check_param(A, P)
    return _unfold_forward(A, P, _fpe_layout(A, P))


def _unfold_forward(A, P, states):
    one = semiring(A.kind).one
    pos = {s: k for k, s in enumerate(states)}
    entries = {}
    for x in range(A.n):
        if x in P:
            if ACCEPT in pos:
                entries[(x, pos[ACCEPT])] = A.beta.get(x, 0)
            for a in A.alphabet:
                for y, w in A.M[a].row(x).items():
                    entries[(x, pos[(a, y)])] = w
        else:
            entries[(x, pos[x])] = one
    return Matrix(A.kind, A.n, len(states), entries)


def bpe_witness(A: WeightedAutomaton, P) -> Matrix:
    """The folding matrix ``G`` (``|Q'| x |Q|``); a backward simulation from ``bpe(A, P)`` to ``A``."""
    P = _check_param(A, P)
    return _unfold_backward(A, P, _bpe_layout(A, P))


def _unfold_backward(A, P, states):
    one = semiring(A.kind).one
    pos = {s: k for k, s in enumerate(states)}
    entries = {}
    for x in range(A.n):
        if x in P:
            if START in pos:
                entries[(pos[START], x)] = A.alpha.get(0, x)
            for a in A.alphabet:
                for y, w in A.M[a].col(x).items():
                    entries[(pos[(a, y)], x)] = w
        else:
            entries[(pos[x], x)] = one
    return Matrix(A.kind, len(states), A.n, entries)


def fpe(A: WeightedAutomaton, P) -> WeightedAutomaton:
    P = _check_param(A, P)
    if not P:
        return A
    states = _fpe_layout(A, P)
    F = _unfold_forward(A, P, states)
    k = len(states)
    one = semiring(A.kind).one
    M = {}
    for a in A.alphabet:
        MF = mat_mul(A.M[a], F)
        entries = {}
        for i, s in enumerate(states):
            if s == ACCEPT:
                continue
            if isinstance(s, tuple):
                if s[0] == a:
                    for j, w in F.row(s[1]).items():
                        entries[(i, j)] = w
            else:
                for j, w in MF.row(s).items():
                    entries[(i, j)] = w
        M[a] = Matrix(A.kind, k, k, entries)
    alpha = mat_mul(A.alpha, F)
    beta = {}
    for i, s in enumerate(states):
        if s == ACCEPT:
            beta[(i, 0)] = one
        elif not isinstance(s, tuple):
            beta[(i, 0)] = A.beta.get(s, 0)
    return WeightedAutomaton(A.kind, k, A.alphabet, M, alpha, Matrix(A.kind, k, 1, beta),
                             _names(A, states, ACCEPT))


def bpe(A: WeightedAutomaton, P) -> WeightedAutomaton:
    P = _check_param(A, P)
    if not P:
        return A
    states = _bpe_layout(A, P)
    G = _unfold_backward(A, P, states)
    k = len(states)
    one = semiring(A.kind).one
    M = {}
    for a in A.alphabet:
        GM = mat_mul(G, A.M[a])
        entries = {}
        for j, s in enumerate(states):
            if s == START:
                continue
            if isinstance(s, tuple):
                if s[0] == a:
                    for i, w in G.col(s[1]).items():
                        entries[(i, j)] = w
            else:
                for i, w in GM.col(s).items():
                    entries[(i, j)] = w
        M[a] = Matrix(A.kind, k, k, entries)
    beta = mat_mul(G, A.beta)
    alpha = {}
    for j, s in enumerate(states):
        if s == START:
            alpha[(0, j)] = one
        elif not isinstance(s, tuple):
            alpha[(0, j)] = A.alpha.get(0, s)
    return WeightedAutomaton(A.kind, k, A.alphabet, M, Matrix(A.kind, 1, k, alpha), beta,
                             _names(A, states, START))


def fpe_param(A: WeightedAutomaton, d: int) -> frozenset:
    """States that reach a final state in at most ``d`` steps."""
    if d < 0:
        raise ValueError("depth must be non-negative")
    reach = {x for (x, _), _ in A.beta.items()}
    frontier = set(reach)
    for _ in range(d):
        new = set()
        for m in A.M.values():
            for (x, y), _ in m.items():
                if y in frontier and x not in reach:
                    new.add(x)
        if not new:
            break
        reach |= new
        frontier = new
    return frozenset(reach)


def bpe_param(A: WeightedAutomaton, d: int) -> frozenset:
    """States reachable from an initial state in at most ``d`` steps."""
    if d < 0:
        raise ValueError("depth must be non-negative")
    reach = {x for (_, x), _ in A.alpha.items()}
    frontier = set(reach)
    for _ in range(d):
        new = set()
        for m in A.M.values():
            for (x, y), _ in m.items():
                if x in frontier and y not in reach:
                    new.add(y)
        if not new:
            break
        reach |= new
        frontier = new
    return frozenset(reach)
