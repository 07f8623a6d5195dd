"""Brute-force reference implementations and random generators shared by the tests.

Nothing here goes through the matrix kernels: word weights are sums over
explicit state sequences and tree weights are sums over explicit run
labelings.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from weightsim.automata import build_automaton, symbol_names
from weightsim.semiring import SemiringKind, semiring
from weightsim.tree import RankedAlphabet, build_tree_automaton

FIXTURES = Path(__file__).parent / "fixtures"

PT, MP, BOOL = SemiringKind.PLUS_TIMES, SemiringKind.MAX_PLUS, SemiringKind.BOOLEAN

POOLS = {
    PT: [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)],
    MP: [Fraction(i) for i in range(-3, 4)],
    BOOL: [True],
}


def words(alphabet, max_len):
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


def run_word_weight(A, word):
    """Sum over all state sequences of the product of their weights."""
    sr = A.semiring
    total = sr.zero
    for path in itertools.product(range(A.n), repeat=len(word) + 1):
        w = A.alpha.get(0, path[0])
        for a, (x, y) in zip(word, zip(path, path[1:])):
            w = sr.mul(w, A.M[a].get(x, y))
        w = sr.mul(w, A.beta.get(path[-1], 0))
        total = sr.add(total, w)
    return total


def run_tree_weight(A, t):
    """Sum over all labelings of the nodes of ``t`` by states."""
    sr = A.semiring
    nodes = []

    def collect(u):
        k = len(nodes)
        nodes.append(u)
        kids = [collect(c) for c in u.children]
        return k, kids

    shape = collect(t)
    total = sr.zero
    for lab in itertools.product(range(A.n), repeat=len(nodes)):
        def weight(node):
            k, kids = node
            u = nodes[k]
            col = 0
            for c, _ in kids:
                col = col * A.n + lab[c]
            w = A.M[u.symbol].get(lab[k], col)
            for kid in kids:
                w = sr.mul(w, weight(kid))
            return w
        total = sr.add(total, sr.mul(A.alpha.get(0, lab[0]), weight(shape)))
    return total


def random_pair_automaton(rng: random.Random, kind, n, k, density=0.5, pool=None):
    """Random automaton with a random (possibly multi-state) initial vector."""
    pool = pool or POOLS[kind]
    alphabet = symbol_names(k)
    trans = [(a, x, y, rng.choice(pool)) for a in alphabet for x in range(n) for y in range(n)
             if rng.random() < density]
    init = {x: rng.choice(pool) for x in range(n) if rng.random() < density}
    if not init:
        init = {rng.randrange(n): rng.choice(pool)}
    final = {x: rng.choice(pool) for x in range(n) if rng.random() < density}
    return build_automaton(kind, n, alphabet, init, final, trans)


def dominating(rng: random.Random, A, extra=0.2):
    """A copy of ``A`` with weights raised and a few transitions added, so ``L(A) <= L(B)``."""
    sr = A.semiring
    kind = A.kind

    def bump(w):
        if kind is PT:
            return w * rng.choice([1, 1, Fraction(3, 2), 2])
        if kind is MP:
            return w + rng.choice([0, 0, 1])
        return w

    trans = [(a, x, y, bump(w)) for a in A.alphabet for (x, y), w in A.M[a].items()]
    trans += [(a, x, y, rng.choice(POOLS[kind])) for a in A.alphabet for x in range(A.n)
              for y in range(A.n) if rng.random() < extra and A.M[a].get(x, y) == sr.zero]
    init = {x: bump(w) for (_, x), w in A.alpha.items()}
    final = {x: bump(w) for (x, _), w in A.beta.items()}
    return build_automaton(kind, A.n, A.alphabet, init, final, trans)


def random_tree(rng: random.Random, kind, n, alphabet: RankedAlphabet, density=0.5, pool=None):
    pool = pool or POOLS[kind]
    trans = []
    for sym, k in alphabet.items():
        for q in range(n):
            for ys in itertools.product(range(n), repeat=k):
                if rng.random() < density:
                    trans.append((sym, q, ys, rng.choice(pool)))
    init = {q: rng.choice(pool) for q in range(n) if rng.random() < density}
    if not init:
        init = {rng.randrange(n): rng.choice(pool)}
    return build_tree_automaton(kind, n, alphabet, init, trans)


def leq(kind, a, b):
    return semiring(kind).leq(a, b)
