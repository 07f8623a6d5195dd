"""Weighted tree automata over ranked alphabets.

A tree automaton has ``n`` states, an initial row vector ``alpha`` and for
each symbol ``a`` of arity ``k`` an ``n x n^k`` matrix ``M(a)`` whose
columns are indexed by ``Q^k`` in row-major order (first child most
significant).  The weight of a tree is ``alpha . Phi(t)`` with

    Phi(a(t_1, ..., t_k)) = M(a) (Phi(t_1) (x) ... (x) Phi(t_k)).

Simulation matrices for trees involve Kronecker powers of ``X``, so their
constraints are polynomial.
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .automata import WeightedAutomaton
from .linalg import Matrix, MatrixError, first_violation, kron, kron_power, mat_mul
from .semiring import NEG_INF, SemiringError, SemiringKind, Weight, semiring
from .simulation import Constraint, ConstraintSystem, Direction, SearchOutcome, VerifyReport


class TreeError(ValueError):
    """Malformed tree, tree automaton or tree file."""


class RankedAlphabet:
    """Symbols with arities, in declaration order."""

    __slots__ = ("_arity", "symbols")

    def __init__(self, arities: Mapping[str, int] | Sequence[tuple[str, int]]):
        items = list(arities.items()) if isinstance(arities, Mapping) else list(arities)
        self._arity: dict[str, int] = {}
        for name, k in items:
            if name in self._arity:
                raise TreeError(f"duplicate symbol {name!r}")
            if not isinstance(k, int) or k < 0:
                raise TreeError(f"arity of {name!r} must be a non-negative integer")
            self._arity[name] = k
        self.symbols = tuple(self._arity)

    def arity(self, sym: str) -> int:
        try:
            return self._arity[sym]
        except KeyError:
            raise TreeError(f"unknown symbol {sym!r}") from None

    def __contains__(self, sym) -> bool:
        return sym in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def items(self):
        return self._arity.items()

    def of_arity(self, k: int) -> list[str]:
        return [s for s, a in self._arity.items() if a == k]

    @property
    def max_arity(self) -> int:
        return max(self._arity.values(), default=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, RankedAlphabet) and list(self.items()) == list(other.items())

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        return "RankedAlphabet(" + ", ".join(f"{s}:{k}" for s, k in self.items()) + ")"


@dataclass(frozen=True)
class Tree:
    symbol: str
    children: tuple = ()

    def __str__(self) -> str:
        if not self.children:
            return self.symbol
        return f"{self.symbol}(" + ",".join(str(c) for c in self.children) + ")"

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def nodes(self) -> Iterator["Tree"]:
        yield self
        for c in self.children:
            yield from c.nodes()


_TOKEN = re.compile(r"\s*([^\s(),]+|[(),])")


def parse_tree(text: str, alphabet: RankedAlphabet | None = None) -> Tree:
    """Parse ``f(c,g(c))``.  With an alphabet, arities are checked."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TreeError(f"cannot tokenize tree at {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
    if not toks:
        raise TreeError("empty tree")
    i = 0

    def node() -> Tree:
        nonlocal i
        if i >= len(toks) or toks[i] in "(),":
            raise TreeError(f"expected a symbol in {text!r}")
        sym = toks[i]
        i += 1
        kids = []
        if i < len(toks) and toks[i] == "(":
            i += 1
            kids.append(node())
            while i < len(toks) and toks[i] == ",":
                i += 1
                kids.append(node())
            if i >= len(toks) or toks[i] != ")":
                raise TreeError(f"missing ')' in {text!r}")
            i += 1
        t = Tree(sym, tuple(kids))
        if alphabet is not None and alphabet.arity(sym) != len(kids):
            raise TreeError(f"{sym} has arity {alphabet.arity(sym)} but {len(kids)} children in {text!r}")
        return t

    t = node()
    if i != len(toks):
        raise TreeError(f"trailing input in {text!r}")
    return t


class WeightedTreeAutomaton:
    __slots__ = ("kind", "n", "alphabet", "M", "alpha", "state_names")

    def __init__(self, kind: SemiringKind, n: int, alphabet: RankedAlphabet,
                 M: Mapping[str, Matrix], alpha: Matrix, state_names: Sequence[str] | None = None):
        if n < 1:
            raise TreeError("a tree automaton needs at least one state")
        if set(M) != set(alphabet.symbols):
            raise TreeError("transition matrices must be given for exactly the ranked alphabet")
        for a in alphabet:
            k = alphabet.arity(a)
            m = M[a]
            if m.kind is not kind or m.shape != (n, n ** k):
                raise TreeError(f"M({a}) must be a {kind} {n}x{n ** k} matrix")
        if alpha.kind is not kind or alpha.shape != (1, n):
            raise TreeError(f"initial vector must be {kind} 1x{n}")
        self.kind = kind
        self.n = n
        self.alphabet = alphabet
        self.M = {a: M[a] for a in alphabet}
        self.alpha = alpha
        self.state_names = tuple(state_names) if state_names is not None else None

    @property
    def semiring(self):
        return semiring(self.kind)

    def state_label(self, i: int) -> str:
        return self.state_names[i] if self.state_names else str(i)

    def __eq__(self, other) -> bool:
        return (isinstance(other, WeightedTreeAutomaton) and self.kind is other.kind
                and self.n == other.n and self.alphabet == other.alphabet
                and self.M == other.M and self.alpha == other.alpha)

    def __hash__(self):
        return hash((self.kind, self.n, self.alphabet, self.alpha))

    def __repr__(self) -> str:
        return f"<WeightedTreeAutomaton {self.kind.value} n={self.n} {self.alphabet!r}>"

    def weight_support(self) -> set:
        vals = set()
        for m in (*self.M.values(), self.alpha):
            vals.update(v for _, v in m.items())
        return vals


def tuple_index(ys: Sequence[int], n: int) -> int:
    idx = 0
    for y in ys:
        idx = idx * n + y
    return idx


def index_tuple(idx: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        idx, r = divmod(idx, n)
        out.append(r)
    return tuple(reversed(out))


def phi(A: WeightedTreeAutomaton, t: Tree) -> Matrix:
    """The ``n x 1`` vector of weights of ``t`` from each root state."""
    k = A.alphabet.arity(t.symbol)
    if k != len(t.children):
        raise TreeError(f"{t.symbol} has arity {k} but {len(t.children)} children")
    v = Matrix.identity(A.kind, 1)
    for c in t.children:
        v = kron(v, phi(A, c))
    return mat_mul(A.M[t.symbol], v)


def tree_weight(A: WeightedTreeAutomaton, t: Tree):
    """Raw weight ``alpha . Phi(t)``."""
    return mat_mul(A.alpha, phi(A, t)).get(0, 0)


def enumerate_trees(alphabet: RankedAlphabet, max_depth: int) -> list[Tree]:
    """All trees of depth at most ``max_depth`` (a leaf has depth 1)."""
    leaves = alphabet.of_arity(0)
    if not leaves:
        raise TreeError("the ranked alphabet has no constant symbol")
    if max_depth < 1:
        return []
    level = [Tree(c) for c in leaves]
    for _ in range(max_depth - 1):
        nxt = []
        for s, k in alphabet.items():
            if k == 0:
                nxt.append(Tree(s))
            else:
                nxt.extend(Tree(s, kids) for kids in itertools.product(level, repeat=k))
        level = nxt
    return level


def word_to_tree_automaton(A: WeightedAutomaton, end: str = "$") -> WeightedTreeAutomaton:
    """Embed a word automaton: letters become unary symbols, ``end`` carries beta."""
    if end in A.alphabet:
        raise TreeError(f"end symbol {end!r} clashes with the alphabet")
    ranked = RankedAlphabet([(a, 1) for a in A.alphabet] + [(end, 0)])
    M = dict(A.M)
    M[end] = A.beta
    return WeightedTreeAutomaton(A.kind, A.n, ranked, M, A.alpha, A.state_names)


def spine(word: Sequence[str], end: str = "$") -> Tree:
    t = Tree(end)
    for a in reversed(word):
        t = Tree(a, (t,))
    return t


def check_tree_compatible(A: WeightedTreeAutomaton, B: WeightedTreeAutomaton) -> None:
    if A.kind is not B.kind:
        raise SemiringError(f"semiring mismatch: {A.kind} vs {B.kind}")
    if dict(A.alphabet.items()) != dict(B.alphabet.items()):
        raise TreeError("ranked alphabets differ")


# Simulation constraints


@dataclass
class PolyConstraint:
    """``sum lhs[mono] * prod x[mono] <= sum rhs[mono] * prod x[mono]``.

    A monomial is a sorted tuple of variable indices; ``()`` is the constant.
    """
    tag: tuple
    lhs: dict
    rhs: dict

    def degree(self) -> int:
        return max((len(mono) for mono in (*self.lhs, *self.rhs)), default=0)

    def side(self, sr, terms, x):
        acc = sr.zero
        for mono, c in terms.items():
            acc = sr.add(acc, sr.mul(c, sr.product(x[v] for v in mono)))
        return acc

    def evaluate(self, sr, x):
        return self.side(sr, self.lhs, x), self.side(sr, self.rhs, x)

    def holds(self, sr, x) -> bool:
        left, right = self.evaluate(sr, x)
        return sr.leq(left, right)


@dataclass
class PolySystem:
    kind: SemiringKind
    direction: Direction
    rows: int
    cols: int
    constraints: list

    @property
    def var_count(self) -> int:
        return self.rows * self.cols

    def degree(self) -> int:
        return max((c.degree() for c in self.constraints), default=0)

    def matrix_from(self, values) -> Matrix:
        return Matrix(self.kind, self.rows, self.cols,
                      {(k // self.cols, k % self.cols): v for k, v in enumerate(values)})

    def values_of(self, X: Matrix) -> list:
        return [X.get(k // self.cols, k % self.cols) for k in range(self.var_count)]

    def linearize(self) -> ConstraintSystem:
        """The same constraints as a linear :class:`ConstraintSystem` (degree at most one)."""
        if self.degree() > 1:
            raise TreeError("system is not linear")
        zero = semiring(self.kind).zero
        out = []
        for c in self.constraints:
            lhs = {mono[0]: w for mono, w in c.lhs.items() if mono}
            rhs = {mono[0]: w for mono, w in c.rhs.items() if mono}
            out.append(Constraint(c.tag, lhs, c.lhs.get((), zero), rhs, c.rhs.get((), zero)))
        return ConstraintSystem(self.kind, self.direction, self.rows, self.cols, out)


def _add_term(sr, terms, mono, w):
    terms[mono] = sr.add(terms[mono], w) if mono in terms else w


def assemble_tree_constraints(A: WeightedTreeAutomaton, B: WeightedTreeAutomaton,
                              direction: Direction) -> PolySystem:
    """Polynomial constraints of a forward (``m x n``) or backward (``n x m``) tree simulation.

    Forward: ``alpha_A <= alpha_B X`` and ``X M_A(a) <= M_B(a) X^(k)`` with
    one constraint per entry (``m n^k`` for a symbol of arity ``k``).
    Backward: ``alpha_A X <= alpha_B`` and ``M_A(a) X^(k) <= X M_B(a)``.
    """
    check_tree_compatible(A, B)
    sr = semiring(A.kind)
    n, m = A.n, B.n
    out = []
    if direction is Direction.FWD:
        var = lambda q, p: q * n + p  # noqa: E731
        aA, aB = A.alpha.row(0), B.alpha.row(0)
        for p in range(n):
            lhs = {(): aA[p]} if p in aA else {}
            out.append(PolyConstraint(("initial", p), lhs, {(var(q, p),): w for q, w in aB.items()}))
        for a in A.alphabet:
            k = A.alphabet.arity(a)
            MA, MB = A.M[a], B.M[a]
            for q in range(m):
                rowB = MB.row(q)
                for ps_idx in range(n ** k):
                    ps = index_tuple(ps_idx, n, k)
                    lhs = {(var(q, p),): w for p, w in MA.col(ps_idx).items()}
                    rhs: dict = {}
                    for qs_idx, w in rowB.items():
                        qs = index_tuple(qs_idx, m, k)
                        mono = tuple(sorted(var(qi, pi) for qi, pi in zip(qs, ps)))
                        _add_term(sr, rhs, mono, w)
                    out.append(PolyConstraint(("step", a, q, ps), lhs, rhs))
        return PolySystem(A.kind, direction, m, n, out)
    var = lambda p, q: p * m + q  # noqa: E731
    aA, aB = A.alpha.row(0), B.alpha.row(0)
    for q in range(m):
        rhs = {(): aB[q]} if q in aB else {}
        out.append(PolyConstraint(("initial", q), {(var(p, q),): w for p, w in aA.items()}, rhs))
    for a in A.alphabet:
        k = A.alphabet.arity(a)
        MA, MB = A.M[a], B.M[a]
        for p in range(n):
            rowA = MA.row(p)
            for qs_idx in range(m ** k):
                qs = index_tuple(qs_idx, m, k)
                lhs: dict = {}
                for ps_idx, w in rowA.items():
                    ps = index_tuple(ps_idx, n, k)
                    mono = tuple(sorted(var(pi, qi) for pi, qi in zip(ps, qs)))
                    _add_term(sr, lhs, mono, w)
                rhs = {(var(p, q),): w for q, w in MB.col(qs_idx).items()}
                out.append(PolyConstraint(("step", a, p, qs), lhs, rhs))
    return PolySystem(A.kind, direction, n, m, out)


def tree_sim_shape(A, B, direction: Direction) -> tuple[int, int]:
    return (B.n, A.n) if direction is Direction.FWD else (A.n, B.n)


def verify_tree_sim(A: WeightedTreeAutomaton, B: WeightedTreeAutomaton, direction: Direction,
                    X: Matrix) -> VerifyReport:
    """Exact check of every tree simulation inequality."""
    check_tree_compatible(A, B)
    if X.kind is not A.kind:
        raise SemiringError(f"{X.kind} matrix for {A.kind} automata")
    shape = tree_sim_shape(A, B, direction)
    if X.shape != shape:
        raise MatrixError(f"{direction} simulation must be {shape[0]}x{shape[1]}, got {X.rows}x{X.cols}")
    fwd = direction is Direction.FWD
    if fwd:
        left, right = A.alpha, mat_mul(B.alpha, X)
    else:
        left, right = mat_mul(A.alpha, X), B.alpha
    bad = first_violation(left, right)
    if bad is not None:
        return VerifyReport(False, ("initial", bad[1]), left.get(*bad), right.get(*bad))
    powers: dict[int, Matrix] = {}
    for a in A.alphabet:
        k = A.alphabet.arity(a)
        if k not in powers:
            powers[k] = kron_power(X, k)
        Xk = powers[k]
        if fwd:
            left = mat_mul(X, A.M[a])
            right = mat_mul(B.M[a], Xk)
            cols_n = A.n
        else:
            left = mat_mul(A.M[a], Xk)
            right = mat_mul(X, B.M[a])
            cols_n = B.n
        bad = first_violation(left, right)
        if bad is not None:
            i, j = bad
            return VerifyReport(False, ("step", a, i, index_tuple(j, cols_n, k)),
                                left.get(i, j), right.get(i, j))
    return VerifyReport(True)


# Search


def _boolean_poly_search(ps: PolySystem, node_limit: int):
    """Complete branching search for Boolean polynomial constraints.

    The current assignment always bounds every solution from above.  A
    violated constraint whose true left-hand monomials are single
    variables forces them to zero; otherwise one of the variables of a true
    monomial must be zero and the search branches on which.
    """
    sr = semiring(SemiringKind.BOOLEAN)
    cons = ps.constraints
    occurs: dict[int, list[int]] = {}
    for ci, c in enumerate(cons):
        for mono in itertools.chain(c.lhs, c.rhs):
            for v in mono:
                occurs.setdefault(v, []).append(ci)
    nodes = 0

    def propagate(x, dirty):
        # Returns (status, branch_monomial): status in {"ok", "conflict", "branch"}.
        pending = set(dirty)
        while pending:
            ci = min(pending)
            pending.discard(ci)
            c = cons[ci]
            if c.holds(sr, x):
                continue
            forced = []
            for mono in c.lhs:
                if all(x[v] for v in mono):
                    if not mono:
                        return "conflict", None
                    if len(mono) == 1:
                        forced.append(mono[0])
            if not forced:
                continue
            for v in forced:
                x[v] = False
                pending.update(occurs.get(v, ()))
        for c in cons:
            if not c.holds(sr, x):
                mono = next(mono for mono in c.lhs if mono and all(x[v] for v in mono))
                return "branch", mono
        return "ok", None

    def search(x):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise _Budget
        status, mono = propagate(x, range(len(cons)))
        if status == "ok":
            return x
        if status == "conflict":
            return None
        for v in mono:
            y = list(x)
            y[v] = False
            got = search(y)
            if got is not None:
                return got
        return None

    try:
        x = search([True] * ps.var_count)
    except _Budget:
        return SearchOutcome.unknown(method="boolean-branching", nodes=nodes)
    if x is None:
        return SearchOutcome.none(method="boolean-branching", nodes=nodes)
    return SearchOutcome.found_with(ps.matrix_from(x), method="boolean-branching", nodes=nodes)


class _Budget(Exception):
    pass


def _linear_search(ps: PolySystem):
    cs = ps.linearize()
    if ps.kind is SemiringKind.PLUS_TIMES:
        from .lp import lp_feasible, to_linear_system
        sol = lp_feasible(to_linear_system(cs), maximize_total=True)
        if sol is None:
            return SearchOutcome.none(method="lp")
        return SearchOutcome.found_with(cs.matrix_from(sol), method="lp")
    from .maxplus import homogenize, recover_matrix, solve_two_sided
    sys = homogenize(cs)
    x = solve_two_sided(sys)
    if x is None:
        return SearchOutcome.none(method="two-sided")
    return SearchOutcome.found_with(recover_matrix(cs, sys, x), method="two-sided")


def _float_value(v) -> float:
    if v is NEG_INF:
        return float("-inf")
    return float(v)


def _local_search(ps: PolySystem, A, B, seed: int, restarts: int, max_steps: int,
                  noise: float = 0.2):
    """Multi-start stochastic local search over a finite candidate set.

    Each step picks a violated constraint and reassigns one of its
    variables, usually the move that lowers the total violation most,
    sometimes a random one to escape local minima.  Moves are scored in
    floating point for speed; a candidate witness is accepted only after
    exact verification by the caller.
    """
    kind = ps.kind
    sr = semiring(kind)
    cands = sorted(A.weight_support() | B.weight_support() | {sr.zero, sr.one},
                   key=lambda v: (v is not NEG_INF, v if v is not NEG_INF else 0))
    fc = [_float_value(c) for c in cands]
    maxplus = kind is SemiringKind.MAX_PLUS

    def compile_side(terms):
        return [(_float_value(c), mono) for mono, c in terms.items()]

    sides = [(compile_side(c.lhs), compile_side(c.rhs)) for c in ps.constraints]
    cons_vars = [sorted({v for mono in itertools.chain(c.lhs, c.rhs) for v in mono})
                 for c in ps.constraints]
    occurs: dict[int, list[int]] = {}
    for ci, vs in enumerate(cons_vars):
        for v in vs:
            occurs.setdefault(v, []).append(ci)
    nv = ps.var_count
    rng = random.Random(seed)
    ninf = float("-inf")

    def side_value(terms, x):
        if maxplus:
            best = ninf
            for c, mono in terms:
                s = c
                for v in mono:
                    s += x[v]
                if s > best:
                    best = s
            return best
        total = 0.0
        for c, mono in terms:
            p = c
            for v in mono:
                p *= x[v]
            total += p
        return total

    def score_of(ci, x):
        lhs, rhs = sides[ci]
        left, right = side_value(lhs, x), side_value(rhs, x)
        if left <= right + 1e-9 * (1 + abs(right) if right != ninf else 1):
            return 0, 0.0
        if right == ninf:
            return 1, 1000.0 + abs(left)
        return 1, left - right

    starts = []
    zero_i, one_i = cands.index(sr.zero), cands.index(sr.one)
    ident = [zero_i] * nv
    for i in range(min(ps.rows, ps.cols)):
        ident[i * ps.cols + i] = one_i
    starts.append(ident)
    starts.append([one_i] * nv)
    starts.append([zero_i] * nv)
    for _ in range(restarts):
        starts.append([rng.randrange(len(cands)) for _ in range(nv)])

    for start_no, xi in enumerate(starts):
        x = [fc[i] for i in xi]
        scores = [score_of(ci, x) for ci in range(len(sides))]
        bad = {ci for ci, s in enumerate(scores) if s[0]}
        for _ in range(max_steps):
            if not bad:
                break
            ci = rng.choice(sorted(bad))
            vs = cons_vars[ci]
            if not vs:
                break  # a violated constant constraint cannot be repaired
            if rng.random() < noise:
                moves = [(rng.choice(vs), rng.randrange(len(cands)))]
            else:
                moves = [(v, c) for v in vs for c in range(len(cands)) if c != xi[v]]
            best = None
            for v, c in moves:
                touched = occurs[v]
                old = x[v]
                x[v] = fc[c]
                new = [score_of(cj, x) for cj in touched]
                x[v] = old
                delta = (sum(s[0] for s in new) - sum(scores[cj][0] for cj in touched),
                         sum(s[1] for s in new) - sum(scores[cj][1] for cj in touched))
                if best is None or delta < best[0]:
                    best = (delta, v, c, new)
            _, v, c, new = best
            xi[v] = c
            x[v] = fc[c]
            for cj, s in zip(occurs[v], new):
                scores[cj] = s
                if s[0]:
                    bad.add(cj)
                else:
                    bad.discard(cj)
        if not bad:
            X = ps.matrix_from([cands[i] for i in xi])
            yield X, start_no


def find_tree_sim(A: WeightedTreeAutomaton, B: WeightedTreeAutomaton, direction: Direction,
                  seed: int = 0, restarts: int = 4, max_steps: int = 400,
                  node_limit: int = 200000) -> SearchOutcome:
    """Search for a tree simulation matrix.

    Boolean automata get a complete branching search.  Systems of degree at
    most one go to the exact linear solvers.  Otherwise a randomized local
    search may find a witness; failing that the answer is ``Unknown``.
    """
    check_tree_compatible(A, B)
    ps = assemble_tree_constraints(A, B, direction)
    if A.kind is SemiringKind.BOOLEAN:
        out = _boolean_poly_search(ps, node_limit)
    elif ps.degree() <= 1:
        out = _linear_search(ps)
    else:
        out = SearchOutcome.unknown(method="local-search", starts=restarts + 3)
        for X, start_no in _local_search(ps, A, B, seed, restarts, max_steps):
            if verify_tree_sim(A, B, direction, X):
                out = SearchOutcome.found_with(X, method="local-search", start=start_no)
                break
    if out.found:
        report = verify_tree_sim(A, B, direction, out.matrix)
        if not report:
            return SearchOutcome.unknown(method=out.info.get("method"),
                                         error="witness failed verification: " + report.describe(A.kind))
    return out


# Partial execution


def _tree_fpe_layout(A: WeightedTreeAutomaton, P: frozenset):
    states: list = []
    for a in A.alphabet:
        k = A.alphabet.arity(a)
        cols = sorted({j for x in P for j in A.M[a].row(x)})
        states.extend((a, index_tuple(j, A.n, k)) for j in cols)
    states.extend(x for x in range(A.n) if x not in P)
    if not states:
        # zero language; a single inert state keeps the result well formed
        states.append(None)
    return states


def tree_fpe_witness(A: WeightedTreeAutomaton, P) -> Matrix:
    """``F`` with ``F[x, (a,ys)] = M(a)[x,ys]`` for ``x`` in ``P`` and ``F[x,x] = 1`` otherwise.

    It is a backward tree simulation from ``A`` to ``tree_fpe(A, P)``.
    """
    P = _check_tree_param(A, P)
    return _tree_unfold(A, P, _tree_fpe_layout(A, P))


def _tree_unfold(A, P, states):
    one = semiring(A.kind).one
    pos = {s: k for k, s in enumerate(states)}
    entries = {}
    for x in range(A.n):
        if x in P:
            for a in A.alphabet:
                k = A.alphabet.arity(a)
                for j, w in A.M[a].row(x).items():
                    entries[(x, pos[(a, index_tuple(j, A.n, k))])] = w
        else:
            entries[(x, pos[x])] = one
    return Matrix(A.kind, A.n, len(states), entries)


def _check_tree_param(A, P) -> frozenset:
    P = frozenset(P)
    bad = [x for x in P if not (isinstance(x, int) and 0 <= x < A.n)]
    if bad:
        raise ValueError(f"parameter states {sorted(map(str, bad))} outside 0..{A.n - 1}")
    return P


def tree_fpe(A: WeightedTreeAutomaton, P) -> WeightedTreeAutomaton:
    """Replace each state of ``P`` by its one-step behaviours ``(a, (y_1..y_k))``.

    A new state ``(a, ys)`` only reads ``a`` and sends child ``i`` to the
    unfolding of ``y_i``: the weight of a column is the product over the
    children of ``M(b_i)[y_i, zs_i]`` when ``y_i`` was unfolded to
    ``(b_i, zs_i)`` and ``1`` when ``y_i`` survives unchanged.
    """
    P = _check_tree_param(A, P)
    if not P:
        return A
    states = _tree_fpe_layout(A, P)
    F = _tree_unfold(A, P, states)
    k2 = len(states)
    M = {}
    powers: dict[int, Matrix] = {}
    for a in A.alphabet:
        k = A.alphabet.arity(a)
        if k not in powers:
            powers[k] = kron_power(F, k)
        Fk = powers[k]
        MF = mat_mul(A.M[a], Fk)
        entries = {}
        for i, s in enumerate(states):
            if s is None:
                continue
            if isinstance(s, tuple):
                if s[0] == a:
                    for j, w in Fk.row(tuple_index(s[1], A.n)).items():
                        entries[(i, j)] = w
            else:
                for j, w in MF.row(s).items():
                    entries[(i, j)] = w
        M[a] = Matrix(A.kind, k2, k2 ** k, entries)
    names = []
    for s in states:
        if s is None:
            names.append("-")
        elif isinstance(s, tuple):
            names.append(f"({s[0]},{','.join(A.state_label(y) for y in s[1])})")
        else:
            names.append(A.state_label(s))
    return WeightedTreeAutomaton(A.kind, k2, A.alphabet, M, mat_mul(A.alpha, F), names)


# Random generation and I/O


def random_tree_automaton(kind: SemiringKind, n: int, alphabet: RankedAlphabet, p, pool,
                          seed: int) -> WeightedTreeAutomaton:
    """Each ``(symbol, src, children)`` entry present with probability ``p``, weight from ``pool``.

    One uniformly chosen root state gets initial weight one.
    """
    p = float(Fraction(p)) if not isinstance(p, float) else p
    if not 0 <= p <= 1:
        raise TreeError(f"density {p} outside [0, 1]")
    if not pool:
        raise TreeError("weight pool is empty")
    sr = semiring(kind)
    pool = [w.value if isinstance(w, Weight) else sr.coerce(w) for w in pool]
    rng = random.Random(seed)
    M = {}
    for a in alphabet:
        k = alphabet.arity(a)
        entries = {}
        for x in range(n):
            for j in range(n ** k):
                if rng.random() < p:
                    entries[(x, j)] = rng.choice(pool)
        M[a] = Matrix(kind, n, n ** k, entries)
    alpha = Matrix(kind, 1, n, {(0, rng.randrange(n)): sr.one})
    return WeightedTreeAutomaton(kind, n, alphabet, M, alpha)


def parse_tree_automaton(text: str) -> WeightedTreeAutomaton:
    kind = n = None
    ranked: list[tuple[str, int]] = []
    initial: dict[int, object] = {}
    trans = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        try:
            if head == "semiring":
                kind = SemiringKind.from_tag(args[0])
                continue
            if kind is None:
                raise TreeError("'semiring' header must come first")
            sr = semiring(kind)
            if head == "states":
                n = int(args[0])
            elif head == "ranked":
                for tok in args:
                    sym, _, k = tok.rpartition(":")
                    if not sym:
                        raise TreeError(f"expected sym:arity, got {tok!r}")
                    ranked.append((sym, int(k)))
            elif head == "initial":
                for tok in args:
                    s, _, w = tok.partition(":")
                    s, w = int(s), sr.parse(w)
                    initial[s] = sr.add(initial[s], w) if s in initial else w
            elif head == "trans":
                if len(args) != 4:
                    raise TreeError("expected 'trans <sym> <src> <d1,...,dk|-> <weight>'")
                kids = () if args[2] == "-" else tuple(int(t) for t in args[2].split(","))
                trans.append((args[0], int(args[1]), kids, sr.parse(args[3])))
            else:
                raise TreeError(f"unknown directive {head!r}")
        except (ValueError, IndexError, SemiringError) as e:
            raise TreeError(f"line {lineno}: {e}") from None
    if kind is None:
        raise TreeError("missing 'semiring' header")
    if n is None:
        raise TreeError("missing 'states' line")
    alphabet = RankedAlphabet(ranked)
    return build_tree_automaton(kind, n, alphabet, initial, trans)


def build_tree_automaton(kind, n, alphabet: RankedAlphabet, initial, transitions,
                         state_names=None) -> WeightedTreeAutomaton:
    """From ``{state: w}`` and ``(sym, src, children, w)`` entries; repeats are summed."""
    sr = semiring(kind)
    entries = {a: {} for a in alphabet}
    for sym, src, kids, w in transitions:
        k = alphabet.arity(sym)
        if len(kids) != k:
            raise TreeError(f"{sym} has arity {k} but the transition lists {len(kids)} children")
        if not 0 <= src < n or any(not 0 <= y < n for y in kids):
            raise TreeError(f"transition {sym} {src} {kids} references a state outside 0..{n - 1}")
        w = w.value if isinstance(w, Weight) else sr.coerce(w)
        key = (src, tuple_index(kids, n))
        cell = entries[sym]
        cell[key] = sr.add(cell[key], w) if key in cell else w
    M = {a: Matrix(kind, n, n ** alphabet.arity(a), entries[a]) for a in alphabet}
    for s in initial:
        if not 0 <= s < n:
            raise TreeError(f"initial state {s} outside 0..{n - 1}")
    alpha = Matrix(kind, 1, n, {(0, s): w for s, w in initial.items()})
    return WeightedTreeAutomaton(kind, n, alphabet, M, alpha, state_names)


def format_tree_automaton(A: WeightedTreeAutomaton) -> str:
    sr = A.semiring
    lines = [f"semiring {A.kind.value}", f"states {A.n}",
             "ranked" + "".join(f" {s}:{k}" for s, k in A.alphabet.items()),
             "initial" + "".join(f" {j}:{sr.format(v)}" for (_, j), v in A.alpha.items())]
    for a in A.alphabet:
        k = A.alphabet.arity(a)
        for (i, j), v in A.M[a].items():
            kids = ",".join(str(y) for y in index_tuple(j, A.n, k)) or "-"
            lines.append(f"trans {a} {i} {kids} {sr.format(v)}")
    return "\n".join(lines) + "\n"


def load_tree_automaton(path) -> WeightedTreeAutomaton:
    with open(path, encoding="utf-8") as f:
        return parse_tree_automaton(f.read())


def save_tree_automaton(A: WeightedTreeAutomaton, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_tree_automaton(A))
