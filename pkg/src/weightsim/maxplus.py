"""Max-plus simulation search and the mean-payoff game oracle.

Forward simulation constraints become a homogeneous two-sided system
``L (x) x <= R (x) x`` by scaling their constant terms with an extra
variable ``x**``.  The solver descends from the all-zero cap by
residuation until it reaches the greatest solution below zero; a finite
``x**`` then yields a simulation ``X = X' - x**``.

The game-based decision procedure builds a bipartite mean-payoff game in
which Max wins exactly when a forward simulation exists (for trap-free
left operands) and solves it by value iteration.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .automata import WeightedAutomaton, check_compatible
from .linalg import Matrix
from .semiring import NEG_INF, SemiringError, SemiringKind

MP = SemiringKind.MAX_PLUS
# Integer stand-in for -inf.  Sums of two of these still fit in int64.
NEG = -(1 << 60)


@dataclass
class TwoSidedSystem:
    """``L (x) x <= R (x) x`` over max-plus, with ``x[star_index]`` the scale variable."""
    L: Matrix
    R: Matrix
    star_index: int
    tags: list = field(default_factory=list)

    @property
    def var_count(self) -> int:
        return self.L.cols

    def satisfied_by(self, x) -> bool:
        sr = self.L.semiring
        for i in range(self.L.rows):
            left = sr.sum(sr.mul(c, x[j]) for j, c in self.L.row(i).items())
            right = sr.sum(sr.mul(c, x[j]) for j, c in self.R.row(i).items())
            if not sr.leq(left, right):
                return False
        return True


def homogenize(cs) -> TwoSidedSystem:
    """Scale every constant term by a fresh variable placed last."""
    if cs.kind is not MP:
        raise SemiringError("homogenize needs a max-plus constraint system")
    v = cs.var_count + 1
    star = cs.var_count
    left, right, tags = {}, {}, []
    for i, c in enumerate(cs.constraints):
        for j, w in c.lhs.items():
            left[(i, j)] = w
        if c.lhs_const is not NEG_INF:
            left[(i, star)] = c.lhs_const
        for j, w in c.rhs.items():
            right[(i, j)] = w
        if c.rhs_const is not NEG_INF:
            right[(i, star)] = c.rhs_const
        tags.append(c.tag)
    k = len(cs.constraints)
    return TwoSidedSystem(Matrix(MP, k, v, left), Matrix(MP, k, v, right), star, tags)


def recover_matrix(cs, sys: TwoSidedSystem, x) -> Matrix:
    """``X = X' - x**`` for a solution with finite ``x**``."""
    s = x[sys.star_index]
    if s is NEG_INF:
        raise ValueError("scale variable is -inf")
    vals = [NEG_INF if xi is NEG_INF else xi - s for xi in x[:cs.var_count]]
    return cs.matrix_from(vals)


def residuate(A: Matrix, y, cap=None):
    """Greatest ``x`` with ``A (x) x <= y``.

    ``x_j = min_i (y_i - A_ij)`` over rows with finite ``A_ij``; a column
    with no finite entry is bounded only by ``cap`` (``None`` means
    unbounded and is returned as ``None``).
    """
    out = []
    for j in range(A.cols):
        best = cap
        for i, a in A.col(j).items():
            yi = y[i]
            val = NEG_INF if yi is NEG_INF else yi - a
            if best is None or val is NEG_INF or (best is not NEG_INF and val < best):
                best = val
        out.append(best)
    return out


def maxplus_apply(A: Matrix, x):
    """``A (x) x`` for a list ``x`` of weights."""
    sr = A.semiring
    return [sr.sum(sr.mul(c, x[j]) for j, c in A.row(i).items()) for i in range(A.rows)]


def _scale_factor(values) -> int:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def _to_int_array(m: Matrix, scale: int) -> np.ndarray:
    out = np.full((m.rows, m.cols), NEG, dtype=np.int64)
    for (i, j), v in m.items():
        out[i, j] = int(v * scale)
    return out


def divergence_bound(sys: TwoSidedSystem) -> tuple[int, int]:
    """``(scale, D)``: the denominator-clearing factor and the integer descent bound."""
    vals = [v for _, v in sys.L.items()] + [v for _, v in sys.R.items()]
    scale = _scale_factor(vals)
    W = max([abs(int(v * scale)) for v in vals], default=0)
    return scale, (sys.var_count + 1) * (2 * W + 1)


def descend(L: np.ndarray, R: np.ndarray, D: int, x0: np.ndarray | None = None,
            trace: list | None = None) -> np.ndarray:
    """Greatest integer solution below ``x0`` (default zero) of ``L x <= R x``.

    Components that fall below ``-D`` are set to ``NEG``.  When ``trace`` is
    a list every iterate is appended to it.
    """
    k, v = L.shape
    x = np.zeros(v, dtype=np.int64) if x0 is None else x0.copy()
    # Rows with an all -inf left side never bind.
    live = (L > NEG // 2).any(axis=1)
    L, R = L[live], R[live]
    if L.shape[0] == 0:
        return x
    Lfin = L > NEG // 2
    while True:
        if trace is not None:
            trace.append(x.copy())
        rx = (R + x[None, :]).max(axis=1)
        rx[rx < NEG // 2] = NEG
        # bound[i, j] = rx_i - L_ij where L_ij is finite
        bound = np.where(Lfin, rx[:, None] - L, np.iinfo(np.int64).max)
        bound[(rx[:, None] <= NEG // 2) & Lfin] = NEG
        new = np.minimum(x, bound.min(axis=0))
        new[new < -D] = NEG
        if np.array_equal(new, x):
            return x
        x = new


def solve_two_sided(sys: TwoSidedSystem):
    """A solution with finite scale variable, or ``None``.

    The result is a list of Fractions / ``NEG_INF`` and satisfies the system
    exactly.
    """
    scale, D = divergence_bound(sys)
    L = _to_int_array(sys.L, scale)
    R = _to_int_array(sys.R, scale)
    x = descend(L, R, D)
    if x[sys.star_index] <= NEG // 2:
        return None
    sol = [NEG_INF if xi <= NEG // 2 else Fraction(int(xi), scale) for xi in x]
    assert sys.satisfied_by(sol), "descent returned a non-solution"
    return sol


class Owner(enum.Enum):
    MIN = "min"
    MAX = "max"


class Winner(enum.Enum):
    MAX_WINS = "MaxWins"
    MIN_WINS = "MinWins"

    def __str__(self) -> str:
        return self.value


@dataclass
class MeanPayoffGame:
    """A bipartite weighted game graph; Max wants a non-negative mean payoff."""
    names: list
    owner: list
    initial: int
    edges: list = field(default_factory=list)  # (src, dst, Fraction)

    @property
    def min_vertices(self) -> list[int]:
        return [i for i, o in enumerate(self.owner) if o is Owner.MIN]

    @property
    def max_vertices(self) -> list[int]:
        return [i for i, o in enumerate(self.owner) if o is Owner.MAX]

    def add_vertex(self, name, owner: Owner) -> int:
        self.names.append(name)
        self.owner.append(owner)
        return len(self.names) - 1

    def add_edge(self, src: int, dst: int, weight) -> None:
        if self.owner[src] is self.owner[dst]:
            raise ValueError("game edges must alternate between Min and Max")
        self.edges.append((src, dst, Fraction(weight)))

    def dump(self) -> str:
        return "".join(f"{self.names[s]} {self.names[d]} {_fmt(w)}\n" for s, d, w in self.edges)


def _fmt(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def build_sim_game(A: WeightedAutomaton, B: WeightedAutomaton) -> MeanPayoffGame:
    """Game whose Max player wins iff a forward simulation from A to B exists.

    Min vertices are ``**`` and ``x[q,p]``; Max vertices are the states of
    A, the triples ``(a,q,p)`` and the states of B.  Min picks a step of
    A and pays its weight, Max answers with a step of B and gains its
    weight.
    """
    check_compatible(A, B)
    if A.kind is not MP:
        raise SemiringError("build_sim_game needs max-plus automata")
    n, m = A.n, B.n
    g = MeanPayoffGame([], [], 0)
    star = g.add_vertex("**", Owner.MIN)
    xv = {(q, p): g.add_vertex(f"x[{q},{p}]", Owner.MIN) for q in range(m) for p in range(n)}
    pa = {p: g.add_vertex(f"A{p}", Owner.MAX) for p in range(n)}
    trip = {(a, q, p): g.add_vertex(f"({a},{q},{p})", Owner.MAX)
            for a in A.alphabet for q in range(m) for p in range(n)}
    qb = {q: g.add_vertex(f"B{q}", Owner.MAX) for q in range(m)}
    g.initial = star
    for (_, p), w in A.alpha.items():
        g.add_edge(star, pa[p], -w)
    for q in range(m):
        for p in range(n):
            for a in A.alphabet:
                for p2, w in A.M[a].row(p).items():
                    g.add_edge(xv[(q, p)], trip[(a, q, p2)], -w)
            wb = A.beta.get(p, 0)
            if wb is not NEG_INF:
                g.add_edge(xv[(q, p)], qb[q], -wb)
    for p in range(n):
        for (_, q), w in B.alpha.items():
            g.add_edge(pa[p], xv[(q, p)], w)
    for a in A.alphabet:
        for q in range(m):
            for q2, w in B.M[a].row(q).items():
                for p in range(n):
                    g.add_edge(trip[(a, q, p)], xv[(q2, p)], w)
    for (q, _), w in B.beta.items():
        g.add_edge(qb[q], star, w)
    return g


def _attractor(nv, owner, succ, pred, target, player: Owner, region) -> set[int]:
    """Vertices of ``region`` from which ``player`` forces a visit to ``target``."""
    attr = set(target)
    count = {u: sum(1 for w in succ[u] if w in region) for u in region}
    stack = list(target)
    while stack:
        w = stack.pop()
        for u in pred[w]:
            if u not in region or u in attr:
                continue
            if owner[u] is player:
                attr.add(u)
                stack.append(u)
            else:
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    stack.append(u)
    return attr


def mpg_winner(g: MeanPayoffGame, max_steps: int | None = None) -> Winner:
    """Decide who wins from the initial vertex.

    A player who cannot move loses.  Dead ends are handled by attractors;
    the rest is solved by value iteration with the standard
    ``|v_k - k nu| <= 2 n W`` bounds used to stop as soon as the sign of
    the mean value ``nu`` is certain.
    """
    nv = len(g.names)
    succ = [[] for _ in range(nv)]
    pred = [[] for _ in range(nv)]
    for s, d, _ in g.edges:
        succ[s].append(d)
        pred[d].append(s)
    everything = set(range(nv))
    stuck_min = {u for u in everything if g.owner[u] is Owner.MIN and not succ[u]}
    w_max = _attractor(nv, g.owner, succ, pred, stuck_min, Owner.MAX, everything)
    if g.initial in w_max:
        return Winner.MAX_WINS
    rest = everything - w_max
    stuck_max = {u for u in rest if g.owner[u] is Owner.MAX and not any(w in rest for w in succ[u])}
    w_min = _attractor(nv, g.owner, succ, pred, stuck_max, Owner.MIN, rest)
    if g.initial in w_min:
        return Winner.MIN_WINS
    region = sorted(rest - w_min)
    index = {u: i for i, u in enumerate(region)}
    edges = [(index[s], index[d], w) for s, d, w in g.edges if s in index and d in index]
    n = len(region)
    scale = _scale_factor([w for _, _, w in edges])
    W = max([abs(int(w * scale)) for _, _, w in edges], default=0)
    W = max(W, 1)
    edges.sort(key=lambda e: (e[0], e[1]))
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    wt = np.array([int(e[2] * scale) for e in edges], dtype=np.int64)
    starts = np.flatnonzero(np.r_[True, src[1:] != src[:-1]])
    heads = src[starts]
    is_max = np.array([g.owner[region[h]] is Owner.MAX for h in heads])
    K = max_steps if max_steps is not None else 4 * nv ** 3 * W
    v = np.zeros(n, dtype=np.int64)
    q0 = index[g.initial]
    lo = -2 * n * W
    for k in range(1, K + 1):
        cand = wt + v[dst]
        vmax = np.maximum.reduceat(cand, starts)
        vmin = np.minimum.reduceat(cand, starts)
        v = np.empty(n, dtype=np.int64)
        v[heads] = np.where(is_max, vmax, vmin)
        val = int(v[q0])
        if val < lo:
            return Winner.MIN_WINS
        if n * val > -k + 2 * n * n * W:
            return Winner.MAX_WINS
    mean = Fraction(int(v[q0]), K).limit_denominator(n)
    return Winner.MAX_WINS if mean >= 0 else Winner.MIN_WINS
