"""Exact rational LP feasibility: ``c.x <= b`` for every row, ``x >= 0``.

A zero-propagation presolve runs first, then a phase-1 simplex on a
sparse tableau with Bland's rule.  Everything is
:class:`fractions.Fraction`, so a returned point satisfies every row
exactly.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .semiring import SemiringError, SemiringKind

ZERO = Fraction(0)


@dataclass
class LinearSystem:
    var_count: int
    rows: list = field(default_factory=list)  # (dict var -> Fraction, Fraction)

    def add_row(self, coefs: dict, bound) -> None:
        coefs = {j: Fraction(c) for j, c in coefs.items() if c != 0}
        for j in coefs:
            if not 0 <= j < self.var_count:
                raise ValueError(f"row references undeclared variable {j}")
        self.rows.append((coefs, Fraction(bound)))

    def nnz(self) -> int:
        return sum(len(c) for c, _ in self.rows)

    def satisfied_by(self, x) -> bool:
        if len(x) != self.var_count or any(v < 0 for v in x):
            return False
        return all(sum(c * x[j] for j, c in coefs.items()) <= b for coefs, b in self.rows)


def to_linear_system(cs) -> LinearSystem:
    """Translate a plus-times constraint system into ``c.x <= b`` rows.

    ``lhs.x + l0 <= rhs.x + r0`` becomes ``(lhs - rhs).x <= r0 - l0``.
    """
    if cs.kind is not SemiringKind.PLUS_TIMES:
        raise SemiringError("to_linear_system needs a plus-times constraint system")
    sys = LinearSystem(cs.var_count)
    for c in cs.constraints:
        coefs = dict(c.lhs)
        for j, w in c.rhs.items():
            coefs[j] = coefs.get(j, ZERO) - w
        sys.rows.append(({j: v for j, v in coefs.items() if v != 0}, c.rhs_const - c.lhs_const))
    return sys


class _Infeasible(Exception):
    pass


def presolve(sys: LinearSystem):
    """Fix variables forced to zero and drop redundant rows.

    A row whose coefficients are all non-negative and whose bound is zero
    forces each of its variables to zero.  Returns ``(rows, fixed)`` with
    the surviving rows restricted to free variables, or raises
    :class:`_Infeasible`.
    """
    rows = [dict(c) for c, _ in sys.rows]
    bounds = [b for _, b in sys.rows]
    var_rows: dict[int, set[int]] = {}
    for r, coefs in enumerate(rows):
        for j in coefs:
            var_rows.setdefault(j, set()).add(r)
    alive = [True] * len(rows)
    fixed: set[int] = set()
    queue = deque(range(len(rows)))
    queued = [True] * len(rows)
    while queue:
        r = queue.popleft()
        queued[r] = False
        if not alive[r]:
            continue
        coefs, b = rows[r], bounds[r]
        if not coefs:
            if b < 0:
                raise _Infeasible
            alive[r] = False
            continue
        if all(c > 0 for c in coefs.values()):
            if b < 0:
                raise _Infeasible
            if b == 0:
                alive[r] = False
                for j in list(coefs):
                    fixed.add(j)
                    for r2 in var_rows.pop(j, ()):
                        rows[r2].pop(j, None)
                        if alive[r2] and not queued[r2]:
                            queued[r2] = True
                            queue.append(r2)
        elif b >= 0 and all(c < 0 for c in coefs.values()):
            alive[r] = False
            for j in coefs:
                var_rows.get(j, set()).discard(r)
    kept = [(rows[r], bounds[r]) for r in range(len(rows)) if alive[r]]
    return kept, fixed


class _Tableau:
    """Sparse simplex tableau ``T z = rhs`` with one basic variable per row.

    Columns: structural ``0..v-1``, slacks ``v..v+k-1``, artificials after.
    """

    def __init__(self, rows, var_count):
        k = len(rows)
        self.var_count = var_count
        self.art0 = var_count + k
        self.tab: list[dict[int, Fraction]] = []
        self.rhs: list[Fraction] = []
        self.basis: list[int] = []
        self.art_rows: list[int] = []
        for i, (coefs, b) in enumerate(rows):
            row = dict(coefs)
            s = var_count + i
            if b >= 0:
                row[s] = Fraction(1)
                self.basis.append(s)
                self.rhs.append(Fraction(b))
            else:
                row = {j: -c for j, c in row.items()}
                row[s] = Fraction(-1)
                a = self.art0 + len(self.art_rows)
                row[a] = Fraction(1)
                self.art_rows.append(i)
                self.basis.append(a)
                self.rhs.append(-Fraction(b))
            self.tab.append(row)
        self.col_rows: dict[int, set[int]] = {}
        for i, row in enumerate(self.tab):
            for j in row:
                self.col_rows.setdefault(j, set()).add(i)
        self.pivots = 0

    def pivot(self, r, e):
        tab, rhs, col_rows = self.tab, self.rhs, self.col_rows
        prow = tab[r]
        t = prow[e]
        if t != 1:
            inv = 1 / t
            for j in prow:
                prow[j] *= inv
            rhs[r] *= inv
        pr = rhs[r]
        for i in list(col_rows[e]):
            if i == r:
                continue
            row = tab[i]
            f = row[e]
            for j, c in prow.items():
                nv = row.get(j, ZERO) - f * c
                if nv:
                    if j not in row:
                        col_rows.setdefault(j, set()).add(i)
                    row[j] = nv
                elif j in row:
                    del row[j]
                    col_rows[j].discard(i)
            if pr:
                rhs[i] -= f * pr
        self.basis[r] = e
        self.pivots += 1

    def drop_column(self, j):
        for i in self.col_rows.pop(j, ()):
            self.tab[i].pop(j, None)

    def gains(self, weights: dict[int, Fraction]):
        """Rates ``d z / d x_j`` of the objective ``sum weights[j] * x_j`` over nonbasic columns."""
        gain: dict[int, Fraction] = {}
        value = ZERO
        basic = set(self.basis)
        for j, w in weights.items():
            if j not in basic:
                gain[j] = gain.get(j, ZERO) + w
        for i, bv in enumerate(self.basis):
            w = weights.get(bv)
            if not w:
                continue
            value += w * self.rhs[i]
            for j, c in self.tab[i].items():
                if j != bv:
                    gain[j] = gain.get(j, ZERO) - w * c
        return {j: g for j, g in gain.items() if g}, value

    def improve(self, gain, value, stop=None):
        """Bland's-rule ascent on ``gain``; returns ``(value, bounded)``."""
        while stop is None or value < stop:
            entering = min((j for j, g in gain.items() if g > 0 and j < self.art0), default=None)
            if entering is None:
                return value, True
            best = None
            for i in self.col_rows.get(entering, ()):
                t = self.tab[i][entering]
                if t > 0:
                    key = (self.rhs[i] / t, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return value, False
            r = best[1]
            leaving = self.basis[r]
            self.pivot(r, entering)
            g = gain.pop(entering)
            value += g * self.rhs[r]
            for j, c in self.tab[r].items():
                if j == entering:
                    continue
                nv = gain.get(j, ZERO) - g * c
                if nv:
                    gain[j] = nv
                else:
                    gain.pop(j, None)
            if leaving >= self.art0:
                # A departed artificial never re-enters.
                self.drop_column(leaving)
                gain.pop(leaving, None)
        return value, True

    def point(self):
        x = [ZERO] * self.var_count
        for i, bv in enumerate(self.basis):
            if bv < self.var_count:
                x[bv] = self.rhs[i]
        return x

    def purge_artificials(self):
        """Drive zero-valued artificials out of the basis after phase 1."""
        for i, bv in enumerate(self.basis):
            if bv < self.art0:
                continue
            # rhs is zero here, so any non-artificial pivot keeps feasibility
            e = min((j for j, c in self.tab[i].items() if j < self.art0), default=None)
            if e is not None:
                self.pivot(i, e)
                self.drop_column(bv)
        for j in [j for j in self.col_rows if j >= self.art0 and j not in set(self.basis)]:
            self.drop_column(j)


def _simplex(rows, var_count, maximize_total=False):
    """Phase-1 simplex (plus optional total-maximizing phase 2).

    Returns the values of the structural variables or ``None``.
    """
    t = _Tableau(rows, var_count)
    if t.art_rows:
        # Phase 1: maximize minus the sum of artificials up to zero.
        arts = {bv: Fraction(-1) for bv in t.basis if bv >= t.art0}
        gain, value = t.gains(arts)
        value, _ = t.improve(gain, value, stop=ZERO)
        if value < 0:
            return None
        t.purge_artificials()
    if maximize_total:
        gain, value = t.gains({j: Fraction(1) for j in range(var_count)})
        t.improve(gain, value)
    return t.point()


def lp_feasible(sys: LinearSystem, maximize_total: bool = False):
    """A point ``x >= 0`` satisfying every row exactly, or ``None`` if infeasible.

    With ``maximize_total`` the point maximizes ``sum(x)`` when that
    maximum is finite; otherwise any feasible vertex is returned.
    """
    try:
        rows, fixed = presolve(sys)
    except _Infeasible:
        return None
    free = sorted({j for coefs, _ in rows for j in coefs})
    index = {j: k for k, j in enumerate(free)}
    local = [({index[j]: c for j, c in coefs.items()}, b) for coefs, b in rows]
    sol = _simplex(local, len(free), maximize_total)
    if sol is None:
        return None
    x = [ZERO] * sys.var_count
    for j, k in index.items():
        x[j] = sol[k]
    assert sys.satisfied_by(x), "simplex returned a point violating the system"
    return x
