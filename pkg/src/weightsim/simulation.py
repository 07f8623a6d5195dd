"""Simulation matrices between weighted word automata.

A forward simulation from ``A`` (``n`` states) to ``B`` (``m`` states) is an
``m x n`` matrix ``X`` with

    alpha_A <= alpha_B X,   X M_A(a) <= M_B(a) X,   X beta_A <= beta_B

and a backward simulation is an ``n x m`` matrix ``X`` with

    alpha_A X <= alpha_B,   M_A(a) X <= X M_B(a),   beta_A <= X beta_B.

Either one witnesses ``L(A) <= L(B)`` pointwise.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .automata import WeightedAutomaton, check_compatible, transpose_automaton
from .linalg import Matrix, MatrixError, first_violation, mat_mul, transpose
from .semiring import SemiringError, SemiringKind, semiring


class Direction(enum.Enum):
    FWD = "fwd"
    BWD = "bwd"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"direction must be 'fwd' or 'bwd', got {text!r}") from None

    def flip(self) -> "Direction":
        return Direction.BWD if self is Direction.FWD else Direction.FWD

    def __str__(self) -> str:
        return self.value


def sim_shape(A: WeightedAutomaton, B: WeightedAutomaton, direction: Direction) -> tuple[int, int]:
    return (B.n, A.n) if direction is Direction.FWD else (A.n, B.n)


@dataclass
class Constraint:
    """``sum lhs[i]*x_i + lhs_const <= sum rhs[j]*x_j + rhs_const`` over the semiring.

    Coefficient maps hold only non-zero raw values; a constant equal to the
    semiring zero means "no constant term".
    """
    tag: tuple
    lhs: dict
    lhs_const: object
    rhs: dict
    rhs_const: object

    def nnz(self) -> int:
        return len(self.lhs) + len(self.rhs)

    def evaluate(self, sr, x) -> tuple[object, object]:
        left = sr.add(self.lhs_const, sr.sum(sr.mul(c, x[i]) for i, c in self.lhs.items()))
        right = sr.add(self.rhs_const, sr.sum(sr.mul(c, x[j]) for j, c in self.rhs.items()))
        return left, right

    def holds(self, sr, x) -> bool:
        left, right = self.evaluate(sr, x)
        return sr.leq(left, right)


def format_tag(tag: tuple) -> str:
    if tag[0] == "step":
        return f"step({tag[1]},{tag[2]},{tag[3]})"
    return f"{tag[0]}({tag[1]})"


@dataclass
class ConstraintSystem:
    kind: SemiringKind
    direction: Direction
    rows: int
    cols: int
    constraints: list = field(default_factory=list)

    @property
    def var_count(self) -> int:
        return self.rows * self.cols

    def var(self, i: int, j: int) -> int:
        return i * self.cols + j

    def nnz(self) -> int:
        return sum(c.nnz() for c in self.constraints)

    def matrix_from(self, values) -> Matrix:
        return Matrix(self.kind, self.rows, self.cols,
                      {(k // self.cols, k % self.cols): v for k, v in enumerate(values)})

    def values_of(self, X: Matrix) -> list:
        if X.shape != (self.rows, self.cols):
            raise MatrixError(f"expected a {self.rows}x{self.cols} matrix, got {X.rows}x{X.cols}")
        return [X.get(k // self.cols, k % self.cols) for k in range(self.var_count)]

    def first_failure(self, values) -> Constraint | None:
        sr = semiring(self.kind)
        for c in self.constraints:
            if not c.holds(sr, values):
                return c
        return None


def assemble_constraints(A: WeightedAutomaton, B: WeightedAutomaton,
                         direction: Direction) -> ConstraintSystem:
    """One constraint per entry of each matrix inequality.

    Forward gives ``n + |Sigma| n m + m`` constraints over the ``m n``
    entries of ``X``; backward gives ``m + |Sigma| n m + n``.
    """
    check_compatible(A, B)
    kind = A.kind
    zero = semiring(kind).zero
    n, m = A.n, B.n
    out = []
    if direction is Direction.FWD:
        cs = ConstraintSystem(kind, direction, m, n, out)
        aA, aB = A.alpha.row(0), B.alpha.row(0)
        for p in range(n):
            out.append(Constraint(("initial", p), {}, aA.get(p, zero),
                                  {q * n + p: w for q, w in aB.items()}, zero))
        for a in A.alphabet:
            MA, MB = A.M[a], B.M[a]
            cols_A = {p2: MA.col(p2) for p2 in range(n)}
            for q in range(m):
                rowB = MB.row(q)
                for p2 in range(n):
                    lhs = {q * n + p: w for p, w in cols_A[p2].items()}
                    rhs = {q2 * n + p2: w for q2, w in rowB.items()}
                    out.append(Constraint(("step", a, q, p2), lhs, zero, rhs, zero))
        bA, bB = A.beta.col(0), B.beta.col(0)
        for q in range(m):
            out.append(Constraint(("final", q), {q * n + p: w for p, w in bA.items()}, zero,
                                  {}, bB.get(q, zero)))
    else:
        cs = ConstraintSystem(kind, direction, n, m, out)
        aA, aB = A.alpha.row(0), B.alpha.row(0)
        for q in range(m):
            out.append(Constraint(("initial", q), {p * m + q: w for p, w in aA.items()}, zero,
                                  {}, aB.get(q, zero)))
        for a in A.alphabet:
            MA, MB = A.M[a], B.M[a]
            cols_B = {q: MB.col(q) for q in range(m)}
            for p in range(n):
                rowA = MA.row(p)
                for q in range(m):
                    lhs = {p2 * m + q: w for p2, w in rowA.items()}
                    rhs = {p * m + q2: w for q2, w in cols_B[q].items()}
                    out.append(Constraint(("step", a, p, q), lhs, zero, rhs, zero))
        bA, bB = A.beta.col(0), B.beta.col(0)
        for p in range(n):
            out.append(Constraint(("final", p), {}, bA.get(p, zero),
                                  {p * m + q: w for q, w in bB.items()}, zero))
    return cs


@dataclass
class VerifyReport:
    ok: bool
    violation: tuple | None = None
    lhs: object = None
    rhs: object = None

    def __bool__(self) -> bool:
        return self.ok

    def describe(self, kind: SemiringKind) -> str:
        if self.ok:
            return "all constraints hold"
        sr = semiring(kind)
        return (f"violated {format_tag(self.violation)}: "
                f"{sr.format(self.lhs)} is not below {sr.format(self.rhs)}")


def _vector_products(A, B, X, direction):
    """The three pairs (left, right, tag-maker) of each matrix inequality."""
    if direction is Direction.FWD:
        yield A.alpha, mat_mul(B.alpha, X), lambda i, j: ("initial", j)
        for a in A.alphabet:
            yield (mat_mul(X, A.M[a]), mat_mul(B.M[a], X),
                   lambda i, j, a=a: ("step", a, i, j))
        yield mat_mul(X, A.beta), B.beta, lambda i, j: ("final", i)
    else:
        yield mat_mul(A.alpha, X), B.alpha, lambda i, j: ("initial", j)
        for a in A.alphabet:
            yield (mat_mul(A.M[a], X), mat_mul(X, B.M[a]),
                   lambda i, j, a=a: ("step", a, i, j))
        yield A.beta, mat_mul(X, B.beta), lambda i, j: ("final", i)


def verify_sim_matrix(A: WeightedAutomaton, B: WeightedAutomaton, direction: Direction,
                      X: Matrix) -> VerifyReport:
    """Check every simulation inequality exactly."""
    check_compatible(A, B)
    if X.kind is not A.kind:
        raise SemiringError(f"{X.kind} matrix for {A.kind} automata")
    shape = sim_shape(A, B, direction)
    if X.shape != shape:
        raise MatrixError(f"{direction} simulation must be {shape[0]}x{shape[1]}, got {X.rows}x{X.cols}")
    for left, right, tag in _vector_products(A, B, X, direction):
        bad = first_violation(left, right)
        if bad is not None:
            i, j = bad
            return VerifyReport(False, tag(i, j), left.get(i, j), right.get(i, j))
    return VerifyReport(True)


class Status(enum.Enum):
    FOUND = "Found"
    NO_SIMULATION = "NoSimulation"
    UNKNOWN = "Unknown"


@dataclass
class SearchOutcome:
    status: Status
    matrix: Matrix | None = None
    info: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND

    @classmethod
    def found_with(cls, X: Matrix, **info) -> "SearchOutcome":
        return cls(Status.FOUND, X, info)

    @classmethod
    def none(cls, **info) -> "SearchOutcome":
        return cls(Status.NO_SIMULATION, None, info)

    @classmethod
    def unknown(cls, **info) -> "SearchOutcome":
        return cls(Status.UNKNOWN, None, info)

    def __str__(self) -> str:
        return self.status.value


def _boolean_fwd_fixpoint(A: WeightedAutomaton, B: WeightedAutomaton) -> Matrix:
    """Greatest X satisfying the forward step and final constraints (Boolean)."""
    n, m = A.n, B.n
    succA = {a: {p: set(A.M[a].row(p)) for p in range(n)} for a in A.alphabet}
    succB = {a: {q: set(B.M[a].row(q)) for q in range(m)} for a in A.alphabet}
    finA = {p for (p, _), _ in A.beta.items()}
    finB = {q for (q, _), _ in B.beta.items()}
    # rel[p] = set of q with X[q, p] = 1
    rel = {p: {q for q in range(m) if p not in finA or q in finB} for p in range(n)}
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for q in list(rel[p]):
                for a in A.alphabet:
                    sb = succB[a][q]
                    if any(not (sb & rel[p2]) for p2 in succA[a][p]):
                        rel[p].discard(q)
                        changed = True
                        break
    return Matrix(A.kind, m, n, {(q, p): True for p in range(n) for q in rel[p]})


def boolean_greatest_simulation(A: WeightedAutomaton, B: WeightedAutomaton,
                                direction: Direction) -> SearchOutcome:
    """Complete search over the Boolean semiring via greatest fixpoints.

    Backward search runs the forward descent on the transposed automata.
    """
    check_compatible(A, B)
    if A.kind is not SemiringKind.BOOLEAN:
        raise SemiringError("boolean_greatest_simulation needs Boolean automata")
    if direction is Direction.BWD:
        out = boolean_greatest_simulation(transpose_automaton(A), transpose_automaton(B), Direction.FWD)
        if out.found:
            out.matrix = transpose(out.matrix)
        return out
    X = _boolean_fwd_fixpoint(A, B)
    if first_violation(A.alpha, mat_mul(B.alpha, X)) is None:
        return SearchOutcome.found_with(X, method="greatest-fixpoint")
    return SearchOutcome.none(method="greatest-fixpoint")


def _plus_times_search(A, B, direction):
    from .lp import lp_feasible, to_linear_system
    cs = assemble_constraints(A, B, direction)
    sol = lp_feasible(to_linear_system(cs), maximize_total=True)
    if sol is None:
        return SearchOutcome.none(method="lp")
    return SearchOutcome.found_with(cs.matrix_from(sol), method="lp")


def _max_plus_search(A, B, direction):
    from .maxplus import homogenize, recover_matrix, solve_two_sided
    if direction is Direction.BWD:
        out = _max_plus_search(transpose_automaton(A), transpose_automaton(B), Direction.FWD)
        if out.found:
            out.matrix = transpose(out.matrix)
        return out
    cs = assemble_constraints(A, B, Direction.FWD)
    sys = homogenize(cs)
    x = solve_two_sided(sys)
    if x is None:
        return SearchOutcome.none(method="two-sided")
    return SearchOutcome.found_with(recover_matrix(cs, sys, x), method="two-sided")


def find_simulation(A: WeightedAutomaton, B: WeightedAutomaton, direction: Direction) -> SearchOutcome:
    """Search for a simulation matrix; complete for all three semirings.

    Any returned witness has been re-verified exactly.
    """
    check_compatible(A, B)
    if A.kind is SemiringKind.PLUS_TIMES:
        out = _plus_times_search(A, B, direction)
    elif A.kind is SemiringKind.MAX_PLUS:
        out = _max_plus_search(A, B, direction)
    else:
        out = boolean_greatest_simulation(A, B, direction)
    if out.found:
        report = verify_sim_matrix(A, B, direction, out.matrix)
        if not report:
            # Never claim inclusion on an unverified witness.
            return SearchOutcome.unknown(method=out.info.get("method"),
                                         error="witness failed verification: " + report.describe(A.kind))
    return out
