"""Sparse semiring matrices.

A :class:`Matrix` stores only its non-zero entries, row by row.  Vectors are
1 x n or n x 1 matrices.  Entries are raw semiring values (see
:mod:`weightsim.semiring`); :meth:`Matrix.weight` wraps one as a
:class:`~weightsim.semiring.Weight`.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Sequence

from .semiring import SemiringError, SemiringKind, Weight, semiring


class MatrixError(ValueError):
    """Dimension or kind mismatch, or a malformed matrix file."""


class Matrix:
    __slots__ = ("kind", "rows", "cols", "_data", "_hash")

    def __init__(self, kind: SemiringKind, rows: int, cols: int,
                 entries: Mapping[tuple[int, int], object] | Iterable[tuple[tuple[int, int], object]] = ()):
        if rows < 0 or cols < 0:
            raise MatrixError(f"negative dimension {rows}x{cols}")
        sr = semiring(kind)
        data: dict[int, dict[int, object]] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (i, j), v in items:
            if not (0 <= i < rows and 0 <= j < cols):
                raise MatrixError(f"entry ({i}, {j}) outside {rows}x{cols}")
            if isinstance(v, Weight):
                if v.kind is not kind:
                    raise SemiringError(f"{v.kind} entry in a {kind} matrix")
                v = v.value
            else:
                v = sr.coerce(v)
            if sr.is_zero(v):
                continue
            data.setdefault(i, {})[j] = v
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_data", data)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, kind, rows, cols, data) -> "Matrix":
        # Trusted constructor: `data` holds only non-zero raw values.
        m = object.__new__(cls)
        object.__setattr__(m, "kind", kind)
        object.__setattr__(m, "rows", rows)
        object.__setattr__(m, "cols", cols)
        object.__setattr__(m, "_data", {i: r for i, r in data.items() if r})
        object.__setattr__(m, "_hash", None)
        return m

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # construction helpers

    @classmethod
    def zeros(cls, kind: SemiringKind, rows: int, cols: int) -> "Matrix":
        return cls._raw(kind, rows, cols, {})

    @classmethod
    def identity(cls, kind: SemiringKind, n: int) -> "Matrix":
        one = semiring(kind).one
        return cls._raw(kind, n, n, {i: {i: one} for i in range(n)})

    @classmethod
    def from_dense(cls, kind: SemiringKind, rows: Sequence[Sequence[object]]) -> "Matrix":
        rows = [list(r) for r in rows]
        if not rows:
            raise MatrixError("empty dense matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise MatrixError("ragged dense matrix")
        return cls(kind, len(rows), width,
                   (((i, j), v) for i, r in enumerate(rows) for j, v in enumerate(r)))

    @classmethod
    def row_vector(cls, kind: SemiringKind, values: Sequence[object]) -> "Matrix":
        return cls.from_dense(kind, [values])

    @classmethod
    def col_vector(cls, kind: SemiringKind, values: Sequence[object]) -> "Matrix":
        return cls(kind, len(values), 1, (((i, 0), v) for i, v in enumerate(values)))

    # access

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def semiring(self):
        return semiring(self.kind)

    def get(self, i: int, j: int):
        row = self._data.get(i)
        if row is None:
            return semiring(self.kind).zero
        return row.get(j, semiring(self.kind).zero)

    def __getitem__(self, ij: tuple[int, int]):
        return self.get(*ij)

    def weight(self, i: int, j: int) -> Weight:
        return Weight(self.kind, self.get(i, j))

    def row(self, i: int) -> Mapping[int, object]:
        """Non-zero entries of row ``i`` as ``{col: value}`` (read-only view)."""
        return self._data.get(i, {})

    def col(self, j: int) -> dict[int, object]:
        return {i: r[j] for i, r in self._data.items() if j in r}

    def items(self) -> Iterator[tuple[tuple[int, int], object]]:
        for i in sorted(self._data):
            r = self._data[i]
            for j in sorted(r):
                yield (i, j), r[j]

    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def nonzero_rows(self) -> list[int]:
        return sorted(self._data)

    def to_dense(self) -> list[list[object]]:
        z = semiring(self.kind).zero
        out = [[z] * self.cols for _ in range(self.rows)]
        for i, r in self._data.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    def vector_values(self) -> list[object]:
        """Entries of a row or column vector as a flat list."""
        if self.rows == 1:
            return self.to_dense()[0]
        if self.cols == 1:
            return [r[0] for r in self.to_dense()]
        raise MatrixError(f"{self.rows}x{self.cols} matrix is not a vector")

    # comparison

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix) and self.kind is other.kind
                and self.shape == other.shape and self._data == other._data)

    def __hash__(self) -> int:
        if self._hash is None:
            h = hash((self.kind, self.rows, self.cols, tuple(self.items())))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self) -> str:
        return f"Matrix({self.kind.value}, {self.rows}x{self.cols}, {self.to_dense()!r})"

    def __str__(self) -> str:
        return format_matrix(self)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __le__(self, other: "Matrix") -> bool:
        return mat_leq(self, other)

    @property
    def T(self) -> "Matrix":
        return transpose(self)


def _same_kind(*ms: Matrix) -> SemiringKind:
    kind = ms[0].kind
    for m in ms[1:]:
        if m.kind is not kind:
            raise SemiringError(f"cannot combine {kind} and {m.kind} matrices")
    return kind


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    kind = _same_kind(a, b)
    if a.cols != b.rows:
        raise MatrixError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    sr = semiring(kind)
    add, mul = sr.add, sr.mul
    bdata = b._data
    out: dict[int, dict[int, object]] = {}
    for i, arow in a._data.items():
        acc: dict[int, object] = {}
        for j, av in arow.items():
            brow = bdata.get(j)
            if not brow:
                continue
            for k, bv in brow.items():
                p = mul(av, bv)
                if k in acc:
                    acc[k] = add(acc[k], p)
                else:
                    acc[k] = p
        if acc:
            out[i] = acc
    # Non-zero products of non-zero entries stay non-zero in all three kinds.
    return Matrix._raw(kind, a.rows, b.cols, out)


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    """Entrywise semiring sum."""
    kind = _same_kind(a, b)
    if a.shape != b.shape:
        raise MatrixError(f"shape mismatch {a.shape} vs {b.shape}")
    add = semiring(kind).add
    out = {i: dict(r) for i, r in a._data.items()}
    for i, r in b._data.items():
        dst = out.setdefault(i, {})
        for j, v in r.items():
            dst[j] = add(dst[j], v) if j in dst else v
    return Matrix._raw(kind, a.rows, a.cols, out)


def mat_leq(a: Matrix, b: Matrix) -> bool:
    return first_violation(a, b) is None


def first_violation(a: Matrix, b: Matrix) -> tuple[int, int] | None:
    """The first (row-major) index where ``a`` is not below ``b``, if any."""
    kind = _same_kind(a, b)
    if a.shape != b.shape:
        raise MatrixError(f"shape mismatch {a.shape} vs {b.shape}")
    sr = semiring(kind)
    zero = sr.zero
    for (i, j), v in a.items():
        if not sr.leq(v, b._data.get(i, {}).get(j, zero)):
            return (i, j)
    return None


def transpose(a: Matrix) -> Matrix:
    out: dict[int, dict[int, object]] = {}
    for i, r in a._data.items():
        for j, v in r.items():
            out.setdefault(j, {})[i] = v
    return Matrix._raw(a.kind, a.cols, a.rows, out)


def kron(a: Matrix, b: Matrix) -> Matrix:
    kind = _same_kind(a, b)
    mul = semiring(kind).mul
    out: dict[int, dict[int, object]] = {}
    for i, arow in a._data.items():
        for k, brow in b._data.items():
            dst = {}
            for j, av in arow.items():
                base = j * b.cols
                for l, bv in brow.items():
                    dst[base + l] = mul(av, bv)
            out[i * b.rows + k] = dst
    return Matrix._raw(kind, a.rows * b.rows, a.cols * b.cols, out)


def kron_power(a: Matrix, n: int) -> Matrix:
    if n < 0:
        raise MatrixError("negative Kronecker power")
    out = Matrix.identity(a.kind, 1)
    for _ in range(n):
        out = kron(out, a)
    return out


def kron_all(ms: Sequence[Matrix], kind: SemiringKind | None = None) -> Matrix:
    if not ms:
        if kind is None:
            raise MatrixError("empty Kronecker product needs a kind")
        return Matrix.identity(kind, 1)
    out = ms[0]
    for m in ms[1:]:
        out = kron(out, m)
    return out


def direct_sum(ms: Sequence[Matrix]) -> Matrix:
    if not ms:
        raise MatrixError("direct sum of no matrices")
    kind = _same_kind(*ms)
    out: dict[int, dict[int, object]] = {}
    r0 = c0 = 0
    for m in ms:
        for i, r in m._data.items():
            out[r0 + i] = {c0 + j: v for j, v in r.items()}
        r0 += m.rows
        c0 += m.cols
    return Matrix._raw(kind, r0, c0, out)


# Text format: "rows cols" then one line of weight tokens per row.

def format_matrix(m: Matrix) -> str:
    sr = semiring(m.kind)
    lines = [f"{m.rows} {m.cols}"]
    for r in m.to_dense():
        lines.append(" ".join(sr.format(v) for v in r))
    return "\n".join(lines) + "\n"


def parse_matrix(kind: SemiringKind, text: str) -> Matrix:
    sr = semiring(kind)
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise MatrixError("empty matrix file")
    lineno, header = lines[0]
    try:
        rows, cols = (int(t) for t in header.split())
    except ValueError:
        raise MatrixError(f"line {lineno}: expected 'rows cols', got {header!r}") from None
    body = lines[1:]
    if len(body) != rows:
        raise MatrixError(f"expected {rows} rows, found {len(body)}")
    entries = {}
    for i, (lineno, line) in enumerate(body):
        toks = line.split()
        if len(toks) != cols:
            raise MatrixError(f"line {lineno}: expected {cols} entries, found {len(toks)}")
        for j, t in enumerate(toks):
            try:
                v = sr.parse(t)
            except SemiringError as e:
                raise MatrixError(f"line {lineno}: {e}") from None
            entries[(i, j)] = v
    return Matrix(kind, rows, cols, entries)


def load_matrix(kind: SemiringKind, path) -> Matrix:
    with open(path, encoding="utf-8") as f:
        return parse_matrix(kind, f.read())


def save_matrix(m: Matrix, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_matrix(m))
