"""Exact scalars and exact matrices.

Two scalar modes are supported: the rationals (``QQ``), where scalars are
Python ``int`` or ``fractions.Fraction`` values, and a prime field ``GF(p)``,
where scalars are ints reduced into ``[0, p)``.  A :class:`Matrix` records
its field, and every binary operation refuses to mix fields.

Matrices are immutable and behave as dense grids; only nonzero entries are
stored, because almost every map built by the trace calculus is a
permutation, a unit or a counit.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class ScalarModeError(ValueError):
    """Raised when values from different scalar modes are combined."""


class ShapeError(ValueError):
    """Raised on incompatible matrix shapes."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class Field:
    """A scalar mode.  Use the module constant ``QQ`` or ``GF(p)``."""

    __slots__ = ("modulus",)

    def __init__(self, modulus: int = 0):
        if modulus and not _is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        self.modulus = modulus

    def __eq__(self, other):
        return isinstance(other, Field) and other.modulus == self.modulus

    def __hash__(self):
        return hash(("Field", self.modulus))

    def __repr__(self):
        return "QQ" if not self.modulus else f"GF({self.modulus})"

    @property
    def is_prime(self) -> bool:
        return bool(self.modulus)

    def __call__(self, x):
        """Coerce an int, Fraction or numeric string into this field."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.modulus:
            if isinstance(x, Fraction):
                if x.denominator % self.modulus == 0:
                    raise ZeroDivisionError(f"{x} has no image in {self!r}")
                return x.numerator * pow(x.denominator, -1, self.modulus) % self.modulus
            return int(x) % self.modulus
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else x
        if isinstance(x, int):
            return x
        raise TypeError(f"cannot coerce {type(x).__name__} into {self!r}")

    def reduce(self, x):
        if self.modulus:
            return x % self.modulus
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        return x

    def inv(self, x):
        if self.modulus:
            return pow(x, -1, self.modulus)
        return self.reduce(Fraction(1) / x)

    def neg(self, x):
        return self.reduce(-x)

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1


QQ = Field(0)

_GF_CACHE: dict[int, Field] = {}


def GF(p: int) -> Field:
    if p not in _GF_CACHE:
        _GF_CACHE[p] = Field(p)
    return _GF_CACHE[p]


def _check_same(a: Field, b: Field):
    if a != b:
        raise ScalarModeError(f"scalar mode mismatch: {a!r} vs {b!r}")


class Matrix:
    """Immutable exact matrix.

    ``rows`` and ``cols`` may be zero.  Internally a dict of row index to
    ``{col: value}`` holding nonzero entries only.
    """

    __slots__ = ("rows", "cols", "field", "_data", "_hash")

    def __init__(self, rows: int, cols: int, data=None, field: Field = QQ, *, _trusted=False):
        if rows < 0 or cols < 0:
            raise ShapeError("negative matrix dimension")
        self.rows = rows
        self.cols = cols
        self.field = field
        self._hash = None
        if _trusted:
            self._data = data
            return
        clean: dict[int, dict[int, object]] = {}
        if data:
            for i, row in data.items():
                if not 0 <= i < rows:
                    raise ShapeError(f"row {i} out of range for {rows} rows")
                r = {}
                for j, v in row.items():
                    if not 0 <= j < cols:
                        raise ShapeError(f"column {j} out of range for {cols} columns")
                    v = field(v)
                    if v:
                        r[j] = v
                if r:
                    clean[i] = r
        self._data = clean

    # construction -----------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], field: Field = QQ, ncols: int | None = None) -> "Matrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else (ncols or 0)
        if ncols is not None and nr and ncols != nc:
            raise ShapeError("ncols disagrees with row length")
        data = {}
        for i, row in enumerate(rows):
            if len(row) != nc:
                raise ShapeError("ragged rows")
            data[i] = {j: v for j, v in enumerate(row) if v}
        return cls(nr, nc, data, field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: Field = QQ) -> "Matrix":
        return cls(rows, cols, {}, field, _trusted=True)

    @classmethod
    def identity(cls, n: int, field: Field = QQ) -> "Matrix":
        return cls(n, n, {i: {i: 1} for i in range(n)}, field, _trusted=True)

    @classmethod
    def from_sparse(cls, rows: int, cols: int, entries: dict, field: Field = QQ) -> "Matrix":
        """Build from ``{(i, j): value}``; zero values are dropped."""
        data: dict[int, dict[int, object]] = {}
        for (i, j), v in entries.items():
            v = field.reduce(v)
            if v:
                data.setdefault(i, {})[j] = v
        for i, row in data.items():
            if not 0 <= i < rows or any(not 0 <= j < cols for j in row):
                raise ShapeError("sparse entry out of range")
        return cls(rows, cols, data, field, _trusted=True)

    # access -----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self._data.get(i, {}).get(j, 0)

    def nonzero(self):
        """Iterate ``(i, j, value)`` over nonzero entries in row-major order."""
        for i in sorted(self._data):
            row = self._data[i]
            for j in sorted(row):
                yield i, j, row[j]

    def column(self, j: int) -> dict[int, object]:
        return {i: row[j] for i, row in self._data.items() if j in row}

    def to_lists(self) -> list[list]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, row in self._data.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def transpose(self) -> "Matrix":
        data: dict[int, dict[int, object]] = {}
        for i, row in self._data.items():
            for j, v in row.items():
                data.setdefault(j, {})[i] = v
        return Matrix(self.cols, self.rows, data, self.field, _trusted=True)

    T = property(transpose)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        if len(self._data) != self.rows:
            return False
        return all(row == {i: 1} for i, row in self._data.items())

    def is_zero(self) -> bool:
        return not self._data

    # arithmetic -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.field == other.field
            and self._data == other._data
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self.field, tuple(self.nonzero())))
        return self._hash

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same(self.field, other.field)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        red = self.field.reduce
        data = {i: dict(row) for i, row in self._data.items()}
        for i, row in other._data.items():
            tgt = data.setdefault(i, {})
            for j, v in row.items():
                s = red(tgt.get(j, 0) + v)
                if s:
                    tgt[j] = s
                else:
                    tgt.pop(j, None)
            if not tgt:
                del data[i]
        return Matrix(self.rows, self.cols, data, self.field, _trusted=True)

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        if not c:
            return Matrix.zeros(self.rows, self.cols, self.field)
        red = self.field.reduce
        data = {i: {j: red(c * v) for j, v in row.items()} for i, row in self._data.items()}
        return Matrix(self.rows, self.cols, data, self.field, _trusted=True)

    def __repr__(self):
        if self.rows * self.cols <= 36:
            return f"Matrix({self.to_lists()!r}, {self.field!r})"
        return f"<Matrix {self.rows}x{self.cols} nnz={sum(map(len, self._data.values()))} {self.field!r}>"

    def pretty(self) -> str:
        cells = [[str(v) for v in row] for row in self.to_lists()]
        if not cells:
            return f"[{self.rows}x{self.cols} empty]"
        w = max((len(c) for row in cells for c in row), default=1)
        return "\n".join("[" + " ".join(c.rjust(w) for c in row) + "]" for row in cells)


def identity(n: int, field: Field = QQ) -> Matrix:
    return Matrix.identity(n, field)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product ``a @ b``."""
    _check_same(a.field, b.field)
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    red = a.field.reduce
    bd = b._data
    data: dict[int, dict[int, object]] = {}
    for i, arow in a._data.items():
        acc: dict[int, object] = {}
        for k, av in arow.items():
            brow = bd.get(k)
            if not brow:
                continue
            for j, bv in brow.items():
                acc[j] = acc.get(j, 0) + av * bv
        row = {}
        for j, v in acc.items():
            v = red(v)
            if v:
                row[j] = v
        if row:
            data[i] = row
    return Matrix(a.rows, b.cols, data, a.field, _trusted=True)


def mat_mul_chain(mats: Iterable[Matrix]) -> Matrix:
    """Product ``m0 @ m1 @ ... @ mk`` evaluated right to left."""
    mats = list(mats)
    if not mats:
        raise ValueError("empty product")
    out = mats[-1]
    for m in reversed(mats[:-1]):
        out = mat_mul(m, out)
    return out


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; row ``(i, k)`` sits at ``i * b.rows + k``."""
    _check_same(a.field, b.field)
    red = a.field.reduce
    br, bc = b.rows, b.cols
    data: dict[int, dict[int, object]] = {}
    for i, arow in a._data.items():
        for k, brow in b._data.items():
            row = {}
            for j, av in arow.items():
                base = j * bc
                for l, bv in brow.items():
                    row[base + l] = red(av * bv)
            data[i * br + k] = row
    return Matrix(a.rows * br, a.cols * bc, data, a.field, _trusted=True)


def direct_sum(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a.field, b.field)
    data = {i: dict(row) for i, row in a._data.items()}
    for i, row in b._data.items():
        data[a.rows + i] = {a.cols + j: v for j, v in row.items()}
    return Matrix(a.rows + b.rows, a.cols + b.cols, data, a.field, _trusted=True)


def direct_sum_all(mats: Sequence[Matrix], field: Field = QQ) -> Matrix:
    out = Matrix.zeros(0, 0, mats[0].field if mats else field)
    for m in mats:
        out = direct_sum(out, m)
    return out


def mat_trace(a: Matrix):
    if a.rows != a.cols:
        raise ShapeError(f"trace of non-square {a.shape} matrix")
    red = a.field.reduce
    return red(sum((row.get(i, 0) for i, row in a._data.items()), 0))


def permutation_matrix(perm: Sequence[int], field: Field = QQ) -> Matrix:
    """Matrix sending basis vector ``e_i`` to ``e_{perm[i]}``."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation of range({n})")
    return Matrix(n, n, {perm[i]: {i: 1} for i in range(n)}, field, _trusted=True)
