"""Finitely describable countable vectors and matrices.

An :class:`FDVector` is a default value plus finitely many exceptions.  An
:class:`FDMatrix` is a finite sum of outer products of such vectors, so
``A[i, j] = sum_k u_k(i) * v_k(j)``.  This family contains every
finite-support matrix together with the scalar, row and column lifts, and it
is closed under addition, scaling and the Hadamard product.

Every matrix is piecewise constant on a finite grid of index classes: one
class per row key that appears as an exception in some ``u_k`` plus one
"default" class holding all remaining rows (likewise for columns).  The
sentinel :data:`DEFAULT` stands for a representative of the default class,
which makes semantic equality, mask checks and support checks finite.

Row keys index neuron inputs and column keys index neuron outputs.  Any
hashable works as a key (index strings in countable mode, integers in tests).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np


class _DefaultKey:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DEFAULT"


DEFAULT = _DefaultKey()


class FDMatrixError(ValueError):
    pass


class NotAMask(FDMatrixError):
    pass


class InfiniteSupport(FDMatrixError):
    pass


class NotLifted(FDMatrixError):
    pass


@dataclass(frozen=True)
class FDVector:
    default: float = 0.0
    exceptions: Mapping[Hashable, float] = field(default_factory=dict)

    def __post_init__(self):
        d = float(self.default)
        exc = {k: float(v) for k, v in self.exceptions.items() if float(v) != d}
        object.__setattr__(self, "default", d)
        object.__setattr__(self, "exceptions", exc)

    @classmethod
    def constant(cls, x: float) -> FDVector:
        return cls(x)

    @classmethod
    def unit(cls, key: Hashable, value: float = 1.0) -> FDVector:
        return cls(0.0, {key: value})

    @classmethod
    def indicator(cls, keys: Iterable[Hashable]) -> FDVector:
        return cls(0.0, {k: 1.0 for k in keys})

    def __call__(self, key: Hashable) -> float:
        return self.exceptions.get(key, self.default)

    @property
    def keys(self) -> list:
        return list(self.exceptions)

    @property
    def has_finite_support(self) -> bool:
        return self.default == 0.0

    @property
    def is_zero(self) -> bool:
        return self.default == 0.0 and not self.exceptions

    def _combine(self, other: FDVector, op: Callable[[float, float], float]) -> FDVector:
        keys = dict.fromkeys([*self.exceptions, *other.exceptions])
        return FDVector(
            op(self.default, other.default), {k: op(self(k), other(k)) for k in keys}
        )

    def __mul__(self, other: FDVector) -> FDVector:
        return self._combine(other, lambda a, b: a * b)

    def __add__(self, other: FDVector) -> FDVector:
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: FDVector) -> FDVector:
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c: float) -> FDVector:
        return FDVector(c * self.default, {k: c * v for k, v in self.exceptions.items()})

    def dot(self, other: FDVector) -> float | None:
        """Full inner product, or ``None`` when it has infinitely many nonzero addends."""
        if self.default != 0.0 and other.default != 0.0:
            return None
        a, b = (self, other) if self.default == 0.0 else (other, self)
        return math.fsum(x * b(k) for k, x in a.exceptions.items())

    def is_mask(self) -> bool:
        return self.default in (0.0, 1.0) and all(v in (0.0, 1.0) for v in self.exceptions.values())

    def to_literal(self) -> dict:
        return {"default": self.default, "except": dict(self.exceptions)}

    @classmethod
    def from_literal(cls, lit: Mapping) -> FDVector:
        return cls(lit.get("default", 0.0), lit.get("except", {}))


ZERO_VECTOR = FDVector()
ONES = FDVector(1.0)


@dataclass(frozen=True)
class FDMatrix:
    terms: tuple[tuple[FDVector, FDVector], ...] = ()

    # make numpy scalars defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, i: Hashable, j: Hashable) -> float:
        return fd_value(self, i, j)

    def __add__(self, other: FDMatrix) -> FDMatrix:
        return fd_add(self, other)

    def __sub__(self, other: FDMatrix) -> FDMatrix:
        return fd_add(self, fd_scale(-1.0, other))

    def __neg__(self) -> FDMatrix:
        return fd_scale(-1.0, self)

    def __rmul__(self, c: float) -> FDMatrix:
        return fd_scale(c, self)

    def __mul__(self, c: float) -> FDMatrix:
        return fd_scale(c, self)

    def row_classes(self) -> list:
        keys = dict.fromkeys(k for u, _ in self.terms for k in u.exceptions)
        return [*keys, DEFAULT]

    def col_classes(self) -> list:
        keys = dict.fromkeys(k for _, v in self.terms for k in v.exceptions)
        return [*keys, DEFAULT]

    def to_literal(self) -> dict:
        return {"terms": [{"u": u.to_literal(), "v": v.to_literal()} for u, v in self.terms]}

    @classmethod
    def from_literal(cls, lit: Mapping) -> FDMatrix:
        return cls(
            tuple(
                (FDVector.from_literal(t["u"]), FDVector.from_literal(t["v"]))
                for t in lit["terms"]
            )
        )


ZERO = FDMatrix()


def zero() -> FDMatrix:
    return ZERO


def fd_value(A: FDMatrix, i: Hashable, j: Hashable) -> float:
    # fsum keeps the value independent of term order
    return math.fsum(u(i) * v(j) for u, v in A.terms)


def outer(u: FDVector, v: FDVector) -> FDMatrix:
    return FDMatrix(((u, v),))


def lift_scalar(x: float) -> FDMatrix:
    return outer(ONES, FDVector(x))


def lift_row(alpha: FDVector) -> FDMatrix:
    """``A[i, j] = alpha(j)``: equal values down each column."""
    return outer(ONES, alpha)


def lift_col(beta: FDVector) -> FDMatrix:
    """``A[i, j] = beta(i)``: equal values along each row."""
    return outer(beta, ONES)


def fd_add(A: FDMatrix, B: FDMatrix) -> FDMatrix:
    return FDMatrix(A.terms + B.terms)


def fd_scale(c: float, A: FDMatrix) -> FDMatrix:
    if c == 0.0:
        return ZERO
    return FDMatrix(tuple((u, v.scale(c)) for u, v in A.terms))


def hadamard(A: FDMatrix, B: FDMatrix) -> FDMatrix:
    terms = []
    for ua, va in A.terms:
        for ub, vb in B.terms:
            u, v = ua * ub, va * vb
            if not (u.is_zero or v.is_zero):
                terms.append((u, v))
    return FDMatrix(tuple(terms))


def row_combine(beta: FDVector, A: FDMatrix) -> FDVector:
    """The row vector ``beta^T A``, or the zero vector if any inner sum diverges."""
    coeffs = []
    for u, _ in A.terms:
        c = beta.dot(u)
        if c is None:
            return ZERO_VECTOR
        coeffs.append(c)
    keys = dict.fromkeys(k for _, v in A.terms for k in v.exceptions)
    default = math.fsum(c * v.default for c, (_, v) in zip(coeffs, A.terms))
    exc = {k: math.fsum(c * v(k) for c, (_, v) in zip(coeffs, A.terms)) for k in keys}
    return FDVector(default, exc)


def _grid(A: FDMatrix, rows: Sequence, cols: Sequence) -> list[list[float]]:
    return [[fd_value(A, i, j) for j in cols] for i in rows]


def class_values(A: FDMatrix) -> tuple[list, list, list[list[float]]]:
    """Row classes, column classes and the value on each class cell."""
    rows, cols = A.row_classes(), A.col_classes()
    return rows, cols, _grid(A, rows, cols)


def is_boolean_mask(A: FDMatrix) -> bool:
    _, _, g = class_values(A)
    return all(x in (0.0, 1.0) for row in g for x in row)


def is_constant(A: FDMatrix) -> bool:
    _, _, g = class_values(A)
    first = g[-1][-1]
    return all(x == first for row in g for x in row)


def ewise_max(A: FDMatrix, B: FDMatrix) -> FDMatrix:
    """Entrywise maximum of two 0/1 masks, as ``A + B - A .* B``."""
    if not is_boolean_mask(A):
        raise NotAMask("left operand of ewise_max is not a 0/1 mask")
    if not is_boolean_mask(B):
        raise NotAMask("right operand of ewise_max is not a 0/1 mask")
    return A + B - hadamard(A, B)


def update_delta(A: FDMatrix, alpha: FDVector, beta: FDVector, gamma: FDVector) -> FDMatrix:
    """The increment ``(gamma->) .* (^alpha) .* ^(beta^T A)`` of the standard update."""
    if not beta.has_finite_support:
        raise InfiniteSupport("beta must have finitely many nonzero elements")
    if not gamma.has_finite_support:
        raise InfiniteSupport("gamma must have finitely many nonzero elements")
    return hadamard(lift_col(gamma), hadamard(lift_row(alpha), lift_row(row_combine(beta, A))))


def matrix_update(A: FDMatrix, alpha: FDVector, beta: FDVector, gamma: FDVector) -> FDMatrix:
    """``a_ij += gamma_i * alpha_j * sum_k beta_k a_kj``."""
    return A + update_delta(A, alpha, beta, gamma)


def _check_masks(alpha: FDVector, beta: FDVector) -> None:
    if not alpha.is_mask():
        raise NotAMask("alpha is not 0/1 valued")
    if not beta.is_mask():
        raise NotAMask("beta is not 0/1 valued")


def subgraph_overall(A: FDMatrix, alpha: FDVector, beta: FDVector) -> FDMatrix:
    """Keep entry ``(i, j)`` iff ``beta(i) == 1`` or ``alpha(j) == 1``."""
    _check_masks(alpha, beta)
    return hadamard(ewise_max(lift_row(alpha), lift_col(beta)), A)


def subgraph_internal(A: FDMatrix, alpha: FDVector, beta: FDVector) -> FDMatrix:
    """Keep entry ``(i, j)`` iff ``beta(i) == 1`` and ``alpha(j) == 1``."""
    _check_masks(alpha, beta)
    return hadamard(hadamard(lift_row(alpha), lift_col(beta)), A)


def finite_support(A: FDMatrix) -> bool:
    rows, cols, g = class_values(A)
    if g[-1][-1] != 0.0:
        return False
    if any(g[r][-1] != 0.0 for r in range(len(rows) - 1)):
        return False
    return all(g[-1][c] == 0.0 for c in range(len(cols) - 1))


def support(A: FDMatrix) -> set:
    return {(i, j) for i, j, _ in to_triplets(A)}


def to_triplets(A: FDMatrix) -> list[tuple[Hashable, Hashable, float]]:
    """Nonzero entries ``(row, col, value)`` of a finite-support matrix."""
    if not finite_support(A):
        raise InfiniteSupport("matrix has infinitely many nonzero entries")
    rows, cols, g = class_values(A)
    return [
        (i, j, g[a][b])
        for a, i in enumerate(rows[:-1])
        for b, j in enumerate(cols[:-1])
        if g[a][b] != 0.0
    ]


def from_triplets(triplets: Iterable[Sequence]) -> FDMatrix:
    by_row: dict = {}
    for i, j, w in triplets:
        row = by_row.setdefault(i, {})
        row[j] = row.get(j, 0.0) + float(w)
    return FDMatrix(
        tuple((FDVector.unit(i), FDVector(0.0, row)) for i, row in by_row.items())
    )


def _from_grid(rows: list, cols: list, g: list[list[float]]) -> FDMatrix:
    exc_rows, exc_cols = rows[:-1], cols[:-1]
    terms = []
    for a, r in enumerate(rows):
        v = FDVector(g[a][-1], {c: g[a][b] for b, c in enumerate(exc_cols)})
        if v.is_zero:
            continue
        u = FDVector.unit(r) if r is not DEFAULT else FDVector(1.0, {k: 0.0 for k in exc_rows})
        terms.append((u, v))
    return FDMatrix(tuple(terms))


def compact(A: FDMatrix) -> FDMatrix:
    """Rewrite ``A`` with one term per row class.  Entry values are unchanged."""
    return _from_grid(*class_values(A))


def fd_map(f: Callable[[float], float], A: FDMatrix) -> FDMatrix:
    """Apply ``f`` entrywise.  The result stays finitely describable."""
    rows, cols, g = class_values(A)
    return _from_grid(rows, cols, [[float(f(x)) for x in row] for row in g])


def extract_row(A: FDMatrix, i: Hashable) -> FDVector:
    cols = A.col_classes()
    return FDVector(fd_value(A, i, DEFAULT), {j: fd_value(A, i, j) for j in cols[:-1]})


def extract_col(A: FDMatrix, j: Hashable) -> FDVector:
    rows = A.row_classes()
    return FDVector(fd_value(A, DEFAULT, j), {i: fd_value(A, i, j) for i in rows[:-1]})


def is_row_lift(A: FDMatrix) -> bool:
    """True iff every column of ``A`` is constant, i.e. ``A = lift_row(alpha)``."""
    _, _, g = class_values(A)
    return all(row == g[-1] for row in g)


def is_col_lift(A: FDMatrix) -> bool:
    _, _, g = class_values(A)
    return all(all(x == row[-1] for x in row) for row in g)


def semantically_equal(A: FDMatrix, B: FDMatrix, tol: float = 0.0) -> bool:
    rows = [*dict.fromkeys([*A.row_classes()[:-1], *B.row_classes()[:-1]]), DEFAULT]
    cols = [*dict.fromkeys([*A.col_classes()[:-1], *B.col_classes()[:-1]]), DEFAULT]
    for i in rows:
        for j in cols:
            a, b = fd_value(A, i, j), fd_value(B, i, j)
            if a != b and not abs(a - b) <= tol:
                return False
    return True


def to_dense(A: FDMatrix, row_keys: Sequence, col_keys: Sequence) -> np.ndarray:
    out = np.zeros((len(row_keys), len(col_keys)))
    for u, v in A.terms:
        out += np.outer([u(i) for i in row_keys], [v(j) for j in col_keys])
    return out
