"""Exact Gaussian elimination over an arithmetic context."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any


@dataclass
class EchelonForm:
    rows: list[list[Any]]
    pivots: list[int]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def reduced_echelon(ctx: Any, matrix: Sequence[Sequence[Any]]) -> EchelonForm:
    """Reduced row echelon form; pivots are the first formally nonzero entries."""

    rows = [[ctx.coerce(value) for value in row] for row in matrix]
    if not rows:
        return EchelonForm(rows=[], pivots=[])
    width = len(rows[0])
    pivots: list[int] = []
    rank = 0
    for column in range(width):
        pivot_row = next(
            (index for index in range(rank, len(rows)) if not ctx.is_zero(rows[index][column])),
            None,
        )
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        pivot_value = rows[rank][column]
        rows[rank] = [value / pivot_value for value in rows[rank]]
        for index in range(len(rows)):
            if index != rank and not ctx.is_zero(rows[index][column]):
                factor = rows[index][column]
                rows[index] = [a - factor * b for a, b in zip(rows[index], rows[rank])]
        pivots.append(column)
        rank += 1
        if rank == len(rows):
            break
    return EchelonForm(rows=rows[:rank], pivots=pivots)


def determinant(ctx: Any, matrix: Sequence[Sequence[Any]]) -> Any:
    rows = [[ctx.coerce(value) for value in row] for row in matrix]
    size = len(rows)
    if any(len(row) != size for row in rows):
        raise ValueError("determinant of a non-square matrix")
    result = ctx.one
    for column in range(size):
        pivot_row = next((index for index in range(column, size) if not ctx.is_zero(rows[index][column])), None)
        if pivot_row is None:
            return ctx.zero
        if pivot_row != column:
            rows[column], rows[pivot_row] = rows[pivot_row], rows[column]
            result = -result
        pivot_value = rows[column][column]
        result = result * pivot_value
        for index in range(column + 1, size):
            if not ctx.is_zero(rows[index][column]):
                factor = rows[index][column] / pivot_value
                rows[index] = [a - factor * b for a, b in zip(rows[index], rows[column])]
    return result


def rank(ctx: Any, matrix: Sequence[Sequence[Any]]) -> int:
    return reduced_echelon(ctx, matrix).rank


def nullspace(ctx: Any, matrix: Sequence[Sequence[Any]], width: int | None = None) -> list[list[Any]]:
    """Basis of {x : matrix x = 0}."""

    if not matrix:
        size = width or 0
        return [[ctx.one if i == j else ctx.zero for i in range(size)] for j in range(size)]
    echelon = reduced_echelon(ctx, matrix)
    size = len(matrix[0])
    free = [column for column in range(size) if column not in echelon.pivots]
    basis: list[list[Any]] = []
    for free_column in free:
        vector = [ctx.zero] * size
        vector[free_column] = ctx.one
        for row, pivot in zip(echelon.rows, echelon.pivots):
            vector[pivot] = -row[free_column]
        basis.append(vector)
    return basis


def solve(ctx: Any, matrix: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> list[Any] | None:
    """One solution of matrix x = rhs (free variables set to zero), or None if inconsistent."""

    augmented = [list(row) + [value] for row, value in zip(matrix, rhs)]
    width = len(matrix[0]) if matrix else 0
    echelon = reduced_echelon(ctx, augmented)
    if width in echelon.pivots:
        return None
    solution = [ctx.zero] * width
    for row, pivot in zip(echelon.rows, echelon.pivots):
        solution[pivot] = row[width]
    return solution
