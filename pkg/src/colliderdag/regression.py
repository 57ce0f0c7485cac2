"""Least-squares fits of the three permuted two-parent models of a triple.

Each variable of a triple is regressed on the other two plus an intercept
by solving the 3x3 normal equations directly. The intercept is a
per-row constant, so its aggregate over the sample is ``m * intercept``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataset import Dataset
from .errors import DegenerateTripleError

PIVOT_RTOL = 1e-12


class TripleIndex(NamedTuple):
    i: int
    j: int
    k: int

    @classmethod
    def of(cls, a, b, c, n=None) -> "TripleIndex":
        a, b, c = int(a), int(b), int(c)
        if len({a, b, c}) != 3:
            raise ValueError(f"triple indices must be distinct, got {(a, b, c)}")
        if min(a, b, c) < 0 or (n is not None and max(a, b, c) >= n):
            raise ValueError(f"triple {(a, b, c)} out of range for n={n}")
        return cls(*sorted((a, b, c)))


@dataclass(frozen=True)
class SingleFit:
    """One model ``target = c0 * parent0 + c1 * parent1 + intercept``."""

    target: int
    parents: tuple[int, int]
    coeffs: tuple[float, float]
    intercept: float
    sum_target: float
    sum_parents: tuple[float, float]
    m: int

    @property
    def sum_parent1(self) -> float:
        return self.sum_parents[0]

    @property
    def sum_parent2(self) -> float:
        return self.sum_parents[1]

    def coefficient(self, parent: int) -> float:
        return self.coeffs[self.parents.index(parent)]


@dataclass(frozen=True)
class TripleFit:
    index: TripleIndex
    fits: tuple[SingleFit, SingleFit, SingleFit]

    def fit_for(self, target: int) -> SingleFit:
        for f in self.fits:
            if f.target == target:
                return f
        raise KeyError(target)

    def coefficient(self, parent: int, target: int) -> float:
        return self.fit_for(target).coefficient(parent)

    def coefficient_matrix(self) -> np.ndarray:
        """3x4 block ``[C | e]``: row ``r`` holds the fit whose target is the
        r-th index of the triple, zero diagonal, intercepts in the last column."""
        out = np.zeros((3, 4))
        for r, f in enumerate(self.fits):
            for c, p in enumerate(self.index):
                if p != f.target:
                    out[r, c] = f.coefficient(p)
            out[r, 3] = f.intercept
        return out


def solve3(a, b):
    """Gaussian elimination with partial pivoting on a 3x3 system.

    Returns ``(x, bad)`` where ``bad`` is -1 on success or the elimination
    column whose pivot fell below ``PIVOT_RTOL`` times the largest row norm.
    Operates on plain floats; this is the reference arithmetic shared with
    the compiled kernel.
    """
    m = [[float(a[r][0]), float(a[r][1]), float(a[r][2]), float(b[r])] for r in range(3)]
    scale = max(abs(row[0]) + abs(row[1]) + abs(row[2]) for row in m)
    tol = PIVOT_RTOL * scale
    for col in range(3):
        piv = col
        best = abs(m[col][col])
        for r in range(col + 1, 3):
            v = abs(m[r][col])
            if v > best:
                best, piv = v, r
        if not best > tol:
            return None, col
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for r in range(col + 1, 3):
            f = m[r][col] / p
            if f != 0.0:
                for c in range(col, 4):
                    m[r][c] -= f * m[col][c]
    x2 = m[2][3] / m[2][2]
    x1 = (m[1][3] - m[1][2] * x2) / m[1][1]
    x0 = (m[0][3] - m[0][1] * x1 - m[0][2] * x2) / m[0][0]
    return (x0, x1, x2), -1


def solve_normal_equations(gram, rhs) -> np.ndarray:
    """Solve a symmetric 3x3 system ``gram @ x = rhs``.

    Raises
    ------
    DegenerateTripleError
        If a pivot is negligible relative to the largest row norm, i.e. the
        variables behind ``gram`` are (near-)collinear.
    """
    gram = np.asarray(gram, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if gram.shape != (3, 3) or rhs.shape != (3,):
        raise ValueError("expected a 3x3 matrix and a length-3 vector")
    if not np.allclose(gram, gram.T, rtol=1e-12, atol=0.0):
        raise ValueError("gram matrix is not symmetric")
    x, bad = solve3(gram, rhs)
    if x is None:
        raise DegenerateTripleError(
            f"singular normal equations (pivot {bad} vanished)", columns=(bad,)
        )
    return np.array(x)


def augmented_gram(values: np.ndarray) -> np.ndarray:
    """Cross-product matrix of ``[values, 1]``.

    Entry ``[p, q]`` is the sum of ``v_p * v_q`` over rows; the last
    row/column holds column sums and the bottom-right entry is ``m``.
    """
    values = np.asarray(values, dtype=np.float64)
    m, n = values.shape
    aug = np.empty((m, n + 1))
    aug[:, :n] = values
    aug[:, n] = 1.0
    return aug.T @ aug


def _fit_from_gram(g: np.ndarray, target: int, parents: tuple[int, int], labels, m: int) -> SingleFit:
    a, b = parents
    one = g.shape[0] - 1
    idx = (a, b, one)
    gram = g[np.ix_(idx, idx)]
    rhs = g[list(idx), target]
    x, bad = solve3(gram, rhs)
    if x is None:
        raise DegenerateTripleError(
            f"collinear columns {labels[a]!r}, {labels[b]!r} (+ intercept) "
            f"when fitting {labels[target]!r}",
            columns=(labels[a], labels[b]),
            target=labels[target],
        )
    return SingleFit(
        target=target,
        parents=(a, b),
        coeffs=(x[0], x[1]),
        intercept=x[2],
        sum_target=float(g[target, one]),
        sum_parents=(float(g[a, one]), float(g[b, one])),
        m=m,
    )


def fit_triple(data: Dataset, t) -> TripleFit:
    """Fit the three permuted models of triple ``t``.

    For each member of the triple as target, the other two members (in
    ascending index order) are the parents.

    Raises
    ------
    DegenerateTripleError
        Tagged with ``t`` when any of the three systems is singular.
    """
    t = TripleIndex.of(*t, n=data.n)
    g3 = augmented_gram(data.values[:, list(t)])
    local = {0: t.i, 1: t.j, 2: t.k}
    fits = []
    for r in range(3):
        a, b = [c for c in range(3) if c != r]
        try:
            f = _fit_from_gram(g3, r, (a, b), [data.names[local[c]] for c in range(3)], data.m)
        except DegenerateTripleError as exc:
            exc.triple = t
            raise
        fits.append(
            SingleFit(
                target=local[r],
                parents=(local[a], local[b]),
                coeffs=f.coeffs,
                intercept=f.intercept,
                sum_target=f.sum_target,
                sum_parents=f.sum_parents,
                m=f.m,
            )
        )
    return TripleFit(t, tuple(fits))
