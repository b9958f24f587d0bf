"""Shared construction helpers for the test suite."""

import numpy as np

from bundleforms.semialg import (
    EQ,
    GE,
    GT,
    Base,
    Condition,
    Polynomial,
    SemialgebraicSet,
)


def interval(lo=None, hi=None, strict=True):
    """One-dimensional interval set."""
    conds = []
    x = Polynomial.coordinate(1, 0)
    op = GT if strict else GE
    if lo is not None:
        conds.append(Condition.from_poly(x - Polynomial.constant(1, lo), op))
    if hi is not None:
        conds.append(Condition.from_poly(Polynomial.constant(1, hi) - x, op))
    return SemialgebraicSet(1, [conds])


def unit_circle():
    p = (Polynomial.coordinate(2, 0) * Polynomial.coordinate(2, 0)
         + Polynomial.coordinate(2, 1) * Polynomial.coordinate(2, 1)
         - Polynomial.constant(2, 1))
    return SemialgebraicSet(2, [[Condition.from_poly(p, EQ)]])


def grid(lo, hi, n):
    return np.linspace(lo, hi, n).reshape(-1, 1)


LINE = Base(SemialgebraicSet.whole_space(1), box=((-3.0, 3.0),), name="line")
