from fractions import Fraction
from typing import List, Optional, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.solvers.simplex import InfeasibleLPError, linprog


def to_qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


def from_qq(x) -> Fraction:
    return Fraction(int(QQ.numer(x)), int(QQ.denom(x)))


def qq_matrix(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None):
    ncols = len(rows[0]) if rows else (ncols or 0)
    return DomainMatrix(
        [[to_qq(Fraction(x)) for x in row] for row in rows], (len(rows), ncols), QQ
    )


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows or not rows[0]:
        return 0
    return qq_matrix(rows).rank()


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    return from_qq(qq_matrix(rows).det())


def differences(points: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    base = points[0]
    return [[x - y for x, y in zip(p, base)] for p in points[1:]]


def affinely_independent(points: Sequence[Sequence[Fraction]]) -> bool:
    if len(points) <= 1:
        return True
    return rank(differences(points)) == len(points) - 1


def simplex_volume(points: Sequence[Sequence[Fraction]]) -> Fraction:
    """Unsigned volume of a full-dimensional simplex."""
    rows = differences(points)
    factorial = 1
    for i in range(2, len(rows) + 1):
        factorial *= i
    return abs(det(rows)) / factorial


def solve_unique(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> Optional[List[Fraction]]:
    """Solve rows @ x = rhs exactly; None unless the solution exists and is unique."""
    n_unknowns = len(rows[0])
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = qq_matrix(augmented).rref()
    if n_unknowns in pivots or len(pivots) < n_unknowns:
        return None

    entries = reduced.to_list()
    return [from_qq(entries[i][n_unknowns]) for i in range(n_unknowns)]


def max_nonshared_weight(
    first: Sequence[Sequence[Fraction]],
    second: Sequence[Sequence[Fraction]],
    first_free: Sequence[bool],
    second_free: Sequence[bool],
) -> Optional[Fraction]:
    """Exact LP over pairs of convex combinations with equal images.

    Returns the largest total weight a common point can put on the free
    vertices of either simplex, or None when the hulls are disjoint.
    """
    n_first, n_second = len(first), len(second)
    n_vars = n_first + n_second
    dim = len(first[0])

    a_eq = []
    b_eq = []
    for axis in range(dim):
        a_eq.append(
            [first[i][axis] for i in range(n_first)]
            + [-second[j][axis] for j in range(n_second)]
        )
        b_eq.append(0)
    a_eq.append([1] * n_first + [0] * n_second)
    b_eq.append(1)
    a_eq.append([0] * n_first + [1] * n_second)
    b_eq.append(1)

    # explicit unit upper bounds keep the inequality block non-empty
    a_ub = [[1 if i == j else 0 for j in range(n_vars)] for i in range(n_vars)]
    b_ub = [1] * n_vars
    objective = [-1 if free else 0 for free in list(first_free) + list(second_free)]

    try:
        optimum, _ = linprog(objective, a_ub, b_ub, a_eq, b_eq)
    except InfeasibleLPError:
        return None

    return -Fraction(int(optimum.p), int(optimum.q))
