import itertools
import math

import numpy as np
import pytest
import sympy
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from abgtools.chains import (
    HomologyDescriptor,
    SparseIntegerMatrix,
    boundary_squared_vanishes,
    chain_boundary_matrix,
    homology,
    homology_all,
    integer_system_solvable,
    normalize_divisibility,
    smith_form,
    smith_normal_form,
    z2_in_column_span,
    z2_rank,
)
from abgtools.complex import euler_characteristic
from abgtools.errors import DegreeOutOfRange


def minor_determinants(matrix, size):
    rows, cols = matrix.shape
    for r in itertools.combinations(range(rows), size):
        for c in itertools.combinations(range(cols), size):
            entries = [[ZZ(int(x)) for x in row] for row in matrix[np.ix_(r, c)]]
            yield int(DomainMatrix(entries, (size, size), ZZ).det())


def determinantal_factors(matrix):
    """Invariant factors as ratios of gcds of k x k minors."""
    divisors = [1]
    for size in range(1, min(matrix.shape) + 1):
        d = 0
        for minor in minor_determinants(matrix, size):
            d = math.gcd(d, minor)
            if d == 1:
                break
        if d == 0:
            break
        divisors.append(d)
    return tuple(b // a for a, b in zip(divisors, divisors[1:]))


def betti(groups):
    return tuple(g.betti for g in groups)


def test_sparse_matrix_validation():
    with pytest.raises(ValueError):
        SparseIntegerMatrix(2, 2, ((0, 0, 0),))
    with pytest.raises(ValueError):
        SparseIntegerMatrix(2, 2, ((1, 0, 1), (0, 0, 1)))
    with pytest.raises(ValueError):
        SparseIntegerMatrix(2, 2, ((2, 0, 1),))

    m = SparseIntegerMatrix.from_dense([[0, 3], [-1, 0]])
    assert m.entries == ((0, 1, 3), (1, 0, -1))
    assert m.nnz == 2
    assert m.transpose().entries == ((0, 1, -1), (1, 0, 3))
    assert (m.to_scipy().toarray() == np.array([[0, 3], [-1, 0]])).all()


def test_boundary_matrix_of_tetra_boundary(tetra_boundary):
    d1 = chain_boundary_matrix(tetra_boundary, 1).to_dense()
    assert d1.shape == (4, 6)
    assert list(d1[:, 0]) == [-1, 1, 0, 0]
    assert all(sum(d1[:, c]) == 0 for c in range(6))

    d2 = chain_boundary_matrix(tetra_boundary, 2, "Z2").to_dense()
    assert d2.shape == (6, 4)
    assert set(d2.flatten()) == {0, 1}
    assert all(sum(d2[:, c]) == 3 for c in range(4))


def test_boundary_matrix_degree_range(tetra_boundary):
    with pytest.raises(DegreeOutOfRange):
        chain_boundary_matrix(tetra_boundary, 0)
    with pytest.raises(DegreeOutOfRange):
        chain_boundary_matrix(tetra_boundary, 3)
    with pytest.raises(ValueError):
        chain_boundary_matrix(tetra_boundary, 1, "Q")


def test_boundary_squared_vanishes(solid_tetra, rp2, ghat_quotient):
    for complex in (solid_tetra, rp2, ghat_quotient):
        assert boundary_squared_vanishes(complex)


@pytest.mark.parametrize(
    "matrix,factors",
    [
        ([[1, 0, 0], [0, 2, 0], [0, 0, 6]], (1, 2, 6)),
        ([[2, 4], [6, 8]], (2, 4)),
        ([[2, 0], [0, 3]], (1, 6)),
        ([[0, 0, 0], [0, 0, 0]], ()),
        ([[4, 6]], (2,)),
    ],
)
def test_smith_normal_form_known_matrices(matrix, factors):
    result, rank = smith_normal_form(SparseIntegerMatrix.from_dense(matrix))
    assert result == factors
    assert rank == len(factors)


@pytest.mark.parametrize("seed", range(100))
def test_smith_normal_form_matches_minors(seed):
    rng = np.random.default_rng(seed)
    rows, cols = (8, 8) if seed % 10 == 0 else rng.integers(1, 9, 2)
    matrix = rng.integers(-9, 10, (rows, cols))
    if seed % 3 == 0:
        # rank-deficient: later rows repeat or negate earlier ones
        for i in range(1, rows, 2):
            matrix[i] = -matrix[i - 1] if i % 4 == 1 else matrix[0]
    if seed % 4 == 1:
        matrix = 2 * np.clip(matrix, -4, 4)

    m = SparseIntegerMatrix.from_dense(matrix)
    factors, rank = smith_normal_form(m, verify=True)
    assert factors == determinantal_factors(matrix)
    assert rank == len(factors)


@pytest.mark.parametrize("seed", range(10))
def test_smith_form_transforms(seed):
    rng = np.random.default_rng(100 + seed)
    matrix = rng.integers(-6, 7, (4, 3))
    s, p, q = smith_form(matrix.tolist())

    assert np.array_equal(p.dot(np.array(matrix, dtype=object)).dot(q), s)
    assert abs(sympy.Matrix(p.tolist()).det()) == 1
    assert abs(sympy.Matrix(q.tolist()).det()) == 1
    diagonal = [s[i, i] for i in range(3)]
    assert all(s[i, j] == 0 for i in range(4) for j in range(3) if i != j)
    assert all(d >= 0 for d in diagonal)
    nonzero = [d for d in diagonal if d]
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))


def test_normalize_divisibility():
    assert normalize_divisibility([6, 4]) == [2, 12]
    assert normalize_divisibility([1, -1, 3]) == [1, 1, 3]
    assert normalize_divisibility([]) == []


def test_integer_system_solvable():
    m = SparseIntegerMatrix.from_dense([[2]])
    assert not integer_system_solvable(m, {0: 1})
    assert integer_system_solvable(m, {0: 4})
    assert integer_system_solvable(m, {})

    m = SparseIntegerMatrix.from_dense([[2, 3]])
    assert integer_system_solvable(m, {0: 1})

    m = SparseIntegerMatrix.from_dense([[2], [4]])
    assert integer_system_solvable(m, {0: 2, 1: 4})
    assert not integer_system_solvable(m, {0: 2, 1: 6})


def test_z2_linear_algebra(tetra_boundary):
    d2 = chain_boundary_matrix(tetra_boundary, 2, "Z2")
    assert z2_rank(d2) == 3
    d1 = chain_boundary_matrix(tetra_boundary, 1, "Z2")
    assert z2_in_column_span(d1, {0: 1, 1: 1})
    assert not z2_in_column_span(d1, {0: 1})


def test_homology_descriptor():
    assert str(HomologyDescriptor(1, 7, (2,))) == "Z^7 + Z2"
    assert str(HomologyDescriptor(0, 1)) == "Z"
    assert str(HomologyDescriptor(2, 0)) == "0"
    assert HomologyDescriptor(1, 2, (2, 4)).to_dict() == {
        "degree": 1,
        "betti": 2,
        "torsion": [2, 4],
    }
    with pytest.raises(ValueError):
        HomologyDescriptor(1, 0, (1,))
    with pytest.raises(ValueError):
        HomologyDescriptor(1, 0, (2, 3))
    with pytest.raises(ValueError):
        HomologyDescriptor(1, -1)


def test_homology_of_surfaces(tetra_boundary, rp2, torus7):
    groups = homology_all(tetra_boundary)
    assert betti(groups) == (1, 0, 1)
    assert all(g.torsion == () for g in groups)

    groups = homology_all(rp2)
    assert betti(groups) == (1, 0, 0)
    assert groups[1].torsion == (2,)

    assert betti(homology_all(torus7)) == (1, 2, 1)
    assert homology(torus7, 1) == HomologyDescriptor(1, 2)


def test_homology_mod_two(rp2):
    groups = homology_all(rp2, ring="Z2")
    assert betti(groups) == (1, 1, 1)
    assert all(g.torsion == () for g in groups)


def test_homology_of_three_torus(ghat_quotient):
    groups = homology_all(ghat_quotient)
    assert betti(groups) == (1, 3, 3, 1)
    assert all(g.torsion == () for g in groups)


def test_euler_poincare(tetra_boundary, rp2, torus7, solid_tetra, wedge_of_spheres):
    for complex in (tetra_boundary, rp2, torus7, solid_tetra, wedge_of_spheres):
        groups = homology_all(complex)
        alternating = sum((-1) ** g.degree * g.betti for g in groups)
        assert alternating == euler_characteristic(complex)


def test_homology_degree_range(tetra_boundary):
    with pytest.raises(DegreeOutOfRange):
        homology(tetra_boundary, 5)
    with pytest.raises(DegreeOutOfRange):
        homology_all(tetra_boundary, max_dim=4)
    assert len(homology_all(tetra_boundary, max_dim=1)) == 2
