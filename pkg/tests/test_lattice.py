import itertools
import math
from fractions import Fraction

import pytest

from abgtools import exact
from abgtools.complex import (
    check_pairwise_intersections,
    euler_characteristic,
    is_full_subcomplex,
)
from abgtools.errors import (
    DimensionOutOfRange,
    IndexOutOfRange,
    InvalidParams,
    NotOppositeVertices,
    ParamMismatch,
    QuotientNotSimplicial,
    SkeletonNotInvariant,
)
from abgtools.lattice import (
    ConstructionParams,
    QuotientTriangulation,
    closed_form_cell_count,
    cube_triangulation,
    cubical_cell_count,
    face_restriction,
    kuhn_triangulation,
    linear_factor_cell_count,
    parse_params,
    skeleton_subcomplex,
    tiling_volume,
    translation_vertex_map,
    triangulate_quotient,
    verify_dual_split,
    verify_tiling,
)

HALF = Fraction(1, 2)


def test_params_validation():
    params = ConstructionParams(1, 2, "G")
    assert params.n == 3
    assert params.cover() == ConstructionParams(1, 2, "Ghat")
    assert parse_params("2,1,Ghat") == ConstructionParams(2, 1, "Ghat")
    with pytest.raises(InvalidParams):
        ConstructionParams(0, 1)
    with pytest.raises(InvalidParams):
        ConstructionParams(1, 0)
    with pytest.raises(InvalidParams):
        ConstructionParams(1, 1, "H")
    with pytest.raises(InvalidParams):
        parse_params("1,1")


def test_group_basis_and_covolume():
    g = ConstructionParams(1, 1, "G").group
    assert g.basis[-1] == (HALF, HALF, Fraction(3, 2))
    assert g.covolume == Fraction(3, 2)
    ghat = ConstructionParams(1, 1, "Ghat").group
    assert ghat.basis[-1] == (1, 1, 3)
    assert ghat.covolume == 3
    assert ConstructionParams(1, 2, "Ghat").group.covolume == 20


def test_canonical_rep():
    chart = ConstructionParams(1, 1, "Ghat").chart
    assert chart.canonical_rep([0, 0, 3]) == (0, 0, 0)
    assert chart.canonical_rep([1, 1, 3]) == (0, 0, 0)
    assert chart.canonical_rep([HALF, 0, -1]) == (HALF, 0, 2)
    assert chart.canonical_rep([Fraction(7, 2), -2, 0]) == (HALF, 0, 0)

    g_chart = ConstructionParams(1, 1, "G").chart
    assert g_chart.canonical_rep([HALF, HALF, Fraction(3, 2)]) == (0, 0, 0)
    assert g_chart.canonical_rep([0, 0, Fraction(3, 2)]) == (HALF, HALF, 0)


@pytest.mark.parametrize("kind", ["G", "Ghat"])
@pytest.mark.parametrize("L", [1, 2])
def test_canonical_rep_is_idempotent_and_congruent(kind, L):
    chart = ConstructionParams(1, L, kind).chart
    for p in itertools.product([Fraction(j, 4) for j in range(-6, 7, 3)], repeat=3):
        rep = chart.canonical_rep(p)
        assert chart.canonical_rep(rep) == rep
        assert chart.contains(tuple(a - b for a, b in zip(p, rep)))
        assert all(0 <= x < L for x in rep[:-1])
        assert 0 <= rep[-1] < chart.height


def test_small_difference():
    chart = ConstructionParams(1, 1, "Ghat").chart
    assert chart.small_difference([HALF, 0, 0]) is None
    assert chart.small_difference([Fraction(1, 4), 0, 0]) == (Fraction(1, 4), 0, 0)
    assert chart.small_difference([Fraction(3, 4), 0, 0]) == (Fraction(-1, 4), 0, 0)
    assert chart.small_difference([1, 1, Fraction(11, 4)]) == (0, 0, Fraction(-1, 4))


def test_lattice_coefficients():
    chart = ConstructionParams(1, 1, "G").chart
    assert chart.coefficients(chart.lattice_vector([2, -1, 3])) == (2, -1, 3)
    assert chart.coefficients([HALF, 0, 0]) is None
    assert not chart.contains([1, 1, 1])


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_kuhn_counts_and_volume(m):
    complex = kuhn_triangulation(m)
    assert len(complex.top) == math.factorial(m)
    assert len(complex.vertices) == 2**m
    total = sum(exact.simplex_volume(complex.realize(s)) for s in complex.top)
    assert total == 1


def test_kuhn_square():
    complex = kuhn_triangulation(2)
    triangles = {frozenset(complex.realize(s)) for s in complex.top}
    assert triangles == {
        frozenset({(0, 0), (1, 0), (1, 1)}),
        frozenset({(0, 0), (0, 1), (1, 1)}),
    }


def test_kuhn_dimension_range():
    with pytest.raises(DimensionOutOfRange):
        kuhn_triangulation(0)
    with pytest.raises(DimensionOutOfRange):
        kuhn_triangulation(8)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_kuhn_face_restriction(m):
    complex = kuhn_triangulation(m)
    for fixed_axes in range(1, m):
        for axes in itertools.combinations(range(m), fixed_axes):
            for values in itertools.product([0, 1], repeat=fixed_axes):
                fixed = dict(zip(axes, map(Fraction, values)))
                free = [a for a in range(m) if a not in fixed]

                def embed(p):
                    point = [None] * m
                    for a, v in fixed.items():
                        point[a] = v
                    for a, x in zip(free, p):
                        point[a] = x
                    return tuple(point)

                face = kuhn_triangulation(len(free))
                expected = {
                    frozenset(embed(p) for p in face.realize(s))
                    for s in face.all_simplices()
                }
                assert face_restriction(complex, fixed) == expected


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_kuhn_symmetry(m):
    complex = kuhn_triangulation(m)
    simplices = {frozenset(complex.realize(s)) for s in complex.top}
    for perm in itertools.permutations(range(m)):
        for flip in (False, True):

            def image(p):
                q = tuple(p[i] for i in perm)
                return tuple(1 - x for x in q) if flip else q

            assert {frozenset(map(image, s)) for s in simplices} == simplices


def test_cube_triangulation_matches_kuhn():
    origin = (0, 0, 0)
    ones = (1, 1, 1)
    assert cube_triangulation(origin, 1, origin, ones) == kuhn_triangulation(3)
    assert cube_triangulation(origin, 1, ones, origin) == kuhn_triangulation(3)


def test_half_cube_triangulation():
    complex = cube_triangulation((0, 0, 0), HALF, (HALF, 0, HALF), (0, HALF, 0))
    assert len(complex.top) == 6
    volume = sum(exact.simplex_volume(complex.realize(s)) for s in complex.top)
    assert volume == Fraction(1, 8)
    for s in complex.top:
        points = complex.realize(s)
        assert (HALF, 0, HALF) in points or (0, HALF, 0) in points


@pytest.mark.parametrize("m", [2, 3, 4])
def test_kuhn_triangulation_passes_intersection_check(m):
    check_pairwise_intersections(kuhn_triangulation(m))


def test_half_cube_passes_intersection_check():
    complex = cube_triangulation((0, 0, 0), HALF, (HALF, 0, HALF), (0, HALF, 0))
    check_pairwise_intersections(complex)


def test_cube_triangulation_rejects_non_opposite():
    with pytest.raises(NotOppositeVertices):
        cube_triangulation((0, 0), 1, (0, 0), (1, 0))


def test_quotient_counts(ghat_quotient, g_quotient):
    assert len(ghat_quotient.vertices) == 24
    assert len(ghat_quotient.top) == 144
    assert euler_characteristic(ghat_quotient) == 0
    assert len(g_quotient.vertices) == 12
    assert len(g_quotient.top) == 72
    assert euler_characteristic(g_quotient) == 0


def test_quotient_tiles_fundamental_domain(ghat_quotient, g_quotient):
    assert tiling_volume(ghat_quotient) == 3
    assert verify_tiling(ghat_quotient)
    assert verify_tiling(g_quotient)


def test_small_quotient_is_not_simplicial(ghat_quotient):
    assert not ghat_quotient.is_simplicial
    with pytest.raises(QuotientNotSimplicial):
        triangulate_quotient(ConstructionParams(1, 1, "Ghat"), require_simplicial=True)


def test_larger_quotient_is_simplicial():
    params = ConstructionParams(1, 2, "Ghat")
    quotient = triangulate_quotient(params, require_simplicial=True)
    assert quotient.is_simplicial
    assert len(quotient.top) == 6 * 16 * 2 * 5


def test_threads_do_not_change_quotient(ghat_quotient):
    threaded = triangulate_quotient(ConstructionParams(1, 1, "Ghat"), thread_count=3)
    assert threaded == ghat_quotient


def test_oriented_key_round_trip(ghat_quotient):
    for s in ghat_quotient.top[:20]:
        points = ghat_quotient.realize(s)
        key, sign = ghat_quotient.oriented_key(points[::-1])
        assert key == s
        assert sign == (1 if len(points) % 4 in (0, 1) else -1)


def test_skeleton_counts(ghat_quotient):
    params = ConstructionParams(1, 1, "Ghat")
    z = skeleton_subcomplex(ghat_quotient, params, "Z")
    assert len(z.simplices(0)) == 12
    assert len(z.simplices(1)) == 18
    assert z.dim == 1
    assert is_full_subcomplex(ghat_quotient, z)

    zprime = skeleton_subcomplex(ghat_quotient, params, "Zprime")
    assert len(zprime.simplices(0)) == 12
    assert is_full_subcomplex(ghat_quotient, zprime)
    assert not z.members & zprime.members


def test_skeleta_swap_under_half_generator(ghat_quotient):
    params = ConstructionParams(1, 1, "Ghat")
    z = skeleton_subcomplex(ghat_quotient, params, "Z")
    zprime = skeleton_subcomplex(ghat_quotient, params, "Zprime")
    shift = ConstructionParams(1, 1, "G").group.basis[-1]
    assert {ghat_quotient.translate(s, shift) for s in z.members} == zprime.members
    vertex_map = translation_vertex_map(ghat_quotient, shift)
    assert sorted(vertex_map.values()) == list(range(24))


def test_skeleton_needs_cover(g_quotient, ghat_quotient):
    with pytest.raises(SkeletonNotInvariant):
        skeleton_subcomplex(g_quotient, ConstructionParams(1, 1, "G"), "Z")
    with pytest.raises(ParamMismatch):
        skeleton_subcomplex(ghat_quotient, ConstructionParams(1, 2, "Ghat"), "Z")


def test_larger_skeleta_are_full():
    params = ConstructionParams(1, 2, "Ghat")
    quotient = triangulate_quotient(params)
    for which in ("Z", "Zprime"):
        skeleton = skeleton_subcomplex(quotient, params, which)
        assert is_full_subcomplex(quotient, skeleton)


def test_dual_split(ghat_quotient, g_quotient):
    assert verify_dual_split(ghat_quotient, ConstructionParams(1, 1, "Ghat"))
    assert verify_dual_split(g_quotient, ConstructionParams(1, 1, "G"))


def test_dual_split_detects_moved_vertex(ghat_quotient):
    params = ConstructionParams(1, 1, "Ghat")
    vertices = list(ghat_quotient.vertices)
    assert vertices[0] == (0, 0, 0)
    vertices[0] = (Fraction(1, 4),) * 3
    mutated = QuotientTriangulation(params, vertices, ghat_quotient.top)
    assert not verify_dual_split(mutated, params)


def test_cubical_cell_counts():
    params = ConstructionParams(1, 1, "Ghat")
    assert [cubical_cell_count(params, i) for i in range(2)] == [3, 9]
    assert [linear_factor_cell_count(params, i) for i in range(2)] == [2, 6]
    with pytest.raises(IndexOutOfRange):
        cubical_cell_count(params, 2)
    with pytest.raises(ParamMismatch):
        cubical_cell_count(ConstructionParams(1, 1, "G"), 0)


@pytest.mark.parametrize("k,L", [(1, 1), (1, 2), (1, 3), (2, 1)])
def test_closed_form_matches_orbit_count(k, L):
    params = ConstructionParams(k, L, "Ghat")
    for i in range(k + 1):
        assert closed_form_cell_count(params, i) == cubical_cell_count(params, i)


def test_simplicial_skeleton_euler_matches_cubical(ghat_quotient):
    params = ConstructionParams(1, 1, "Ghat")
    z = skeleton_subcomplex(ghat_quotient, params, "Z")
    assert euler_characteristic(z) == 3 - 9


@pytest.mark.slow
def test_k2_quotient():
    params = ConstructionParams(2, 1, "Ghat")
    quotient = triangulate_quotient(params, thread_count=4)
    assert len(quotient.top) == 11520
    assert verify_dual_split(quotient, params)
    for which in ("Z", "Zprime"):
        skeleton = skeleton_subcomplex(quotient, params, which)
        assert is_full_subcomplex(quotient, skeleton)
