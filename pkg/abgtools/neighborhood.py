import collections
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Optional, Set, Tuple

from abgtools.complex import (
    Simplex,
    SimplicialComplex,
    Subcomplex,
    barycentric_subdivision,
    boundary_subcomplex,
    euler_characteristic,
    is_full_subcomplex,
    permutation_sign,
    simplicial_neighborhood,
    verify_closed_pseudomanifold,
)
from abgtools.errors import (
    BoundariesDiffer,
    NotPseudomanifold,
    ParamMismatch,
    QuotientNotSimplicial,
    SkeletonNotFull,
)
from abgtools.lattice import (
    ConstructionParams,
    QuotientTriangulation,
    fundamental_grid,
    half_cube_chains,
    is_in_skeleton,
    skeleton_subcomplex,
    triangulate_quotient,
)
from abgtools.orientation import double_cover_labels, orientation_character


@dataclass(frozen=True, eq=False)
class NeighborhoodPair:
    """Regular neighborhoods of Z and Z' in the subdivided Ghat quotient."""

    params: ConstructionParams
    quotient: QuotientTriangulation
    z: Subcomplex
    zprime: Subcomplex
    subdivided: SimplicialComplex
    origin_map: Dict[int, Simplex]
    z_image: Subcomplex
    zprime_image: Subcomplex
    n_z: Subcomplex
    n_zprime: Subcomplex


def subdivided_image(
    subdivided: SimplicialComplex, origin_map: Dict[int, Simplex], sub: Subcomplex
) -> Subcomplex:
    """Subdivision of sub, as a subcomplex of the subdivided parent."""
    inside = {v for v, origin in origin_map.items() if origin in sub.members}
    generators = set()
    for t in subdivided.top:
        positions = [i for i, v in enumerate(t) if v in inside]
        if positions:
            generators.add(subdivided.subface(t, positions))
    return Subcomplex(subdivided, frozenset(generators))


def build_neighborhoods(
    quotient: QuotientTriangulation,
    params: ConstructionParams,
    skeleta: Optional[Tuple[Subcomplex, Subcomplex]] = None,
    cover: Optional[QuotientTriangulation] = None,
    verbose: bool = False,
) -> NeighborhoodPair:
    if getattr(quotient, "params", None) != params:
        raise ParamMismatch(f"quotient was not built for {params}")

    if params.group_kind == "Ghat":
        cover = quotient
    elif cover is None:
        cover = triangulate_quotient(params.cover(), verbose=verbose)
    elif cover.params != params.cover():
        raise ParamMismatch(f"cover was not built for {params.cover()}")

    if skeleta is None:
        z = skeleton_subcomplex(cover, cover.params, "Z")
        zprime = skeleton_subcomplex(cover, cover.params, "Zprime")
    else:
        z, zprime = skeleta
    for name, sub in (("Z", z), ("Z'", zprime)):
        if sub.parent is not cover:
            raise ParamMismatch(f"{name} is not a subcomplex of the cover quotient")
        if not is_full_subcomplex(cover, sub):
            raise SkeletonNotFull(f"{name} is not a full subcomplex")

    subdivided, origin_map = barycentric_subdivision(cover, verbose=verbose)
    z_image = subdivided_image(subdivided, origin_map, z)
    zprime_image = subdivided_image(subdivided, origin_map, zprime)
    pair = NeighborhoodPair(
        params=params,
        quotient=cover,
        z=z,
        zprime=zprime,
        subdivided=subdivided,
        origin_map=origin_map,
        z_image=z_image,
        zprime_image=zprime_image,
        n_z=simplicial_neighborhood(subdivided, z_image),
        n_zprime=simplicial_neighborhood(subdivided, zprime_image),
    )
    if verbose:
        print(
            f"N(Z): {len(pair.n_z.generators)} top simplices, "
            f"N(Z'): {len(pair.n_zprime.generators)} top simplices",
            flush=True,
        )
    return pair


def neighborhoods_cover(pair: NeighborhoodPair) -> bool:
    union = pair.n_z.generators | pair.n_zprime.generators
    return union == frozenset(pair.subdivided.top)


def neighborhoods_meet_in_boundary(pair: NeighborhoodPair) -> bool:
    boundary = boundary_subcomplex(pair.n_z)
    return pair.n_z.members & pair.n_zprime.members == boundary.members


def x_avoids_skeleta(pair: NeighborhoodPair, x_hat: Subcomplex) -> bool:
    for v in x_hat.vertex_ids:
        origin = pair.origin_map[v]
        if origin in pair.z.members or origin in pair.zprime.members:
            return False
    return True


def cover_boundary(pair: NeighborhoodPair) -> Subcomplex:
    """Common boundary of N(Z) and N(Z') as a subcomplex of the subdivided cover."""
    boundary_z = boundary_subcomplex(pair.n_z)
    boundary_zprime = boundary_subcomplex(pair.n_zprime)
    if boundary_z.generators != boundary_zprime.generators:
        raise BoundariesDiffer(
            sorted(boundary_z.generators - boundary_zprime.generators),
            sorted(boundary_zprime.generators - boundary_z.generators),
        )
    return boundary_z


def _require_pseudomanifold(x: SimplicialComplex, d: int) -> SimplicialComplex:
    report = verify_closed_pseudomanifold(x, d)
    if not (report.pure and report.ridges_ok):
        raise NotPseudomanifold(report.failures)
    return x


def extract_cover_X(pair: NeighborhoodPair) -> SimplicialComplex:
    boundary = cover_boundary(pair)
    x_hat = pair.subdivided.restrict(sorted(boundary.generators))
    return _require_pseudomanifold(x_hat, 2 * pair.params.k)


def push_forward_X(
    x_hat: SimplicialComplex, params: ConstructionParams
) -> SimplicialComplex:
    """Image of the cover surface under the 2-to-1 map to the quotient by G."""
    chart = params.chart
    reps = [chart.canonical_rep(p) for p in x_hat.vertices]
    vertices = sorted(set(reps))
    id_of = {p: i for i, p in enumerate(vertices)}

    images = collections.Counter()
    for f in x_hat.top:
        image = tuple(sorted(id_of[reps[v]] for v in f))
        if len(set(image)) != len(image):
            raise QuotientNotSimplicial(f, "facet has identified vertices under G")
        images[image] += 1
    for image, count in images.items():
        if count != 2:
            raise QuotientNotSimplicial(
                image, f"facet has {count} preimages instead of 2"
            )

    x = SimplicialComplex(params.n, vertices, images, chart)
    return _require_pseudomanifold(x, 2 * params.k)


def extract_X(pair: NeighborhoodPair) -> SimplicialComplex:
    x_hat = extract_cover_X(pair)
    if pair.params.group_kind == "Ghat":
        return x_hat
    return push_forward_X(x_hat, pair.params)


def _outside_skeleta(point, k: int) -> bool:
    return not (is_in_skeleton(point, k, "Z") or is_in_skeleton(point, k, "Zprime"))


def direct_X(
    subdivided: SimplicialComplex,
    origin_map: Dict[int, Simplex],
    params: ConstructionParams,
) -> SimplicialComplex:
    """Top chains whose edge-level face avoids Z and Z', with their vertex dropped."""
    if subdivided.chart is None or subdivided.chart.group != params.group:
        raise ParamMismatch(f"subdivision is not charted for {params}")

    k = params.k
    outside = [_outside_skeleta(p, k) for p in subdivided.vertices]
    dims = [len(origin_map[v]) - 1 for v in range(len(subdivided.vertices))]
    facets = set()
    for t in subdivided.top:
        chain = sorted(t, key=dims.__getitem__)
        if dims[chain[0]] == 0 and outside[chain[1]]:
            facets.add(tuple(sorted(chain[1:])))

    x = subdivided.restrict(sorted(facets))
    return _require_pseudomanifold(x, 2 * k)


def upstairs_X_facets(params: ConstructionParams) -> Set[FrozenSet]:
    """Facets of X computed in R^n from lifted half-cube simplices.

    Each facet is returned as the set of its canonical vertex points.
    """
    chart = params.chart
    k, n = params.k, params.n
    facets = set()
    for corner in fundamental_grid(params):
        for chain in half_cube_chains(corner):
            for perm in itertools.permutations(range(n + 1)):
                prefix = []
                flag = []
                for p in perm:
                    prefix.append(chain[p])
                    flag.append(
                        tuple(sum(c, Fraction(0)) / len(prefix) for c in zip(*prefix))
                    )
                if _outside_skeleta(flag[1], k):
                    facets.add(frozenset(chart.canonical_rep(b) for b in flag[1:]))
    return facets


def complex_facet_points(x: SimplicialComplex) -> Set[FrozenSet]:
    return {frozenset(x.vertices[v] for v in f) for f in x.top}


def cover_projection(
    x_hat: SimplicialComplex, x: SimplicialComplex, params: ConstructionParams
) -> Dict[int, int]:
    chart = params.chart
    id_of = {p: i for i, p in enumerate(x.vertices)}
    projection = {}
    for i, p in enumerate(x_hat.vertices):
        rep = chart.canonical_rep(p)
        if rep not in id_of:
            raise ParamMismatch(
                f"cover vertex {p} has no image in the quotient surface"
            )
        projection[i] = id_of[rep]
    return projection


def double_cover_matches(
    x: SimplicialComplex, x_hat: SimplicialComplex, params: ConstructionParams
) -> bool:
    """Whether x_hat, via the projection, is the orientation double cover of x."""
    cover, _, label = double_cover_labels(x)
    projection = cover_projection(x_hat, x, params)
    orientation = orientation_character(x_hat)
    if not orientation.orientable:
        return False

    x_facets = set(x.top)
    vertex_image = {}
    facet_images = set()
    for f_hat in x_hat.top:
        image = [projection[v] for v in f_hat]
        if len(set(image)) != len(image):
            return False
        order = sorted(range(len(image)), key=image.__getitem__)
        f = tuple(image[i] for i in order)
        if f not in x_facets:
            return False

        sign = orientation.facet_signs[f_hat] * permutation_sign(order)
        targets = []
        for v_hat, v in zip(f_hat, image):
            target = label[(v, f, sign)]
            if vertex_image.setdefault(v_hat, target) != target:
                return False
            targets.append(target)
        facet_images.add(tuple(sorted(targets)))

    return (
        len(vertex_image) == len(set(vertex_image.values())) == len(cover.vertices)
        and facet_images == set(cover.top)
        and len(x_hat.top) == len(cover.top)
    )


def neighborhood_euler(pair: NeighborhoodPair) -> Tuple[int, int]:
    return euler_characteristic(pair.n_z), euler_characteristic(pair.n_zprime)
