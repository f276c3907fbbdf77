import collections
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph
import tqdm

from abgtools import exact
from abgtools.errors import (
    BarycenterCollision,
    DegenerateSimplex,
    DuplicateVertexCoordinates,
    NotAComplex,
    NotPure,
    SimplexNotInComplex,
)

RationalVector = Tuple[Fraction, ...]
Simplex = tuple

INTERSECTION_CHECK_LIMIT = 10**5
INTERSECTION_SAMPLE_SIZE = 2000


def rational_vector(coords: Iterable) -> RationalVector:
    return tuple(Fraction(x) for x in coords)


def permutation_sign(order: Sequence[int]) -> int:
    inversions = sum(
        1
        for i in range(len(order))
        for j in range(i + 1, len(order))
        if order[i] > order[j]
    )
    return -1 if inversions % 2 else 1


class SimplicialComplex:
    """Finite complex with exact vertex coordinates.

    Vertices are stored sorted lexicographically, so vertex ids are the total
    order. A simplex is the increasing tuple of its vertex ids. When a quotient
    chart is attached, vertex coordinates are canonical representatives and a
    simplex is realized by its unique small-difference lift.
    """

    def __init__(
        self,
        ambient_dim: int,
        vertices: Sequence[RationalVector],
        top: Iterable[Simplex],
        chart=None,
    ):
        self.ambient_dim = ambient_dim
        self.vertices = tuple(vertices)
        self.top = tuple(sorted(top))
        self.chart = chart

    def vertex_ids(self, s: Simplex) -> Tuple[int, ...]:
        return s

    def vertex_key(self, v: int) -> Simplex:
        return (v,)

    def subface(self, s: Simplex, positions: Sequence[int]) -> Simplex:
        return tuple(s[p] for p in positions)

    def face(self, s: Simplex, i: int) -> Simplex:
        return s[:i] + s[i + 1 :]

    def relabel(self, s: Simplex, id_map: Dict[int, int]) -> Simplex:
        return tuple(id_map[v] for v in s)

    def _rebuild(self, vertices, top) -> "SimplicialComplex":
        return SimplicialComplex(self.ambient_dim, vertices, top, self.chart)

    @property
    def total_order(self) -> Tuple[int, ...]:
        return tuple(range(len(self.vertices)))

    @cached_property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.top), default=-1)

    @cached_property
    def _levels(self) -> Dict[int, Tuple[Simplex, ...]]:
        levels = {}
        current = set()
        for d in range(self.dim, -1, -1):
            current |= {s for s in self.top if len(s) - 1 == d}
            levels[d] = tuple(sorted(current))
            if d > 0:
                current = {self.face(s, i) for s in current for i in range(d + 1)}
        return levels

    def simplices(self, d: int) -> Tuple[Simplex, ...]:
        return self._levels.get(d, ())

    def all_simplices(self) -> Iterable[Simplex]:
        for d in range(self.dim + 1):
            yield from self.simplices(d)

    def f_vector(self) -> Tuple[int, ...]:
        return tuple(len(self.simplices(d)) for d in range(self.dim + 1))

    @cached_property
    def _simplex_set(self) -> FrozenSet[Simplex]:
        return frozenset(self.all_simplices())

    def __contains__(self, s: Simplex) -> bool:
        return s in self._simplex_set

    @cached_property
    def _indices(self) -> Dict[int, Dict[Simplex, int]]:
        return {
            d: {s: i for i, s in enumerate(self.simplices(d))}
            for d in range(self.dim + 1)
        }

    def index(self, d: int) -> Dict[Simplex, int]:
        return self._indices.get(d, {})

    @cached_property
    def _vertex_star(self) -> Dict[int, List[Simplex]]:
        star = collections.defaultdict(list)
        for s in self.top:
            for v in self.vertex_ids(s):
                star[v].append(s)
        return star

    def tops_containing(self, v: int) -> List[Simplex]:
        return self._vertex_star.get(v, [])

    def is_face(self, s: Simplex, t: Simplex) -> bool:
        t_ids = self.vertex_ids(t)
        positions = []
        for v in self.vertex_ids(s):
            if v not in t_ids:
                return False
            positions.append(t_ids.index(v))
        return self.subface(t, positions) == s

    def realize(self, s: Simplex) -> List[RationalVector]:
        points = [self.vertices[v] for v in self.vertex_ids(s)]
        if self.chart is None:
            return points

        base = points[0]
        lifted = [base]
        for p in points[1:]:
            diff = self.chart.small_difference(tuple(x - y for x, y in zip(p, base)))
            if diff is None:
                raise NotAComplex(s, "simplex has no small lift in the chart")
            lifted.append(tuple(b + x for b, x in zip(base, diff)))
        return lifted

    def barycenter(self, s: Simplex) -> RationalVector:
        points = self.realize(s)
        center = tuple(
            sum(coords, Fraction(0)) / len(points) for coords in zip(*points)
        )
        if self.chart is not None:
            return self.chart.canonical_rep(center)
        return center

    def restrict(self, tops: Iterable[Simplex]) -> "SimplicialComplex":
        tops = list(tops)
        used = sorted({v for s in tops for v in self.vertex_ids(s)})
        id_map = {v: i for i, v in enumerate(used)}
        return self._rebuild(
            [self.vertices[v] for v in used], [self.relabel(s, id_map) for s in tops]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.vertices == other.vertices
            and self.top == other.top
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, len(self.vertices), len(self.top)))

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(ambient_dim={self.ambient_dim}, "
            f"vertices={len(self.vertices)}, top={len(self.top)}, dim={self.dim})"
        )


def face_closure(complex: SimplicialComplex, keys: Iterable[Simplex]) -> FrozenSet:
    by_dim = collections.defaultdict(set)
    for s in keys:
        by_dim[len(s) - 1].add(s)
    if not by_dim:
        return frozenset()

    closure = set()
    current = set()
    for d in range(max(by_dim), -1, -1):
        current |= by_dim.get(d, set())
        closure |= current
        if d > 0:
            current = {complex.face(s, i) for s in current for i in range(d + 1)}
    return frozenset(closure)


@dataclass(frozen=True, eq=False)
class Subcomplex:
    """Face-closed subset of a parent complex, given by generating simplices."""

    parent: SimplicialComplex
    generators: FrozenSet[Simplex] = field(default_factory=frozenset)

    @cached_property
    def members(self) -> FrozenSet[Simplex]:
        return face_closure(self.parent, self.generators)

    @cached_property
    def vertex_ids(self) -> FrozenSet[int]:
        return frozenset(
            v for s in self.generators for v in self.parent.vertex_ids(s)
        )

    @cached_property
    def maximal_simplices(self) -> Tuple[Simplex, ...]:
        top = set(self.parent.top)
        if all(s in top for s in self.generators):
            return tuple(sorted(self.generators))

        proper = {
            self.parent.face(s, i)
            for s in self.members
            if len(s) > 1
            for i in range(len(s))
        }
        return tuple(sorted(self.members - proper))

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.generators), default=-1)

    def simplices(self, d: int) -> List[Simplex]:
        return sorted(s for s in self.members if len(s) - 1 == d)

    def as_complex(self) -> SimplicialComplex:
        return self.parent.restrict(self.maximal_simplices)

    def __contains__(self, s: Simplex) -> bool:
        return s in self.members

    def __len__(self) -> int:
        return len(self.members)


def make_subcomplex(
    parent: SimplicialComplex, simplices: Iterable[Simplex]
) -> Subcomplex:
    simplices = frozenset(simplices)
    for s in simplices:
        if s not in parent:
            raise SimplexNotInComplex(s)
    return Subcomplex(parent, simplices)


def _maximal(keys: Iterable[Simplex]) -> List[Simplex]:
    keys = set(keys)
    proper = set()
    for s in keys:
        for r in range(1, len(s)):
            proper.update(itertools.combinations(s, r))
    return sorted(keys - proper)


def make_complex(
    ambient_dim: int,
    vertex_coords: Sequence[Sequence],
    top_simplices: Iterable[Sequence[int]],
    chart=None,
    check_intersections: Optional[bool] = None,
    verbose: bool = False,
) -> SimplicialComplex:
    coords = [rational_vector(p) for p in vertex_coords]
    for p in coords:
        if len(p) != ambient_dim:
            raise ValueError(f"vertex {p} does not have dimension {ambient_dim}")
    if chart is not None:
        coords = [chart.canonical_rep(p) for p in coords]

    order = sorted(range(len(coords)), key=coords.__getitem__)
    for a, b in zip(order, order[1:]):
        if coords[a] == coords[b]:
            raise DuplicateVertexCoordinates(coords[a])
    new_id = {old: new for new, old in enumerate(order)}

    tops = set()
    for simplex in top_simplices:
        ids = [int(v) for v in simplex]
        if len(set(ids)) != len(ids):
            raise ValueError(f"simplex {ids} repeats a vertex")
        if any(v < 0 or v >= len(coords) for v in ids):
            raise ValueError(f"simplex {ids} has a vertex id out of range")
        tops.add(tuple(sorted(new_id[v] for v in ids)))

    complex = SimplicialComplex(
        ambient_dim, [coords[i] for i in order], _maximal(tops), chart
    )
    for s in complex.top:
        if not exact.affinely_independent(complex.realize(s)):
            raise DegenerateSimplex(s)

    if chart is None and check_intersections is not False:
        sample = None
        if len(complex.top) > INTERSECTION_CHECK_LIMIT:
            sample = INTERSECTION_SAMPLE_SIZE
        check_pairwise_intersections(complex, sample=sample, verbose=verbose)

    return complex


def _bounding_box(
    points: Sequence[RationalVector],
) -> Tuple[RationalVector, RationalVector]:
    return tuple(map(min, zip(*points))), tuple(map(max, zip(*points)))


def boxes_overlap(first, second) -> bool:
    (lo_a, hi_a), (lo_b, hi_b) = first, second
    return all(a <= d and c <= b for a, b, c, d in zip(lo_a, hi_a, lo_b, hi_b))


def _meet_properly(
    ids_s: Sequence[int],
    points_s: Sequence[RationalVector],
    ids_t: Sequence[int],
    points_t: Sequence[RationalVector],
    ambient_dim: int,
) -> bool:
    shared = set(ids_s) & set(ids_t)
    union = list(points_s) + [q for v, q in zip(ids_t, points_t) if v not in shared]
    if exact.affinely_independent(union):
        return True

    d = len(ids_s) - 1
    if d == len(ids_t) - 1 == ambient_dim and len(shared) == d:
        ridge = [p for v, p in zip(ids_s, points_s) if v in shared]
        apex_s = next(p for v, p in zip(ids_s, points_s) if v not in shared)
        apex_t = next(q for v, q in zip(ids_t, points_t) if v not in shared)
        side_s = exact.det(exact.differences(ridge + [apex_s]))
        side_t = exact.det(exact.differences(ridge + [apex_t]))
        return side_s * side_t < 0

    weight = exact.max_nonshared_weight(
        points_s,
        points_t,
        [v not in shared for v in ids_s],
        [v not in shared for v in ids_t],
    )
    return weight is None or weight == 0


def check_pairwise_intersections(
    complex: SimplicialComplex, sample: Optional[int] = None, verbose: bool = False
) -> None:
    """Raise NotAComplex unless candidate top simplex pairs meet in a common face."""
    tops = complex.top
    points = [complex.realize(s) for s in tops]
    boxes = [_bounding_box(p) for p in points]

    order = sorted(range(len(tops)), key=lambda i: boxes[i][0][0])
    candidates = []
    for pos, a in enumerate(order):
        for b in order[pos + 1 :]:
            if boxes[b][0][0] > boxes[a][1][0]:
                break
            if boxes_overlap(boxes[a], boxes[b]):
                candidates.append((min(a, b), max(a, b)))
    candidates.sort()

    if sample is not None and len(candidates) > sample:
        rng = np.random.default_rng(0)
        picks = rng.choice(len(candidates), size=sample, replace=False)
        candidates = [candidates[i] for i in sorted(picks)]

    for a, b in tqdm.tqdm(
        candidates, desc="Checking intersections", disable=not verbose
    ):
        if not _meet_properly(
            complex.vertex_ids(tops[a]),
            points[a],
            complex.vertex_ids(tops[b]),
            points[b],
            complex.ambient_dim,
        ):
            raise NotAComplex((tops[a], tops[b]))


def star_link(complex: SimplicialComplex, s: Simplex) -> Tuple[Subcomplex, Subcomplex]:
    if s not in complex:
        raise SimplexNotInComplex(s)

    first = complex.vertex_ids(s)[0]
    containing = [t for t in complex.tops_containing(first) if complex.is_face(s, t)]
    star = Subcomplex(complex, frozenset(containing))

    s_ids = set(complex.vertex_ids(s))
    link = Subcomplex(
        complex,
        frozenset(
            u for u in star.members if not s_ids.intersection(complex.vertex_ids(u))
        ),
    )
    return star, link


def is_full_subcomplex(complex: SimplicialComplex, sub: Subcomplex) -> bool:
    vertex_set = sub.vertex_ids
    members = sub.members
    for t in complex.top:
        ids = complex.vertex_ids(t)
        positions = [i for i, v in enumerate(ids) if v in vertex_set]
        if positions and complex.subface(t, positions) not in members:
            return False
    return True


def simplicial_neighborhood(complex: SimplicialComplex, sub: Subcomplex) -> Subcomplex:
    generators = set()
    for v in sub.vertex_ids:
        generators.update(complex.tops_containing(v))
    return Subcomplex(complex, frozenset(generators))


def barycentric_subdivision(
    complex: SimplicialComplex, verbose: bool = False
) -> Tuple[SimplicialComplex, Dict[int, Simplex]]:
    owner = {}
    for s in complex.all_simplices():
        center = complex.barycenter(s)
        if center in owner:
            raise BarycenterCollision(owner[center], s)
        owner[center] = s

    coords = sorted(owner)
    new_id = {owner[c]: i for i, c in enumerate(coords)}
    origin_map = {i: owner[c] for i, c in enumerate(coords)}

    tops = []
    for t in tqdm.tqdm(complex.top, desc="Subdividing", disable=not verbose):
        size = len(complex.vertex_ids(t))
        faces = {}
        for perm in itertools.permutations(range(size)):
            chain = []
            prefix = []
            for p in perm:
                prefix.append(p)
                mask = frozenset(prefix)
                if mask not in faces:
                    faces[mask] = new_id[complex.subface(t, sorted(prefix))]
                chain.append(faces[mask])
            tops.append(tuple(sorted(chain)))

    if len(set(tops)) != len(tops):
        raise NotAComplex(None, "subdivision chains share a vertex set")

    subdivided = SimplicialComplex(complex.ambient_dim, coords, tops, complex.chart)
    return subdivided, origin_map


def boundary_subcomplex(c) -> Subcomplex:
    if isinstance(c, Subcomplex):
        parent, maximal = c.parent, c.maximal_simplices
    else:
        parent, maximal = c, c.top
    if not maximal:
        return Subcomplex(parent, frozenset())

    dims = {len(s) - 1 for s in maximal}
    if len(dims) > 1:
        raise NotPure(dims)
    if dims == {0}:
        return Subcomplex(parent, frozenset())

    counts = collections.Counter(
        parent.face(s, i) for s in maximal for i in range(len(s))
    )
    return Subcomplex(parent, frozenset(r for r, n in counts.items() if n == 1))


@dataclass
class PseudomanifoldReport:
    dimension: int
    pure: bool
    ridges_ok: bool
    facet_components: int
    vertex_components: int
    failures: List[str]

    @property
    def connected(self) -> bool:
        return self.facet_components == self.vertex_components

    @property
    def passed(self) -> bool:
        return self.pure and self.ridges_ok and self.connected

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "pure": self.pure,
            "ridges_ok": self.ridges_ok,
            "connected": self.connected,
            "facet_components": self.facet_components,
            "vertex_components": self.vertex_components,
            "failures": self.failures,
        }


def _component_count(n: int, edges: List[Tuple[int, int]]) -> int:
    if n == 0:
        return 0
    rows = [a for a, _ in edges]
    cols = [b for _, b in edges]
    graph = scipy.sparse.coo_matrix(
        (np.ones(len(edges), dtype=np.int8), (rows, cols)), shape=(n, n)
    )
    count, _ = scipy.sparse.csgraph.connected_components(graph, directed=False)
    return int(count)


def verify_closed_pseudomanifold(
    complex: SimplicialComplex, d: int
) -> PseudomanifoldReport:
    failures = []
    tops = complex.top
    pure = bool(tops) and all(len(s) - 1 == d for s in tops)
    if not pure:
        failures.append(f"not pure of dimension {d}")

    ridge_facets = collections.defaultdict(list)
    for f, s in enumerate(tops):
        for i in range(len(s)):
            ridge_facets[complex.face(s, i)].append(f)

    bad_ridges = [r for r, fs in ridge_facets.items() if len(fs) != 2]
    ridges_ok = not bad_ridges
    if bad_ridges:
        failures.append(f"{len(bad_ridges)} ridges not in exactly two facets")

    facet_edges = [
        (fs[j], fs[j + 1]) for fs in ridge_facets.values() for j in range(len(fs) - 1)
    ]
    vertex_edges = [
        (complex.vertex_ids(s)[0], v) for s in tops for v in complex.vertex_ids(s)[1:]
    ]
    used = sorted({v for s in tops for v in complex.vertex_ids(s)})
    compact = {v: i for i, v in enumerate(used)}
    facet_components = _component_count(len(tops), facet_edges)
    vertex_components = _component_count(
        len(used), [(compact[a], compact[b]) for a, b in vertex_edges]
    )
    if facet_components != vertex_components:
        failures.append("facet adjacency graph is disconnected within a component")

    return PseudomanifoldReport(
        d, pure, ridges_ok, facet_components, vertex_components, failures
    )


@dataclass
class LinkReport:
    dimension: int
    entries: List[dict]

    @property
    def passed(self) -> bool:
        return all(e["passed"] for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "sampled": len(self.entries),
            "passed": self.passed,
            "failed_vertices": [e["vertex"] for e in self.entries if not e["passed"]],
        }


def _is_single_circle(link: SimplicialComplex) -> bool:
    if link.dim != 1:
        return False
    degree = collections.Counter(v for e in link.top for v in link.vertex_ids(e))
    return all(n == 2 for n in degree.values()) and len(degree) == len(link.vertices)


def vertex_link_homology_check(
    complex: SimplicialComplex, d: int, sample: Iterable[int]
) -> LinkReport:
    from abgtools.chains import homology_all

    if d - 1 == 0:
        sphere = [2]
    else:
        sphere = [1] + [0] * (d - 2) + [1]

    entries = []
    for v in sample:
        _, link = star_link(complex, complex.vertex_key(v))
        link_complex = link.as_complex()
        if link_complex.dim != d - 1:
            entries.append({"vertex": v, "betti": [], "torsion": [], "passed": False})
            continue

        groups = homology_all(link_complex)
        betti = [g.betti for g in groups]
        torsion = [list(g.torsion) for g in groups]
        passed = betti == sphere and not any(torsion)
        circle = None
        if d == 2:
            circle = _is_single_circle(link_complex)
            passed = passed and circle
        entries.append(
            {
                "vertex": v,
                "betti": betti,
                "torsion": torsion,
                "circle": circle,
                "passed": passed,
            }
        )

    return LinkReport(d, entries)


def euler_characteristic(c) -> int:
    if isinstance(c, Subcomplex):
        counts = collections.Counter(len(s) - 1 for s in c.members)
        return sum((-1) ** d * n for d, n in counts.items())
    return sum((-1) ** d * len(c.simplices(d)) for d in range(c.dim + 1))
