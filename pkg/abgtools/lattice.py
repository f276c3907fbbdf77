import concurrent.futures
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import tqdm

from abgtools import exact
from abgtools.complex import (
    RationalVector,
    Simplex,
    SimplicialComplex,
    Subcomplex,
    make_complex,
    permutation_sign,
    rational_vector,
)
from abgtools.errors import (
    DimensionOutOfRange,
    IndexOutOfRange,
    InvalidParams,
    NotAComplex,
    NotOppositeVertices,
    ParamMismatch,
    QuotientNotSimplicial,
    SkeletonNotInvariant,
)

GROUP_KINDS = ("G", "Ghat")
HALF = Fraction(1, 2)


def lattice_basis(k: int, L: int, group_kind: str) -> Tuple[RationalVector, ...]:
    n = 2 * k + 1
    basis = []
    for i in range(2 * k):
        basis.append(tuple(Fraction(L) if j == i else Fraction(0) for j in range(n)))
    last = tuple([HALF] * (n - 1) + [HALF + L])
    if group_kind == "Ghat":
        last = tuple(2 * x for x in last)
    basis.append(last)
    return tuple(basis)


@dataclass(frozen=True)
class LatticeGroup:
    ambient_dim: int
    basis: Tuple[RationalVector, ...]
    kind: str

    def __post_init__(self):
        n = self.ambient_dim
        if n < 3 or n % 2 == 0:
            raise InvalidParams(f"ambient dimension {n} is not 2k+1 with k >= 1")
        if len(self.basis) != n or any(len(b) != n for b in self.basis):
            raise InvalidParams("basis must be n vectors in R^n")
        if exact.det(self.basis) == 0:
            raise InvalidParams("basis vectors are linearly dependent")
        L = self.basis[0][0]
        if L.denominator != 1 or L < 1:
            raise InvalidParams(f"side length {L} is not a positive integer")
        if self.kind not in GROUP_KINDS:
            raise InvalidParams(f"unknown group kind {self.kind}")
        if self.basis != lattice_basis((n - 1) // 2, int(L), self.kind):
            raise InvalidParams("basis is not the standard generating set")

    @classmethod
    def from_params(cls, params: "ConstructionParams") -> "LatticeGroup":
        basis = lattice_basis(params.k, params.L, params.group_kind)
        return cls(params.n, basis, params.group_kind)

    @property
    def k(self) -> int:
        return (self.ambient_dim - 1) // 2

    @property
    def L(self) -> int:
        return int(self.basis[0][0])

    @property
    def covolume(self) -> Fraction:
        return abs(exact.det(self.basis))


@dataclass(frozen=True)
class ConstructionParams:
    k: int
    L: int
    group_kind: str = "Ghat"

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidParams(f"k must be a positive integer, got {self.k}")
        if not isinstance(self.L, int) or self.L < 1:
            raise InvalidParams(f"L must be a positive integer, got {self.L}")
        if self.group_kind not in GROUP_KINDS:
            raise InvalidParams(
                f"group must be one of {GROUP_KINDS}, got {self.group_kind}"
            )

    @property
    def n(self) -> int:
        return 2 * self.k + 1

    @cached_property
    def group(self) -> LatticeGroup:
        return LatticeGroup.from_params(self)

    @cached_property
    def chart(self) -> "QuotientChart":
        return QuotientChart(self.group)

    def with_group(self, group_kind: str) -> "ConstructionParams":
        return ConstructionParams(self.k, self.L, group_kind)

    def cover(self) -> "ConstructionParams":
        return self.with_group("Ghat")

    def __str__(self) -> str:
        return f"{self.k},{self.L},{self.group_kind}"


def parse_params(text) -> ConstructionParams:
    if isinstance(text, (tuple, list)):
        parts = [str(p) for p in text]
    else:
        parts = str(text).split(",")
    if len(parts) != 3:
        raise InvalidParams(f"expected K,L,GROUP, got {text!r}")
    try:
        return ConstructionParams(int(parts[0]), int(parts[1]), parts[2].strip())
    except ValueError as err:
        raise InvalidParams(f"expected K,L,GROUP, got {text!r}") from err


@dataclass(frozen=True)
class QuotientChart:
    """Exact arithmetic on R^n modulo a lattice group.

    The canonical representative of a point has last coordinate in [0, c) and
    the others in [0, L), where c is the last coordinate of the last generator.
    """

    group: LatticeGroup

    @property
    def ambient_dim(self) -> int:
        return self.group.ambient_dim

    @cached_property
    def _last(self) -> RationalVector:
        return self.group.basis[-1]

    @cached_property
    def height(self) -> Fraction:
        return self._last[-1]

    @cached_property
    def side(self) -> int:
        return self.group.L

    def canonical_rep(self, p: Sequence) -> RationalVector:
        p = rational_vector(p)
        m = math.floor(p[-1] / self.height)
        q = [x - m * y for x, y in zip(p, self._last)]
        return tuple(x % self.side for x in q[:-1]) + (q[-1],)

    def coefficients(self, g: Sequence) -> Optional[Tuple[int, ...]]:
        g = rational_vector(g)
        m_last = g[-1] / self.height
        if m_last.denominator != 1:
            return None
        coeffs = []
        for x, y in zip(g[:-1], self._last[:-1]):
            c = (x - m_last * y) / self.side
            if c.denominator != 1:
                return None
            coeffs.append(int(c))
        return tuple(coeffs) + (int(m_last),)

    def contains(self, g: Sequence) -> bool:
        return self.coefficients(g) is not None

    def lattice_vector(self, coeffs: Sequence[int]) -> RationalVector:
        return tuple(
            sum((c * b[axis] for c, b in zip(coeffs, self.group.basis)), Fraction(0))
            for axis in range(self.ambient_dim)
        )

    def small_difference(self, d: Sequence) -> Optional[RationalVector]:
        """The vector congruent to d with all coordinates in (-L/2, L/2), if any."""
        d = rational_vector(d)
        half = Fraction(self.side, 2)
        base = math.floor(d[-1] / self.height)
        for m in (base - 1, base, base + 1):
            q = [x - m * y for x, y in zip(d, self._last)]
            reduced = [(x + half) % self.side - half for x in q[:-1]] + [q[-1]]
            if all(abs(x) < half for x in reduced):
                return tuple(reduced)
        return None

    def translates_meeting(
        self,
        lo: RationalVector,
        hi: RationalVector,
        target_lo: RationalVector,
        target_hi: RationalVector,
    ) -> List[RationalVector]:
        """Lattice vectors g for which [lo, hi] + g meets [target_lo, target_hi]."""
        out = []
        m_min = math.ceil((target_lo[-1] - hi[-1]) / self.height)
        m_max = math.floor((target_hi[-1] - lo[-1]) / self.height)
        for m in range(m_min, m_max + 1):
            ranges = []
            for axis in range(self.ambient_dim - 1):
                shift = m * self._last[axis]
                a_min = math.ceil((target_lo[axis] - hi[axis] - shift) / self.side)
                a_max = math.floor((target_hi[axis] - lo[axis] - shift) / self.side)
                ranges.append(range(a_min, a_max + 1))
            for coeffs in itertools.product(*ranges):
                out.append(self.lattice_vector(coeffs + (m,)))
        return out


def monotone_chains(
    start: RationalVector, end: RationalVector
) -> Iterator[List[RationalVector]]:
    m = len(start)
    for perm in itertools.permutations(range(m)):
        p = list(start)
        chain = [tuple(p)]
        for axis in perm:
            p[axis] = end[axis]
            chain.append(tuple(p))
        yield chain


def cube_triangulation(
    cube_origin: Sequence, side, v: Sequence, v_prime: Sequence
) -> SimplicialComplex:
    origin = rational_vector(cube_origin)
    side = Fraction(side)
    v, v_prime = rational_vector(v), rational_vector(v_prime)
    if side <= 0:
        raise ValueError(f"cube side {side} is not positive")
    if not len(origin) == len(v) == len(v_prime):
        raise NotOppositeVertices("dimensions disagree")
    for o, a, b in zip(origin, v, v_prime):
        if {a, b} != {o, o + side}:
            raise NotOppositeVertices(f"{v} and {v_prime} are not opposite corners")

    start, end = sorted([v, v_prime])
    corners = sorted(itertools.product(*[(o, o + side) for o in origin]))
    ids = {c: i for i, c in enumerate(corners)}
    simplices = [[ids[p] for p in chain] for chain in monotone_chains(start, end)]
    return make_complex(len(origin), corners, simplices, check_intersections=False)


def kuhn_triangulation(m: int) -> SimplicialComplex:
    if not 1 <= m <= 7:
        raise DimensionOutOfRange(m)
    zero = (Fraction(0),) * m
    one = (Fraction(1),) * m
    return cube_triangulation(zero, 1, zero, one)


def canonical_rep(p: Sequence, params: "ConstructionParams") -> RationalVector:
    return params.chart.canonical_rep(p)


def is_in_skeleton(point: RationalVector, k: int, which: str) -> bool:
    """Z: at most k non-integer coordinates.

    Zprime: at most k coordinates off the half-integers.
    """
    if which == "Z":
        off = sum(1 for x in point if x.denominator != 1)
    elif which == "Zprime":
        off = sum(1 for x in point if (x - HALF).denominator != 1)
    else:
        raise ValueError(f"unknown skeleton {which}")
    return off <= k


class OrbitComplex(SimplicialComplex):
    """Complex on a lattice quotient whose simplices are orbits of lifted simplices.

    A key is a tuple of (vertex id, lattice shift) pairs sorted by vertex id,
    with the first shift zero. Several keys may share a vertex set, so this
    also covers quotients that are only Delta-complexes.
    """

    def vertex_ids(self, s: Simplex) -> Tuple[int, ...]:
        return tuple(v for v, _ in s)

    def vertex_key(self, v: int) -> Simplex:
        return ((v, (0,) * self.ambient_dim),)

    def subface(self, s: Simplex, positions: Sequence[int]) -> Simplex:
        picked = [s[p] for p in positions]
        base = picked[0][1]
        return tuple(
            (v, tuple(a - b for a, b in zip(shift, base))) for v, shift in picked
        )

    def face(self, s: Simplex, i: int) -> Simplex:
        return self.subface(s, [p for p in range(len(s)) if p != i])

    def relabel(self, s: Simplex, id_map: Dict[int, int]) -> Simplex:
        return tuple((id_map[v], shift) for v, shift in s)

    def _rebuild(self, vertices, top) -> "OrbitComplex":
        return OrbitComplex(self.ambient_dim, vertices, top, self.chart)

    def realize(self, s: Simplex) -> List[RationalVector]:
        points = []
        for v, shift in s:
            g = self.chart.lattice_vector(shift)
            points.append(tuple(x + y for x, y in zip(self.vertices[v], g)))
        return points

    @cached_property
    def _id_of(self) -> Dict[RationalVector, int]:
        return {p: i for i, p in enumerate(self.vertices)}

    def oriented_key(self, points: Sequence[Sequence]) -> Tuple[Simplex, int]:
        """Orbit key of a lifted simplex and the sign of the vertex reordering."""
        return orbit_key(self.chart, self._id_of, [rational_vector(p) for p in points])

    def key_of(self, points: Sequence[Sequence]) -> Simplex:
        return self.oriented_key(points)[0]

    def translate(self, s: Simplex, vector: Sequence) -> Simplex:
        vector = rational_vector(vector)
        return self.key_of(
            [tuple(x + y for x, y in zip(p, vector)) for p in self.realize(s)]
        )

    @cached_property
    def is_simplicial(self) -> bool:
        seen = set()
        for s in self.all_simplices():
            ids = self.vertex_ids(s)
            if ids in seen:
                return False
            seen.add(ids)
        return True


def orbit_key(
    chart: QuotientChart,
    id_of: Dict[RationalVector, int],
    points: Sequence[RationalVector],
) -> Tuple[Simplex, int]:
    entries = []
    for p in points:
        rep = chart.canonical_rep(p)
        shift = chart.coefficients(tuple(a - b for a, b in zip(p, rep)))
        entries.append((id_of[rep], shift))

    order = sorted(range(len(entries)), key=lambda i: entries[i][0])
    ids = [entries[i][0] for i in order]
    if len(set(ids)) != len(ids):
        raise QuotientNotSimplicial(points, "simplex has identified vertices")

    base = entries[order[0]][1]
    key = tuple(
        (entries[i][0], tuple(a - b for a, b in zip(entries[i][1], base)))
        for i in order
    )
    return key, permutation_sign(order)


class QuotientTriangulation(OrbitComplex):
    def __init__(self, params: ConstructionParams, vertices, top):
        super().__init__(params.n, vertices, top, params.chart)
        self.params = params


def fundamental_grid(params: ConstructionParams) -> List[RationalVector]:
    """Canonical representatives of the half-integer points, in sorted order."""
    axes = [[Fraction(j, 2) for j in range(2 * params.L)]] * (params.n - 1)
    axes.append([Fraction(j, 2) for j in range(int(2 * params.chart.height))])
    return [tuple(p) for p in itertools.product(*axes)]


def half_cube_chains(corner: RationalVector) -> List[List[RationalVector]]:
    """Top simplices of the half-cube at corner.

    The half-cube is triangulated by chains between its integer and
    half-integer corners.
    """
    integer = tuple(x if x.denominator == 1 else x + HALF for x in corner)
    other = tuple(x + HALF if x.denominator == 1 else x for x in corner)
    start, end = sorted([integer, other])
    return list(monotone_chains(start, end))


def _process_half_cube(params, id_of, corner):
    chart = params.chart
    chains = half_cube_chains(corner)
    keys = [orbit_key(chart, id_of, chain)[0] for chain in chains]

    restrictions = {}
    for axis in range(params.n):
        for value in (corner[axis], corner[axis] + HALF):
            face_corner = tuple(
                value if j == axis else x for j, x in enumerate(corner)
            )
            face_id = (chart.canonical_rep(face_corner), axis)
            restrictions[face_id] = frozenset(
                orbit_key(chart, id_of, [p for p in chain if p[axis] == value])[0]
                for chain in chains
                if sum(1 for p in chain if p[axis] == value) == params.n
            )
    return keys, restrictions


def triangulate_quotient(
    params: ConstructionParams,
    require_simplicial: bool = False,
    thread_count: int = 1,
    verbose: bool = False,
) -> QuotientTriangulation:
    vertices = fundamental_grid(params)
    id_of = {p: i for i, p in enumerate(vertices)}
    corners = vertices

    def work(corner):
        return _process_half_cube(params, id_of, corner)

    workers = max(1, thread_count)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(
            tqdm.tqdm(
                executor.map(work, corners),
                total=len(corners),
                desc=f"Triangulating half-cubes ({params})",
                disable=not verbose,
            )
        )

    tops = set()
    faces = {}
    for keys, restrictions in results:
        tops.update(keys)
        for face_id, restricted in restrictions.items():
            if faces.setdefault(face_id, restricted) != restricted:
                raise NotAComplex(
                    face_id, "half-cube triangulations disagree on a shared face"
                )

    quotient = QuotientTriangulation(params, vertices, tops)
    if require_simplicial and not quotient.is_simplicial:
        by_ids = {}
        for s in quotient.all_simplices():
            ids = quotient.vertex_ids(s)
            if ids in by_ids:
                raise QuotientNotSimplicial(
                    (by_ids[ids], s), "orbits share a vertex set"
                )
            by_ids[ids] = s
    if verbose:
        print(
            f"Quotient {params}: {len(vertices)} vertices, "
            f"{len(quotient.top)} top simplices",
            flush=True,
        )
    return quotient


def tiling_volume(quotient: QuotientTriangulation) -> Fraction:
    return sum(
        (exact.simplex_volume(quotient.realize(s)) for s in quotient.top), Fraction(0)
    )


def verify_tiling(quotient: QuotientTriangulation) -> bool:
    return tiling_volume(quotient) == quotient.params.group.covolume


def _require_params(quotient: SimplicialComplex, params: ConstructionParams) -> None:
    if getattr(quotient, "params", None) != params:
        raise ParamMismatch(f"complex was not built for {params}")


def skeleton_subcomplex(
    quotient: QuotientTriangulation, params: ConstructionParams, which: str
) -> Subcomplex:
    _require_params(quotient, params)
    if params.group_kind != "Ghat":
        raise SkeletonNotInvariant(
            f"{which} is not invariant under the group of {params}"
        )

    members = []
    for s in quotient.all_simplices():
        points = quotient.realize(s)
        center = tuple(sum(c, Fraction(0)) / len(points) for c in zip(*points))
        if is_in_skeleton(center, params.k, which):
            members.append(s)
    return Subcomplex(quotient, frozenset(members))


def verify_dual_split(
    quotient: QuotientTriangulation, params: ConstructionParams
) -> bool:
    _require_params(quotient, params)
    k = params.k
    for s in quotient.top:
        points = quotient.realize(s)
        in_z = sum(1 for p in points if is_in_skeleton(p, k, "Z"))
        in_zprime = sum(1 for p in points if is_in_skeleton(p, k, "Zprime"))
        if in_z != k + 1 or in_zprime != k + 1:
            return False
    return True


def translation_vertex_map(quotient: OrbitComplex, vector: Sequence) -> Dict[int, int]:
    vector = rational_vector(vector)
    chart = quotient.chart
    return {
        v: quotient._id_of[chart.canonical_rep(tuple(x + y for x, y in zip(p, vector)))]
        for v, p in enumerate(quotient.vertices)
    }


def cubical_cell_count(params: ConstructionParams, i: int) -> int:
    """Number of i-cells of the cubical skeleton Z, by orbit enumeration."""
    if params.group_kind != "Ghat":
        raise ParamMismatch("cubical cell counts are defined for the Ghat quotient")
    if not 0 <= i <= params.k:
        raise IndexOutOfRange(f"cell dimension {i} outside 0..{params.k}")

    chart = params.chart
    box = [range(params.L)] * (params.n - 1) + [range(2 * (2 * params.L + 1))]
    cells = set()
    for base in itertools.product(*box):
        rep = chart.canonical_rep(base)
        for axes in itertools.combinations(range(params.n), i):
            cells.add((rep, axes))
    return len(cells)


def closed_form_cell_count(params: ConstructionParams, i: int) -> int:
    if not 0 <= i <= params.k:
        raise IndexOutOfRange(f"cell dimension {i} outside 0..{params.k}")
    return params.L ** (2 * params.k) * (2 * params.L + 1) * math.comb(params.n, i)


def linear_factor_cell_count(params: ConstructionParams, i: int) -> int:
    """Closed form with the factor L+1 in place of 2L+1.

    Undercounts the orbit enumeration.
    """
    if not 0 <= i <= params.k:
        raise IndexOutOfRange(f"cell dimension {i} outside 0..{params.k}")
    return params.L ** (2 * params.k) * (params.L + 1) * math.comb(params.n, i)


def cubical_euler_characteristic(params: ConstructionParams) -> int:
    return sum((-1) ** i * cubical_cell_count(params, i) for i in range(params.k + 1))


def face_restriction(
    complex: SimplicialComplex, fixed: Dict[int, Fraction]
) -> Set[frozenset]:
    """Simplices lying in the face cut out by fixed coordinates, as point sets."""
    out = set()
    for s in complex.all_simplices():
        points = complex.realize(s)
        if all(p[axis] == value for p in points for axis, value in fixed.items()):
            out.add(frozenset(points))
    return out
