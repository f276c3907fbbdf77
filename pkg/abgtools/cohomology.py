import collections
from dataclasses import dataclass, field
from typing import Dict, Mapping, Sequence

from abgtools.chains import (
    SparseIntegerMatrix,
    check_ring,
    integer_system_solvable,
    z2_in_column_span,
)
from abgtools.complex import Simplex, SimplicialComplex, permutation_sign
from abgtools.errors import (
    AxisOutOfRange,
    DegreeOutOfRange,
    DegreeOverflow,
    NotACocycle,
    ParamMismatch,
    RingMismatch,
    SimplexNotInComplex,
)
from abgtools.lattice import ConstructionParams


@dataclass(frozen=True, eq=False)
class Cocycle:
    complex: SimplicialComplex
    degree: int
    ring: str
    values: Mapping[Simplex, int] = field(default_factory=dict)

    def value(self, s: Simplex) -> int:
        return self.values.get(s, 0)

    def reduce(self) -> "Cocycle":
        """The same cocycle with coefficients taken mod 2."""
        return make_cocycle(self.complex, self.degree, self.values, "Z2")


def _normalize(values: Mapping[Simplex, int], ring: str) -> Dict[Simplex, int]:
    if ring == "Z2":
        return {s: 1 for s, v in values.items() if v % 2}
    return {s: int(v) for s, v in values.items() if v}


def coboundary(
    complex: SimplicialComplex,
    degree: int,
    values: Mapping[Simplex, int],
    ring: str = "Z",
) -> Dict[Simplex, int]:
    out = {}
    for s in complex.simplices(degree + 1):
        total = sum(
            (-1) ** i * values.get(complex.face(s, i), 0) for i in range(degree + 2)
        )
        out[s] = total
    return _normalize(out, ring)


def make_cocycle(
    complex: SimplicialComplex,
    degree: int,
    values: Mapping[Simplex, int],
    ring: str = "Z",
) -> Cocycle:
    check_ring(ring)
    if not 0 <= degree <= complex.dim:
        raise DegreeOutOfRange(f"degree {degree} outside 0..{complex.dim}")
    index = complex.index(degree)
    for s in values:
        if s not in index:
            raise SimplexNotInComplex(s)

    values = _normalize(values, ring)
    delta = coboundary(complex, degree, values, ring)
    if delta:
        raise NotACocycle(min(delta))
    return Cocycle(complex, degree, ring, values)


def unit_cocycle(complex: SimplicialComplex, ring: str = "Z") -> Cocycle:
    values = {complex.vertex_key(v): 1 for v in range(len(complex.vertices))}
    return make_cocycle(complex, 0, values, ring)


def evaluate(c: Cocycle, chain: Mapping[Simplex, int]) -> int:
    total = sum(c.value(s) * n for s, n in chain.items())
    return total % 2 if c.ring == "Z2" else total


def cup_cochains(
    complex: SimplicialComplex,
    first: Mapping[Simplex, int],
    p: int,
    second: Mapping[Simplex, int],
    q: int,
    ring: str = "Z",
) -> Dict[Simplex, int]:
    out = {}
    for s in complex.simplices(p + q):
        front = complex.subface(s, range(p + 1))
        back = complex.subface(s, range(p, p + q + 1))
        a = first.get(front, 0)
        if a:
            out[s] = a * second.get(back, 0)
    return _normalize(out, ring)


def cup_product(complex: SimplicialComplex, factors: Sequence[Cocycle]) -> Cocycle:
    """Alexander-Whitney cup product of cocycles, taken left to right."""
    if not factors:
        raise ValueError("cup product of no factors")
    rings = {f.ring for f in factors}
    if len(rings) > 1:
        raise RingMismatch(f"factors mix coefficient rings {sorted(rings)}")
    if any(f.complex is not complex for f in factors):
        raise ParamMismatch("factors live on a different complex")
    total = sum(f.degree for f in factors)
    if total > complex.dim:
        raise DegreeOverflow(f"total degree {total} exceeds dimension {complex.dim}")

    ring = factors[0].ring
    values, degree = factors[0].values, factors[0].degree
    for f in factors[1:]:
        values = cup_cochains(complex, values, degree, f.values, f.degree, ring)
        degree += f.degree
    return make_cocycle(complex, degree, values, ring)


def coordinate_cocycle(
    x: SimplicialComplex, params: ConstructionParams, axis: int, ring: str = "Z"
) -> Cocycle:
    """Lattice coefficient picked up along each edge when lifting it to R^n."""
    if not 1 <= axis <= 2 * params.k:
        raise AxisOutOfRange(f"axis {axis} outside 1..{2 * params.k}")
    if x.chart is None or x.chart.group != params.group:
        raise ParamMismatch(f"complex is not charted for {params}")

    values = {}
    for e in x.simplices(1):
        lifted = x.realize(e)
        target = x.vertices[x.vertex_ids(e)[1]]
        coeffs = x.chart.coefficients(tuple(a - b for a, b in zip(lifted[1], target)))
        if coeffs[axis - 1]:
            values[e] = coeffs[axis - 1]
    return make_cocycle(x, 1, values, ring)


def _is_coboundary_degree_one(complex: SimplicialComplex, c: Cocycle) -> bool:
    """Integrate along spanning trees and check every edge."""
    modulus = 2 if c.ring == "Z2" else None
    adjacency = collections.defaultdict(list)
    edges = complex.simplices(1)
    for e in edges:
        a, b = complex.vertex_ids(e)
        w = c.value(e)
        adjacency[a].append((b, w))
        adjacency[b].append((a, -w))

    potential = {}
    for start in range(len(complex.vertices)):
        if start in potential:
            continue
        potential[start] = 0
        queue = collections.deque([start])
        while queue:
            a = queue.popleft()
            for b, w in adjacency[a]:
                if b not in potential:
                    potential[b] = potential[a] + w
                    queue.append(b)

    for e in edges:
        a, b = complex.vertex_ids(e)
        diff = potential[b] - potential[a] - c.value(e)
        if (diff % modulus if modulus else diff) != 0:
            return False
    return True


def coboundary_matrix(complex: SimplicialComplex, degree: int) -> SparseIntegerMatrix:
    """Matrix of the coboundary from (degree-1)-cochains to degree-cochains."""
    rows = complex.index(degree)
    cols = complex.index(degree - 1)
    values = collections.defaultdict(int)
    for s, r in rows.items():
        for i in range(degree + 1):
            values[(r, cols[complex.face(s, i)])] += -1 if i % 2 else 1
    return SparseIntegerMatrix.from_dict(len(rows), len(cols), values)


def cohomology_class_is_nonzero(complex: SimplicialComplex, c: Cocycle) -> bool:
    if c.complex is not complex:
        raise ParamMismatch("cocycle lives on a different complex")
    if not c.values:
        return False
    if c.degree == 0:
        return True
    if c.degree == 1:
        return not _is_coboundary_degree_one(complex, c)

    matrix = coboundary_matrix(complex, c.degree)
    index = complex.index(c.degree)
    target = {index[s]: v for s, v in c.values.items()}
    if c.ring == "Z2":
        return not z2_in_column_span(matrix, target)
    return not integer_system_solvable(matrix, target)


def pullback_cocycle(
    c: Cocycle, vertex_map: Mapping[int, int], complex: SimplicialComplex
) -> Cocycle:
    """Pull c back along a simplicial map given on vertex ids."""
    values = {}
    for s in complex.simplices(c.degree):
        image = [vertex_map[v] for v in complex.vertex_ids(s)]
        if len(set(image)) < len(image):
            continue
        order = sorted(range(len(image)), key=image.__getitem__)
        v = c.value(tuple(image[i] for i in order))
        if v:
            values[s] = permutation_sign(order) * v
    return make_cocycle(complex, c.degree, values, c.ring)
