from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from abgtools import exact
from abgtools.complex import (
    RationalVector,
    SimplicialComplex,
    boxes_overlap,
    rational_vector,
)
from abgtools.errors import EndpointsOnSurface, ParamMismatch, PerturbationExhausted
from abgtools.lattice import ConstructionParams

PERTURBATION_LEVELS = range(10, 33)

Facet = Tuple[List[RationalVector], Tuple[RationalVector, RationalVector]]


def _lifted_facets(x: SimplicialComplex) -> List[Facet]:
    facets = []
    for f in x.top:
        points = x.realize(f)
        box = (tuple(map(min, zip(*points))), tuple(map(max, zip(*points))))
        facets.append((points, box))
    return facets


def _candidates(facets: List[Facet], chart, lo, hi) -> Iterable[List[RationalVector]]:
    for points, (box_lo, box_hi) in facets:
        if chart is None:
            if boxes_overlap((box_lo, box_hi), (lo, hi)):
                yield points
            continue
        for g in chart.translates_meeting(box_lo, box_hi, lo, hi):
            yield [tuple(a + b for a, b in zip(p, g)) for p in points]


def _on_facet(points: List[RationalVector], x: RationalVector) -> bool:
    base = points[0]
    columns = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    rows = [list(r) for r in zip(*columns)]
    betas = exact.solve_unique(rows, [a - b for a, b in zip(x, base)])
    if betas is None:
        return False
    return all(b >= 0 for b in betas) and sum(betas) <= 1


def _hit(
    points: List[RationalVector], p: RationalVector, direction: RationalVector
) -> Optional[int]:
    """1 for a transverse interior crossing, 0 for a miss, None when degenerate."""
    base = points[0]
    columns = [[a - b for a, b in zip(q, base)] for q in points[1:]]
    columns.append([-d for d in direction])
    rows = [list(r) for r in zip(*columns)]
    offset = [a - b for a, b in zip(p, base)]

    solution = exact.solve_unique(rows, offset)
    if solution is None:
        coplanar = exact.rank(columns[:-1] + [offset]) == len(columns) - 1
        return None if coplanar else 0

    betas, t = solution[:-1], solution[-1]
    weights = [1 - sum(betas)] + betas
    if t < 0 or t > 1 or any(w < 0 for w in weights):
        return 0
    if t == 0 or t == 1 or any(w == 0 for w in weights):
        return None
    return 1


def _segment_box(p: RationalVector, q: RationalVector):
    return tuple(map(min, p, q)), tuple(map(max, p, q))


def _crossing_parity(facets, chart, p, q) -> Optional[int]:
    direction = tuple(b - a for a, b in zip(p, q))
    lo, hi = _segment_box(p, q)
    count = 0
    for points in _candidates(facets, chart, lo, hi):
        hit = _hit(points, p, direction)
        if hit is None:
            return None
        count += hit
    return count % 2


def _perturb(p: RationalVector, level: int) -> RationalVector:
    eps = Fraction(1, 2**level)
    return tuple(x + eps ** (i + 1) for i, x in enumerate(p))


def _prepare(x: SimplicialComplex, params: Optional[ConstructionParams], segment):
    if x.dim != x.ambient_dim - 1:
        raise ValueError("intersection parity needs a codimension-one complex")
    chart = x.chart
    if chart is not None and (params is None or chart.group != params.group):
        raise ParamMismatch("complex chart does not match the construction parameters")

    p, q = (rational_vector(e) for e in segment)
    facets = _lifted_facets(x)
    for end in (p, q):
        nearby = _candidates(facets, chart, end, end)
        if any(_on_facet(points, end) for points in nearby):
            raise EndpointsOnSurface(f"segment endpoint {end} lies on the complex")
    return facets, chart, p, q


def perturbed_parities(
    x: SimplicialComplex,
    params: Optional[ConstructionParams],
    segment: Sequence[Sequence],
    levels: Iterable[int] = PERTURBATION_LEVELS,
) -> Dict[int, Optional[int]]:
    """Crossing parity per perturbation level, None where still degenerate."""
    facets, chart, p, q = _prepare(x, params, segment)
    return {
        level: _crossing_parity(facets, chart, _perturb(p, level), _perturb(q, level))
        for level in levels
    }


def mod2_segment_intersection(
    x: SimplicialComplex,
    params: Optional[ConstructionParams],
    segment: Sequence[Sequence],
) -> int:
    facets, chart, p, q = _prepare(x, params, segment)
    parity = _crossing_parity(facets, chart, p, q)
    if parity is not None:
        return parity

    for level in PERTURBATION_LEVELS:
        parity = _crossing_parity(facets, chart, _perturb(p, level), _perturb(q, level))
        if parity is not None:
            return parity
    raise PerturbationExhausted(
        f"segment stays degenerate after {len(PERTURBATION_LEVELS)} perturbation levels"
    )
