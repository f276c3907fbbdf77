import collections
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from abgtools.complex import (
    Simplex,
    SimplicialComplex,
    verify_closed_pseudomanifold,
)
from abgtools.errors import NotPseudomanifold


@dataclass
class OrientationData:
    orientable: bool
    facet_signs: Optional[Dict[Simplex, int]]
    character: Dict[Simplex, int]

    @property
    def reversing_ridges(self) -> int:
        return sum(1 for v in self.character.values() if v == -1)

    def to_dict(self) -> dict:
        return {
            "orientable": self.orientable,
            "non_tree_ridges": len(self.character),
            "reversing_ridges": self.reversing_ridges,
        }


def _ridge_pairs(complex: SimplicialComplex) -> Dict[Simplex, list]:
    report = verify_closed_pseudomanifold(complex, complex.dim)
    if not (report.pure and report.ridges_ok):
        raise NotPseudomanifold(report.failures)

    ridges = collections.defaultdict(list)
    for f in complex.top:
        for i in range(len(f)):
            ridges[complex.face(f, i)].append((f, i))
    return ridges


def _coherent_sign(sign: int, i: int, j: int) -> int:
    return -sign * (-1) ** (i + j)


def orientation_character(complex: SimplicialComplex) -> OrientationData:
    """Propagate facet signs along a spanning tree of the facet adjacency graph.

    Facets f and g sharing the ridge face_i(f) = face_j(g) are coherent when
    sign(g) = -sign(f) * (-1)^(i+j). The character records, for every ridge
    off the tree, whether the propagated signs agree across it.
    """
    ridges = _ridge_pairs(complex)
    neighbors = collections.defaultdict(list)
    for ridge, ((f, i), (g, j)) in ridges.items():
        neighbors[f].append((ridge, g, i, j))
        neighbors[g].append((ridge, f, j, i))

    signs = {}
    tree = set()
    for start in complex.top:
        if start in signs:
            continue
        signs[start] = 1
        queue = collections.deque([start])
        while queue:
            f = queue.popleft()
            for ridge, g, i, j in neighbors[f]:
                if g not in signs:
                    signs[g] = _coherent_sign(signs[f], i, j)
                    tree.add(ridge)
                    queue.append(g)

    character = {}
    for ridge, ((f, i), (g, j)) in ridges.items():
        if ridge not in tree:
            character[ridge] = 1 if signs[g] == _coherent_sign(signs[f], i, j) else -1

    orientable = all(v == 1 for v in character.values())
    return OrientationData(orientable, signs if orientable else None, character)


def fundamental_class(
    complex: SimplicialComplex, ring: str = "Z"
) -> Dict[Simplex, int]:
    if ring == "Z2":
        return {f: 1 for f in complex.top}
    data = orientation_character(complex)
    if not data.orientable:
        raise NotPseudomanifold(
            ["no integral fundamental class on a non-orientable complex"]
        )
    return dict(data.facet_signs)


def double_cover_labels(
    complex: SimplicialComplex,
) -> Tuple[SimplicialComplex, Dict[int, int], Dict[Tuple[int, Simplex, int], int]]:
    """Orientation double cover, with the cover vertex of each (vertex, facet, sign)."""
    ridges = _ridge_pairs(complex)

    nodes = {}
    for f in complex.top:
        for v in complex.vertex_ids(f):
            for o in (1, -1):
                nodes[(v, f, o)] = len(nodes)

    rows, cols = [], []
    for ridge, ((f, i), (g, j)) in ridges.items():
        for o in (1, -1):
            o_g = _coherent_sign(o, i, j)
            for v in complex.vertex_ids(ridge):
                rows.append(nodes[(v, f, o)])
                cols.append(nodes[(v, g, o_g)])
    graph = scipy.sparse.coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)),
        shape=(len(nodes), len(nodes)),
    )
    _, component = scipy.sparse.csgraph.connected_components(graph, directed=False)

    sheets = collections.defaultdict(dict)
    for (v, f, o), node in nodes.items():
        seen = sheets[v]
        seen.setdefault(int(component[node]), len(seen))

    cover_vertices = []
    cover_id = {}
    covering_map = {}
    for v in sorted(sheets):
        for comp, sheet in sorted(sheets[v].items(), key=lambda item: item[1]):
            cover_id[(v, comp)] = len(cover_vertices)
            covering_map[len(cover_vertices)] = v
            cover_vertices.append(complex.vertices[v] + (Fraction(sheet),))

    label = {
        (v, f, o): cover_id[(v, int(component[node]))]
        for (v, f, o), node in nodes.items()
    }
    tops = [
        tuple(sorted(label[(v, f, o)] for v in complex.vertex_ids(f)))
        for f in complex.top
        for o in (1, -1)
    ]
    cover = SimplicialComplex(complex.ambient_dim + 1, cover_vertices, tops)
    return cover, covering_map, label


def orientation_double_cover(
    complex: SimplicialComplex,
) -> Tuple[SimplicialComplex, Dict[int, int]]:
    cover, covering_map, _ = double_cover_labels(complex)
    return cover, covering_map
