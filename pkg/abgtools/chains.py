import collections
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse

from abgtools.complex import SimplicialComplex
from abgtools.errors import DegreeOutOfRange, SmithFormMismatch

RINGS = ("Z", "Z2")
TRANSFORM_CHECK_LIMIT = 200


def check_ring(ring: str) -> None:
    if ring not in RINGS:
        raise ValueError(f"ring must be one of {RINGS}, got {ring}")


@dataclass(frozen=True)
class SparseIntegerMatrix:
    rows: int
    cols: int
    entries: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        positions = [(r, c) for r, c, _ in self.entries]
        if positions != sorted(set(positions)):
            raise ValueError("entries must be sorted with unique positions")
        for r, c, v in self.entries:
            if v == 0:
                raise ValueError(f"explicit zero at {(r, c)}")
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry {(r, c)} outside {self.rows}x{self.cols}")

    @classmethod
    def from_dict(cls, rows: int, cols: int, values: Mapping[Tuple[int, int], int]):
        entries = tuple(
            (r, c, int(v)) for (r, c), v in sorted(values.items()) if v != 0
        )
        return cls(rows, cols, entries)

    @classmethod
    def from_dense(cls, array) -> "SparseIntegerMatrix":
        array = np.asarray(array, dtype=object)
        if array.ndim != 2:
            raise ValueError("expected a two-dimensional array")
        rows, cols = array.shape
        values = {(r, c): int(array[r, c]) for r in range(rows) for c in range(cols)}
        return cls.from_dict(rows, cols, values)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_scipy(self) -> scipy.sparse.csr_matrix:
        data = [v for _, _, v in self.entries]
        rows = [r for r, _, _ in self.entries]
        cols = [c for _, c, _ in self.entries]
        return scipy.sparse.csr_matrix(
            (np.array(data, dtype=np.int64), (rows, cols)), shape=(self.rows, self.cols)
        )

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols), dtype=object)
        for r, c, v in self.entries:
            dense[r, c] = v
        return dense

    def row_dicts(self) -> Dict[int, Dict[int, int]]:
        out = collections.defaultdict(dict)
        for r, c, v in self.entries:
            out[r][c] = v
        return out

    def transpose(self) -> "SparseIntegerMatrix":
        return SparseIntegerMatrix.from_dict(
            self.cols, self.rows, {(c, r): v for r, c, v in self.entries}
        )


def chain_boundary_matrix(
    complex: SimplicialComplex, d: int, ring: str = "Z"
) -> SparseIntegerMatrix:
    check_ring(ring)
    if not 1 <= d <= complex.dim:
        raise DegreeOutOfRange(f"boundary degree {d} outside 1..{complex.dim}")

    rows = complex.index(d - 1)
    columns = complex.simplices(d)
    values = collections.defaultdict(int)
    for c, s in enumerate(columns):
        for i in range(d + 1):
            values[(rows[complex.face(s, i)], c)] += -1 if i % 2 else 1
    if ring == "Z2":
        values = {pos: v % 2 for pos, v in values.items()}
    return SparseIntegerMatrix.from_dict(len(rows), len(columns), values)


def boundary_squared_vanishes(complex: SimplicialComplex) -> bool:
    for d in range(2, complex.dim + 1):
        lower = chain_boundary_matrix(complex, d - 1).to_scipy()
        upper = chain_boundary_matrix(complex, d).to_scipy()
        product = lower @ upper
        if product.count_nonzero():
            return False
    return True


def eliminate_unit_pivots(
    rows: Dict[int, Dict[int, int]], protected: Optional[int] = None
) -> int:
    """Pivot on entries of absolute value one, removing pivot rows and columns in place.

    Each pivot contributes an invariant factor 1. Columns equal to protected
    are updated but never chosen as pivots. Returns the number of pivots.
    """
    columns = collections.defaultdict(set)
    for r, row in rows.items():
        for c in row:
            columns[c].add(r)

    pivots = 0
    progress = True
    while progress:
        progress = False
        for r in sorted(rows, key=lambda r: (len(rows[r]), r)):
            if r not in rows:
                continue
            row = rows[r]
            units = [c for c, v in row.items() if v in (1, -1) and c != protected]
            if not units:
                continue
            c = min(units, key=lambda c: (len(columns[c]), c))
            _pivot(rows, columns, r, c)
            pivots += 1
            progress = True
    return pivots


def _pivot(rows, columns, r, c) -> None:
    pivot_row = rows.pop(r)
    unit = pivot_row[c]
    for other in list(columns[c]):
        if other == r:
            continue
        row = rows[other]
        factor = row[c] * unit
        for cc, v in pivot_row.items():
            updated = row.get(cc, 0) - factor * v
            if updated:
                row[cc] = updated
                columns[cc].add(other)
            else:
                row.pop(cc, None)
                columns[cc].discard(other)
        if not row:
            del rows[other]
    for cc in pivot_row:
        columns[cc].discard(r)
    columns.pop(c, None)


def _dense_core(rows: Dict[int, Dict[int, int]]) -> np.ndarray:
    row_ids = sorted(r for r, row in rows.items() if row)
    col_ids = sorted({c for r in row_ids for c in rows[r]})
    col_index = {c: j for j, c in enumerate(col_ids)}
    dense = np.zeros((len(row_ids), len(col_ids)), dtype=object)
    for i, r in enumerate(row_ids):
        for c, v in rows[r].items():
            dense[i, col_index[c]] = v
    return dense


def _swap_rows(a: np.ndarray, i: int, j: int) -> None:
    if i != j:
        a[[i, j]] = a[[j, i]]


def _swap_cols(a: np.ndarray, i: int, j: int) -> None:
    if i != j:
        a[:, [i, j]] = a[:, [j, i]]


def _move_smallest(a, p, q, t, line_only=False) -> bool:
    rows, cols = a.shape
    if line_only:
        candidates = [(abs(a[i, t]), i, t) for i in range(t, rows) if a[i, t] != 0]
        candidates += [(abs(a[t, j]), t, j) for j in range(t + 1, cols) if a[t, j] != 0]
    else:
        candidates = [
            (abs(a[i, j]), i, j)
            for i in range(t, rows)
            for j in range(t, cols)
            if a[i, j] != 0
        ]
    if not candidates:
        return False

    _, i, j = min(candidates)
    _swap_rows(a, t, i)
    _swap_rows(p, t, i)
    _swap_cols(a, t, j)
    _swap_cols(q, t, j)
    return True


def smith_form(matrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form S of an integer matrix A.

    Also returns unimodular P and Q with P A Q = S.
    """
    a = np.array(matrix, dtype=object).copy()
    if a.ndim != 2:
        raise ValueError("expected a two-dimensional array")
    rows, cols = a.shape
    p = np.eye(rows, dtype=int).astype(object)
    q = np.eye(cols, dtype=int).astype(object)

    for t in range(min(rows, cols)):
        if not _move_smallest(a, p, q, t):
            break
        while True:
            pivot = a[t, t]
            changed = False
            for i in range(t + 1, rows):
                if a[i, t] != 0:
                    factor = a[i, t] // pivot
                    a[i] = a[i] - factor * a[t]
                    p[i] = p[i] - factor * p[t]
                    changed = changed or a[i, t] != 0
            for j in range(t + 1, cols):
                if a[t, j] != 0:
                    factor = a[t, j] // pivot
                    a[:, j] = a[:, j] - factor * a[:, t]
                    q[:, j] = q[:, j] - factor * q[:, t]
                    changed = changed or a[t, j] != 0
            if changed:
                _move_smallest(a, p, q, t, line_only=True)
                continue

            block = a[t + 1 :, t + 1 :]
            bad = np.argwhere(block % pivot != 0) if block.size else []
            if len(bad) == 0:
                break
            i = t + 1 + int(bad[0][0])
            a[t] = a[t] + a[i]
            p[t] = p[t] + p[i]

        if a[t, t] < 0:
            a[t] = -a[t]
            p[t] = -p[t]
    return a, p, q


def diagonal_factors(s: np.ndarray) -> List[int]:
    return [int(s[i, i]) for i in range(min(s.shape)) if s[i, i] != 0]


def normalize_divisibility(values: List[int]) -> List[int]:
    """Rewrite diagonal entries as the equivalent divisibility chain."""
    ones = sum(1 for v in values if abs(v) == 1)
    rest = sorted(abs(v) for v in values if abs(v) > 1)
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            g = math.gcd(rest[i], rest[j])
            rest[i], rest[j] = g, rest[i] * rest[j] // g
    return [1] * ones + rest


def smith_normal_form(
    m: SparseIntegerMatrix, verify: Optional[bool] = None
) -> Tuple[Tuple[int, ...], int]:
    """Nonzero invariant factors of m in divisibility order, and its rank."""
    rows = m.row_dicts()
    units = eliminate_unit_pivots(rows)
    core = _dense_core(rows)
    core_factors = diagonal_factors(smith_form(core)[0]) if core.size else []
    factors = tuple(normalize_divisibility([1] * units + core_factors))

    if verify is None:
        verify = m.rows < TRANSFORM_CHECK_LIMIT and m.cols < TRANSFORM_CHECK_LIMIT
    if verify:
        dense = m.to_dense()
        s, p, q = smith_form(dense)
        if not np.array_equal(p.dot(dense).dot(q), s):
            raise SmithFormMismatch("transforms do not reproduce the diagonal form")
        if tuple(diagonal_factors(s)) != factors:
            raise SmithFormMismatch(
                f"sparse reduction gave {factors}, "
                f"dense form gave {diagonal_factors(s)}"
            )
    return factors, len(factors)


def z2_rank(m: SparseIntegerMatrix) -> int:
    columns = collections.defaultdict(int)
    for r, c, v in m.entries:
        if v % 2:
            columns[c] ^= 1 << r
    return len(_z2_basis(columns.values()))


def _z2_basis(vectors) -> Dict[int, int]:
    pivots = {}
    for vec in vectors:
        vec = _z2_reduce(vec, pivots)
        if vec:
            pivots[vec.bit_length() - 1] = vec
    return pivots


def _z2_reduce(vec: int, pivots: Dict[int, int]) -> int:
    while vec:
        top = vec.bit_length() - 1
        if top not in pivots:
            break
        vec ^= pivots[top]
    return vec


def z2_in_column_span(m: SparseIntegerMatrix, target: Mapping[int, int]) -> bool:
    columns = collections.defaultdict(int)
    for r, c, v in m.entries:
        if v % 2:
            columns[c] ^= 1 << r
    vec = 0
    for r, v in target.items():
        if v % 2:
            vec ^= 1 << r
    return _z2_reduce(vec, _z2_basis(columns.values())) == 0


def integer_system_solvable(m: SparseIntegerMatrix, target: Mapping[int, int]) -> bool:
    """Whether m x = target has an integer solution."""
    rows = m.row_dicts()
    extra = m.cols
    for r, v in target.items():
        if v:
            rows[r][extra] = int(v)
    eliminate_unit_pivots(rows, protected=extra)

    rhs_only = [r for r, row in rows.items() if set(row) == {extra}]
    if rhs_only:
        return False

    row_ids = sorted(r for r, row in rows.items() if row)
    if not row_ids:
        return True
    col_ids = sorted({c for r in row_ids for c in rows[r] if c != extra})
    col_index = {c: j for j, c in enumerate(col_ids)}
    dense = np.zeros((len(row_ids), len(col_ids)), dtype=object)
    b = np.zeros(len(row_ids), dtype=object)
    for i, r in enumerate(row_ids):
        for c, v in rows[r].items():
            if c == extra:
                b[i] = v
            else:
                dense[i, col_index[c]] = v

    s, p, _ = smith_form(dense)
    transformed = p.dot(b)
    for i in range(len(row_ids)):
        pivot = s[i, i] if i < min(s.shape) else 0
        if pivot == 0:
            if transformed[i] != 0:
                return False
        elif transformed[i] % pivot != 0:
            return False
    return True


@dataclass(frozen=True)
class HomologyDescriptor:
    degree: int
    betti: int
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.betti < 0:
            raise ValueError("negative betti number")
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion coefficients must be at least 2")
        if any(b % a for a, b in zip(self.torsion, self.torsion[1:])):
            raise ValueError("torsion coefficients must form a divisibility chain")

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "betti": self.betti,
            "torsion": list(self.torsion),
        }

    def __str__(self) -> str:
        parts = []
        if self.betti:
            parts.append("Z" if self.betti == 1 else f"Z^{self.betti}")
        parts += [f"Z{t}" for t in self.torsion]
        return " + ".join(parts) or "0"


def _boundary_invariants(
    complex: SimplicialComplex, d: int, ring: str
) -> Tuple[int, Tuple[int, ...]]:
    if d < 1 or d > complex.dim:
        return 0, ()
    if ring == "Z2":
        return z2_rank(chain_boundary_matrix(complex, d, "Z2")), ()
    factors, rank = smith_normal_form(chain_boundary_matrix(complex, d))
    return rank, tuple(f for f in factors if f > 1)


def homology_all(
    complex: SimplicialComplex, max_dim: Optional[int] = None, ring: str = "Z"
) -> List[HomologyDescriptor]:
    check_ring(ring)
    top = complex.dim if max_dim is None else max_dim
    if top < 0 or top > max(complex.dim, 0):
        raise DegreeOutOfRange(f"degree {top} outside 0..{complex.dim}")

    invariants = {d: _boundary_invariants(complex, d, ring) for d in range(1, top + 2)}
    groups = []
    for d in range(top + 1):
        rank_d = invariants.get(d, (0, ()))[0]
        rank_up, torsion = invariants[d + 1]
        n_d = len(complex.simplices(d))
        groups.append(HomologyDescriptor(d, n_d - rank_d - rank_up, torsion))
    return groups


def homology(complex: SimplicialComplex, d: int, ring: str = "Z") -> HomologyDescriptor:
    check_ring(ring)
    if d < 0 or d > max(complex.dim, 0):
        raise DegreeOutOfRange(f"degree {d} outside 0..{complex.dim}")
    rank_d = _boundary_invariants(complex, d, ring)[0]
    rank_up, torsion = _boundary_invariants(complex, d + 1, ring)
    return HomologyDescriptor(d, len(complex.simplices(d)) - rank_d - rank_up, torsion)
