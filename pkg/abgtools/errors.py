class AbgError(Exception):
    pass


class ComplexError(AbgError):
    pass


class DegenerateSimplex(ComplexError):
    def __init__(self, simplex, message: str = "affinely dependent vertices"):
        super().__init__(f"{message}: {simplex}")
        self.simplex = simplex


class NotAComplex(ComplexError):
    def __init__(self, pair, message: str = "simplices meet outside a common face"):
        super().__init__(f"{message}: {pair}")
        self.pair = pair


class DuplicateVertexCoordinates(ComplexError):
    def __init__(self, coords):
        super().__init__(f"duplicate vertex coordinates: {coords}")
        self.coords = coords


class SimplexNotInComplex(ComplexError):
    def __init__(self, simplex):
        super().__init__(f"simplex not in complex: {simplex}")
        self.simplex = simplex


class BarycenterCollision(ComplexError):
    def __init__(self, first, second):
        super().__init__(f"simplices share a barycenter: {first}, {second}")
        self.simplices = (first, second)


class NotPure(ComplexError):
    def __init__(self, dims):
        super().__init__(f"maximal simplices have dimensions {sorted(dims)}")
        self.dims = dims


class NotPseudomanifold(ComplexError):
    def __init__(self, failures):
        super().__init__("; ".join(failures) or "not a closed pseudomanifold")
        self.failures = failures


class LatticeError(AbgError):
    pass


class InvalidParams(LatticeError):
    pass


class DimensionOutOfRange(LatticeError):
    def __init__(self, m: int):
        super().__init__(f"cube dimension {m} outside 1..7")
        self.m = m


class NotOppositeVertices(LatticeError):
    pass


class QuotientNotSimplicial(LatticeError):
    def __init__(self, orbit, message: str = "quotient is not simplicial"):
        super().__init__(f"{message}: {orbit}")
        self.orbit = orbit


class ParamMismatch(LatticeError):
    pass


class IndexOutOfRange(LatticeError):
    pass


class SkeletonNotInvariant(LatticeError):
    pass


class NeighborhoodError(AbgError):
    pass


class SkeletonNotFull(NeighborhoodError):
    pass


class BoundariesDiffer(NeighborhoodError):
    def __init__(self, only_z, only_zprime):
        super().__init__(
            f"boundaries differ: {len(only_z)} ridges only in N(Z), "
            f"{len(only_zprime)} only in N(Z')"
        )
        self.only_z = only_z
        self.only_zprime = only_zprime


class InvariantError(AbgError):
    pass


class DegreeOutOfRange(InvariantError):
    pass


class AxisOutOfRange(InvariantError):
    pass


class NotACocycle(InvariantError):
    def __init__(self, simplex):
        super().__init__(f"coboundary is nonzero on {simplex}")
        self.simplex = simplex


class RingMismatch(InvariantError):
    pass


class DegreeOverflow(InvariantError):
    pass


class SmithFormMismatch(InvariantError):
    pass


class EndpointsOnSurface(InvariantError):
    pass


class PerturbationExhausted(InvariantError):
    pass


class ReportError(AbgError):
    pass


class ParseError(ReportError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatVersionUnsupported(ReportError):
    pass


class UnknownCheck(ReportError):
    def __init__(self, names):
        super().__init__(f"unknown checks: {', '.join(sorted(names))}")
        self.names = names
