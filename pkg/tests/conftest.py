import pytest

from abgtools.complex import make_complex
from abgtools.lattice import ConstructionParams, triangulate_quotient
from abgtools.report import Pipeline, RunConfig

RP2_TRIANGLES = [
    (0, 1, 2),
    (0, 2, 3),
    (0, 3, 4),
    (0, 4, 5),
    (0, 1, 5),
    (1, 2, 4),
    (2, 3, 5),
    (1, 3, 4),
    (2, 4, 5),
    (1, 3, 5),
]


def moment_curve(count: int, dim: int = 5):
    return [[t**j for j in range(1, dim + 1)] for t in range(1, count + 1)]


def torus_triangles():
    triangles = []
    for i in range(7):
        triangles.append((i, (i + 1) % 7, (i + 3) % 7))
        triangles.append((i, (i + 2) % 7, (i + 3) % 7))
    return triangles


@pytest.fixture
def tetra_boundary():
    coords = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    return make_complex(3, coords, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


@pytest.fixture
def solid_tetra():
    coords = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    return make_complex(3, coords, [(0, 1, 2, 3)])


@pytest.fixture
def rp2():
    return make_complex(5, moment_curve(6), RP2_TRIANGLES)


@pytest.fixture
def torus7():
    return make_complex(5, moment_curve(7), torus_triangles())


@pytest.fixture
def hexagon_fan():
    coords = [[0, 0], [2, 0], [1, 2], [-1, 2], [-2, 0], [-1, -2], [1, -2]]
    triangles = [(0, i, i % 6 + 1) for i in range(1, 7)]
    return make_complex(2, coords, triangles)


@pytest.fixture
def wedge_of_spheres():
    coords = [
        [0, 0, 0],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [-1, 0, 0],
        [0, -1, 0],
        [0, 0, -1],
    ]
    triangles = [
        (0, 1, 2),
        (0, 1, 3),
        (0, 2, 3),
        (1, 2, 3),
        (0, 4, 5),
        (0, 4, 6),
        (0, 5, 6),
        (4, 5, 6),
    ]
    return make_complex(3, coords, triangles)


@pytest.fixture(scope="session")
def ghat_quotient():
    return triangulate_quotient(ConstructionParams(1, 1, "Ghat"))


@pytest.fixture(scope="session")
def g_quotient():
    return triangulate_quotient(ConstructionParams(1, 1, "G"))


@pytest.fixture(scope="session")
def g_pipeline():
    return Pipeline(RunConfig(1, 1, "G", thread_count=1), verbose=False)


@pytest.fixture(scope="session")
def ghat_pipeline():
    return Pipeline(RunConfig(1, 1, "Ghat", thread_count=1), verbose=False)


@pytest.fixture(scope="session")
def g2_pipeline():
    return Pipeline(RunConfig(1, 2, "G", thread_count=1), verbose=False)
