import hashlib
import json
import os
import pathlib
import re
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from abgtools.complex import SimplicialComplex, make_complex
from abgtools.errors import FormatVersionUnsupported, ParseError, QuotientNotSimplicial

SCX_VERSION = "1"
THREADS_ENV = "ABG_THREADS"

_FRACTION = re.compile(r"^-?\d+/\d+$")


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(token: str, line: int) -> Fraction:
    if not _FRACTION.match(token):
        raise ParseError(line, f"coordinate {token!r} is not of the form p/q")
    try:
        value = Fraction(token)
    except ZeroDivisionError:
        raise ParseError(line, f"coordinate {token!r} has zero denominator") from None
    if format_fraction(value) != token:
        raise ParseError(line, f"coordinate {token!r} is not in lowest terms")
    return value


def _simplex_lines(complex: SimplicialComplex):
    if getattr(complex, "is_simplicial", True) is False:
        raise QuotientNotSimplicial(None, "a Delta-complex has no simplex-list form")
    rows = sorted(complex.vertex_ids(s) for s in complex.top)
    return [" ".join(str(v) for v in ids) for ids in rows]


def format_scx(complex: SimplicialComplex) -> str:
    simplex_lines = _simplex_lines(complex)
    lines = [
        f"scx {SCX_VERSION} {complex.ambient_dim} "
        f"{len(complex.vertices)} {len(simplex_lines)}"
    ]
    lines += [" ".join(format_fraction(x) for x in p) for p in complex.vertices]
    lines += simplex_lines
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line: int, what: str) -> int:
    if not re.match(r"^\d+$", token):
        raise ParseError(line, f"{what} {token!r} is not a non-negative integer")
    return int(token)


def parse_scx(
    text: str, chart=None, check_intersections: Optional[bool] = None
) -> SimplicialComplex:
    if not text.endswith("\n"):
        raise ParseError(text.count("\n") + 1, "missing final newline")
    lines = text[:-1].split("\n")

    header = lines[0].split(" ")
    if len(header) != 5 or header[0] != "scx":
        raise ParseError(1, "header must read 'scx VERSION DIM NV NT'")
    if header[1] != SCX_VERSION:
        raise FormatVersionUnsupported(f"format version {header[1]} is not supported")
    dim, n_vertices, n_simplices = (
        _parse_int(token, 1, name)
        for token, name in zip(header[2:], ("DIM", "NV", "NT"))
    )
    if len(lines) != 1 + n_vertices + n_simplices:
        raise ParseError(
            len(lines),
            f"expected {1 + n_vertices + n_simplices} lines, found {len(lines)}",
        )

    vertices = []
    for lineno, line in enumerate(lines[1 : 1 + n_vertices], start=2):
        tokens = line.split(" ")
        if len(tokens) != dim:
            raise ParseError(lineno, f"expected {dim} coordinates")
        point = tuple(parse_fraction(token, lineno) for token in tokens)
        if vertices and point <= vertices[-1]:
            raise ParseError(lineno, "vertex lines are not strictly sorted")
        vertices.append(point)

    simplices = []
    for lineno, line in enumerate(lines[1 + n_vertices :], start=2 + n_vertices):
        ids = [_parse_int(token, lineno, "vertex id") for token in line.split(" ")]
        if any(v >= n_vertices for v in ids):
            raise ParseError(lineno, "vertex id out of range")
        if ids != sorted(set(ids)):
            raise ParseError(lineno, "vertex ids are not strictly increasing")
        if simplices and ids <= simplices[-1]:
            raise ParseError(lineno, "simplex lines are not strictly sorted")
        simplices.append(ids)

    return make_complex(
        dim, vertices, simplices, chart=chart, check_intersections=check_intersections
    )


def read_scx(
    path: os.PathLike, chart=None, check_intersections: Optional[bool] = None
) -> SimplicialComplex:
    text = pathlib.Path(path).read_text(encoding="utf-8")
    return parse_scx(text, chart=chart, check_intersections=check_intersections)


def write_scx(path: os.PathLike, complex: SimplicialComplex) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_scx(complex))
    return path


def _json_default(value: Any):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, pathlib.Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(value: Any) -> str:
    return (
        json.dumps(
            value,
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
            default=_json_default,
        )
        + "\n"
    )


def file_digest(path: os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def resolve_thread_count(thread_count: Optional[Any] = "auto") -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        thread_count = env
    if thread_count in (None, "auto"):
        return os.cpu_count() or 1
    count = int(thread_count)
    if count < 1:
        raise ValueError(f"thread count must be positive, got {count}")
    return count
