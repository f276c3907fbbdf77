import os
import pathlib
import sys
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple

import fire
import numpy as np
import pandas as pd

from abgtools import __version__
from abgtools.chains import homology_all
from abgtools.cohomology import (
    cohomology_class_is_nonzero,
    coordinate_cocycle,
    cup_product,
    pullback_cocycle,
)
from abgtools.complex import (
    SimplicialComplex,
    barycentric_subdivision,
    euler_characteristic,
    is_full_subcomplex,
    verify_closed_pseudomanifold,
    vertex_link_homology_check,
)
from abgtools.errors import AbgError, UnknownCheck
from abgtools.intersection import mod2_segment_intersection
from abgtools.lattice import (
    ConstructionParams,
    closed_form_cell_count,
    cubical_cell_count,
    cubical_euler_characteristic,
    linear_factor_cell_count,
    parse_params,
    tiling_volume,
    triangulate_quotient,
    verify_dual_split,
)
from abgtools.neighborhood import (
    build_neighborhoods,
    complex_facet_points,
    cover_boundary,
    cover_projection,
    direct_X,
    double_cover_matches,
    extract_cover_X,
    neighborhood_euler,
    neighborhoods_cover,
    neighborhoods_meet_in_boundary,
    push_forward_X,
    upstairs_X_facets,
    x_avoids_skeleta,
)
from abgtools.orientation import orientation_character
from abgtools.utils import (
    canonical_json,
    file_digest,
    read_scx,
    resolve_thread_count,
    write_scx,
)

CHECK_REGISTRY = (
    "build",
    "fullness",
    "dual-split",
    "boundary-eq",
    "x-direct-eq",
    "upstairs-eq",
    "pseudomanifold",
    "links",
    "orientation",
    "double-cover-iso",
    "euler",
    "homology",
    "cocycle-h1",
    "cup-degree",
    "mod2-degree",
)
LARGE_K_CHECKS = (
    "build",
    "fullness",
    "dual-split",
    "boundary-eq",
    "x-direct-eq",
    "pseudomanifold",
    "orientation",
    "euler",
)
FILE_CHECKS = (
    "pseudomanifold",
    "links",
    "orientation",
    "euler",
    "homology",
    "cocycle-h1",
    "cup-degree",
    "mod2-degree",
)


def default_checks(k: int) -> Tuple[str, ...]:
    return CHECK_REGISTRY if k == 1 else LARGE_K_CHECKS


def parse_checks(checks, k: int = 1) -> Tuple[str, ...]:
    if checks is None:
        return default_checks(k)
    if isinstance(checks, str):
        if checks == "all":
            return CHECK_REGISTRY
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    checks = list(checks)
    unknown = set(checks) - set(CHECK_REGISTRY)
    if unknown:
        raise UnknownCheck(unknown)
    return tuple(c for c in CHECK_REGISTRY if c in checks)


@dataclass
class RunConfig:
    k: int = 1
    L: int = 1
    group_kind: str = "G"
    checks: Optional[Iterable[str]] = None
    homology_max_dim: Optional[int] = None
    output_dir: Optional[os.PathLike] = None
    thread_count: Optional[int | str] = "auto"
    link_sample: int = 50
    write_neighborhoods: bool = False

    def __post_init__(self):
        self.params = ConstructionParams(self.k, self.L, self.group_kind)
        self.checks = parse_checks(self.checks, self.k)
        if self.homology_max_dim is None:
            self.homology_max_dim = 2 * self.k
        self.thread_count = resolve_thread_count(self.thread_count)
        if self.output_dir is not None:
            self.output_dir = pathlib.Path(self.output_dir)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "L": self.L,
            "group_kind": self.group_kind,
            "checks": list(self.checks),
            "homology_max_dim": self.homology_max_dim,
            "link_sample": self.link_sample,
        }


def _passed(flag: bool) -> str:
    return "pass" if flag else "fail"


class Pipeline:
    """Lazily built artifacts of one construction and the checks over them."""

    def __init__(
        self,
        config: RunConfig,
        x: Optional[SimplicialComplex] = None,
        verbose: bool = True,
    ):
        self.config = config
        self.params = config.params
        self.verbose = verbose
        self.file_mode = x is not None
        if x is not None:
            self.__dict__["x"] = x

    @cached_property
    def quotient(self):
        return triangulate_quotient(
            self.params, thread_count=self.config.thread_count, verbose=self.verbose
        )

    @cached_property
    def cover(self):
        if self.params.group_kind == "Ghat":
            return self.quotient
        return triangulate_quotient(
            self.params.cover(),
            thread_count=self.config.thread_count,
            verbose=self.verbose,
        )

    @cached_property
    def pair(self):
        return build_neighborhoods(
            self.quotient, self.params, cover=self.cover, verbose=self.verbose
        )

    @cached_property
    def x_hat(self) -> SimplicialComplex:
        return extract_cover_X(self.pair)

    @cached_property
    def x(self) -> SimplicialComplex:
        if self.params.group_kind == "Ghat":
            return self.x_hat
        return push_forward_X(self.x_hat, self.params)

    @cached_property
    def subdivision(self):
        if self.params.group_kind == "Ghat":
            return self.pair.subdivided, self.pair.origin_map
        return barycentric_subdivision(self.quotient, verbose=self.verbose)

    @cached_property
    def x_direct(self) -> SimplicialComplex:
        return direct_X(*self.subdivision, self.params)

    @cached_property
    def orientation(self):
        return orientation_character(self.x)

    def _skip(self, reason: str) -> Tuple[str, dict]:
        return "skipped", {"reason": reason}

    def check_build(self):
        quotient = self.quotient
        volume = tiling_volume(quotient)
        covolume = self.params.group.covolume
        payload = {
            "quotient_f_vector": list(quotient.f_vector()),
            "quotient_euler": euler_characteristic(quotient),
            "quotient_is_simplicial": quotient.is_simplicial,
            "tiling_volume": volume,
            "covolume": covolume,
            "subdivided_top": len(self.pair.subdivided.top),
            "x_f_vector": list(self.x.f_vector()),
        }
        if self.params.group_kind == "G":
            payload["x_hat_f_vector"] = list(self.x_hat.f_vector())
        passed = volume == covolume and payload["quotient_euler"] == 0
        return _passed(passed), payload

    def check_fullness(self):
        pair = self.pair
        results = {
            "z_full": is_full_subcomplex(pair.quotient, pair.z),
            "zprime_full": is_full_subcomplex(pair.quotient, pair.zprime),
            "z_image_full": is_full_subcomplex(pair.subdivided, pair.z_image),
            "zprime_image_full": is_full_subcomplex(pair.subdivided, pair.zprime_image),
        }
        payload = dict(results)
        payload["z_simplices"] = len(pair.z.members)
        payload["zprime_simplices"] = len(pair.zprime.members)
        return _passed(all(results.values())), payload

    def check_dual_split(self):
        results = {"quotient": verify_dual_split(self.quotient, self.params)}
        if self.params.group_kind == "G":
            results["cover"] = verify_dual_split(self.cover, self.cover.params)
        return _passed(all(results.values())), results

    def check_boundary_eq(self):
        pair = self.pair
        boundary = cover_boundary(pair)
        results = {
            "boundaries_equal": True,
            "neighborhoods_cover": neighborhoods_cover(pair),
            "x_avoids_skeleta": x_avoids_skeleta(pair, boundary),
        }
        if self.params.k == 1:
            results["intersection_is_boundary"] = neighborhoods_meet_in_boundary(pair)
        payload = dict(results)
        if self.params.k > 1:
            payload["intersection_is_boundary"] = "skipped (k>1)"
        payload["n_z_top"] = len(pair.n_z.generators)
        payload["n_zprime_top"] = len(pair.n_zprime.generators)
        return _passed(all(results.values())), payload

    def check_x_direct_eq(self):
        equal = self.x_direct == self.x
        return _passed(equal), {
            "direct_top": len(self.x_direct.top),
            "extracted_top": len(self.x.top),
        }

    def check_upstairs_eq(self):
        upstairs = upstairs_X_facets(self.params)
        direct = complex_facet_points(self.x_direct)
        return _passed(upstairs == direct), {
            "upstairs_facets": len(upstairs),
            "direct_facets": len(direct),
        }

    def check_pseudomanifold(self):
        report = verify_closed_pseudomanifold(self.x, 2 * self.params.k)
        payload = report.to_dict()
        return _passed(report.passed and report.vertex_components == 1), payload

    def check_links(self):
        n = len(self.x.vertices)
        count = min(self.config.link_sample, n)
        spread = np.linspace(0, n - 1, num=count).round().astype(int)
        sample = sorted(set(spread.tolist()))
        report = vertex_link_homology_check(self.x, 2 * self.params.k, sample)
        return _passed(report.passed), report.to_dict()

    def check_orientation(self):
        expected = self.params.group_kind == "Ghat"
        payload = self.orientation.to_dict()
        payload["expected_orientable"] = expected
        passed = self.orientation.orientable == expected
        if self.params.group_kind == "G" and not self.file_mode:
            payload["cover_orientable"] = orientation_character(self.x_hat).orientable
            passed = passed and payload["cover_orientable"]
        return _passed(passed), payload

    def check_double_cover_iso(self):
        if self.params.group_kind != "G":
            return self._skip("only defined for the quotient by G")
        if self.file_mode:
            return self._skip("needs the construction pipeline")
        return _passed(double_cover_matches(self.x, self.x_hat, self.params)), {}

    def check_euler(self):
        params = self.params
        cover = params.cover()
        oracle = [cubical_cell_count(cover, i) for i in range(params.k + 1)]
        closed_form = [closed_form_cell_count(cover, i) for i in range(params.k + 1)]
        published = [linear_factor_cell_count(cover, i) for i in range(params.k + 1)]
        chi_z = cubical_euler_characteristic(cover)
        expected_x_hat = 2 * chi_z
        expected = expected_x_hat if params.group_kind == "Ghat" else chi_z
        chi_x = euler_characteristic(self.x)

        payload = {
            "z_cell_counts": oracle,
            "closed_form_counts": closed_form,
            "published_counts": published,
            "closed_form_agrees": closed_form == oracle,
            "published_agrees": published == oracle,
            "chi_z": chi_z,
            "chi_x": chi_x,
            "expected_chi_x": expected,
        }
        passed = chi_x == expected and closed_form == oracle
        if not self.file_mode:
            chi_n_z, chi_n_zprime = neighborhood_euler(self.pair)
            chi_x_hat = euler_characteristic(self.x_hat)
            payload.update(
                {
                    "chi_n_z": chi_n_z,
                    "chi_n_zprime": chi_n_zprime,
                    "chi_x_hat": chi_x_hat,
                }
            )
            passed = passed and chi_x_hat == 2 * chi_n_z == expected_x_hat
        return _passed(passed), payload

    def check_homology(self):
        max_dim = min(self.config.homology_max_dim, self.x.dim)
        integral = homology_all(self.x, max_dim, "Z")
        mod2 = homology_all(self.x, max_dim, "Z2")
        payload = {
            "integral": [g.to_dict() for g in integral],
            "mod2_betti": [g.betti for g in mod2],
        }
        passed = True
        if max_dim == self.x.dim:
            alternating = sum((-1) ** g.degree * g.betti for g in integral)
            payload["euler_from_betti"] = alternating
            passed = alternating == euler_characteristic(self.x)
            betti = payload["mod2_betti"]
            payload["mod2_duality"] = betti == betti[::-1]
            passed = passed and payload["mod2_duality"]
        return _passed(passed), payload

    def check_cocycle_h1(self):
        params = self.params
        results = {}
        for axis in range(1, 2 * params.k + 1):
            c = coordinate_cocycle(self.x, params, axis)
            results[f"axis_{axis}"] = cohomology_class_is_nonzero(self.x, c)
            if params.group_kind == "G" and not self.file_mode:
                projection = cover_projection(self.x_hat, self.x, params)
                pulled = pullback_cocycle(c, projection, self.x_hat)
                results[f"axis_{axis}_cover"] = cohomology_class_is_nonzero(
                    self.x_hat, pulled
                )
        return _passed(all(results.values())), results

    def check_cup_degree(self):
        if self.params.group_kind != "G":
            return self._skip("only meaningful on the non-orientable quotient")
        factors = [
            coordinate_cocycle(self.x, self.params, axis, "Z2")
            for axis in range(1, 2 * self.params.k + 1)
        ]
        product = cup_product(self.x, factors)
        nonzero = cohomology_class_is_nonzero(self.x, product)
        return _passed(nonzero), {"top_class_nonzero": nonzero}

    def check_mod2_degree(self):
        params = self.params
        n = params.n
        origin = (0,) * n
        generator = params.with_group("G").group.basis[-1]
        axis_step = tuple(params.L if i == 0 else 0 for i in range(n))
        crossing = mod2_segment_intersection(self.x, params, (origin, generator))
        along_axis = mod2_segment_intersection(self.x, params, (origin, axis_step))
        payload = {"to_half_generator": crossing, "along_axis": along_axis}
        return _passed(crossing == 1 and along_axis == 0), payload

    def run_check(self, name: str) -> Tuple[str, dict, float]:
        start = time.perf_counter()
        try:
            status, payload = getattr(self, "check_" + name.replace("-", "_"))()
        except AbgError as err:
            status, payload = "fail", {"error": type(err).__name__, "message": str(err)}
        elapsed = time.perf_counter() - start
        if self.verbose:
            print(f"[{status}] {name} ({elapsed:.2f}s)", flush=True)
        return status, payload, elapsed

    def artifacts(self) -> Dict[str, SimplicialComplex]:
        built = {}
        if "x" in self.__dict__ and not self.file_mode:
            built["x.scx"] = self.x
        if "x_hat" in self.__dict__ and self.params.group_kind == "G":
            built["x_hat.scx"] = self.x_hat
        if self.config.write_neighborhoods and "pair" in self.__dict__:
            built["n_z.scx"] = self.pair.n_z.as_complex()
            built["n_zprime.scx"] = self.pair.n_zprime.as_complex()
        return built


def _write_report(report: dict, output_dir: Optional[pathlib.Path]) -> None:
    if output_dir is None:
        return
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / "report.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(report))
    rows = [
        {"check": name, "status": c["status"]} for name, c in report["checks"].items()
    ]
    pd.DataFrame(rows, columns=["check", "status"]).to_csv(
        output_dir / "checks.csv", index=False, lineterminator="\n"
    )


def _run(pipeline: Pipeline, config: RunConfig, inputs: Optional[dict] = None) -> dict:
    checks, timings = {}, {}
    for name in config.checks:
        if pipeline.file_mode and name not in FILE_CHECKS:
            checks[name] = {
                "status": "skipped",
                "payload": {"reason": "needs the construction pipeline"},
            }
            continue
        status, payload, elapsed = pipeline.run_check(name)
        checks[name] = {"status": status, "payload": payload}
        timings[name] = round(elapsed, 6)

    files = dict(inputs or {})
    if config.output_dir is not None:
        for filename, complex in pipeline.artifacts().items():
            path = write_scx(config.output_dir / filename, complex)
            files[filename] = file_digest(path)

    report = {
        "tool": {"name": "abgtools", "version": __version__},
        "config": config.to_dict(),
        "checks": checks,
        "files": files,
        "timings": timings,
        "passed": all(c["status"] != "fail" for c in checks.values()),
    }
    _write_report(report, config.output_dir)
    return report


def run_pipeline(config: RunConfig, verbose: bool = True) -> dict:
    """Build the construction for config, run its checks and write the report."""
    return _run(Pipeline(config, verbose=verbose), config)


def verify_complex(
    path: os.PathLike, config: RunConfig, verbose: bool = True
) -> dict:
    x = read_scx(path, chart=config.params.chart)
    pipeline = Pipeline(config, x=x, verbose=verbose)
    return _run(pipeline, config, {pathlib.Path(path).name: file_digest(path)})


def euler_oracle_table(k: int = 1, L: int = 1) -> pd.DataFrame:
    params = ConstructionParams(k, L, "Ghat")
    rows = []
    for i in range(k + 1):
        oracle = cubical_cell_count(params, i)
        closed_form = closed_form_cell_count(params, i)
        published = linear_factor_cell_count(params, i)
        rows.append(
            {
                "i": i,
                "oracle": oracle,
                "closed_form": closed_form,
                "published": published,
                "closed_form_agrees": closed_form == oracle,
                "published_agrees": published == oracle,
            }
        )
    return pd.DataFrame(rows)


def _exit_status(report: dict) -> None:
    if not report["passed"]:
        raise SystemExit(1)


def build(
    k: int = 1, L: int = 1, group: str = "G", out: str = "abg-out", threads="auto"
) -> None:
    config = RunConfig(
        k, L, group, checks=("build",), output_dir=out, thread_count=threads
    )
    _exit_status(run_pipeline(config))


def run(
    k: int = 1,
    L: int = 1,
    group: str = "G",
    checks: Optional[str] = None,
    out: str = "abg-out",
    threads="auto",
    max_dim: Optional[int] = None,
    neighborhoods: bool = False,
) -> None:
    config = RunConfig(
        k,
        L,
        group,
        checks=checks,
        homology_max_dim=max_dim,
        output_dir=out,
        thread_count=threads,
        write_neighborhoods=neighborhoods,
    )
    _exit_status(run_pipeline(config))


def verify(
    path: str,
    params: str = "1,1,G",
    checks: str = "pseudomanifold,links,orientation,euler",
    out: Optional[str] = None,
) -> None:
    construction = parse_params(params)
    config = RunConfig(
        construction.k,
        construction.L,
        construction.group_kind,
        checks=checks,
        output_dir=out,
    )
    _exit_status(verify_complex(path, config))


def invariants(
    path: str,
    max_dim: Optional[int] = None,
    coeff: str = "Z",
    json: Optional[str] = None,
    params: Optional[str] = None,
    validate: bool = False,
) -> None:
    """Homology of a complex file.

    Homology only needs the simplex lists, so geometric validation of an
    uncharted file is opt-in with --validate.
    """
    chart = parse_params(params).chart if params else None
    x = read_scx(path, chart=chart, check_intersections=validate)
    groups = homology_all(x, max_dim, coeff)
    for g in groups:
        print(f"H_{g.degree}({coeff}) = {g}", flush=True)

    if json is not None:
        payload = {
            "file": {pathlib.Path(path).name: file_digest(path)},
            "coeff": coeff,
            "euler": euler_characteristic(x),
            "homology": [g.to_dict() for g in groups],
        }
        with open(json, "w", encoding="utf-8", newline="\n") as f:
            f.write(canonical_json(payload))


def oracle_euler(k: int = 1, L: int = 1, csv: Optional[str] = None) -> None:
    table = euler_oracle_table(k, L)
    print(table.to_string(index=False), flush=True)
    if csv is not None:
        table.to_csv(csv, index=False, lineterminator="\n")
    if not table["closed_form_agrees"].all():
        raise SystemExit(1)


def main() -> None:
    try:
        fire.Fire(
            {
                "build": build,
                "run": run,
                "verify": verify,
                "invariants": invariants,
                "oracle": {"euler": oracle_euler},
            }
        )
    except AbgError as err:
        print(f"error: {err}", file=sys.stderr, flush=True)
        raise SystemExit(2) from err


if __name__ == "__main__":
    main()
