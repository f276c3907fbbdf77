import json
import sys

import pandas as pd
import pytest

from abgtools.errors import UnknownCheck
from abgtools.report import (
    CHECK_REGISTRY,
    FILE_CHECKS,
    LARGE_K_CHECKS,
    RunConfig,
    euler_oracle_table,
    main,
    parse_checks,
    run_pipeline,
    verify_complex,
)
from abgtools.utils import write_scx


def test_parse_checks():
    assert parse_checks("euler,build") == ("build", "euler")
    assert parse_checks(["homology"]) == ("homology",)
    assert parse_checks("all", k=2) == CHECK_REGISTRY
    assert parse_checks(None) == CHECK_REGISTRY
    assert parse_checks(None, k=2) == LARGE_K_CHECKS
    with pytest.raises(UnknownCheck):
        parse_checks("build,betti")


def test_run_config_defaults(monkeypatch):
    monkeypatch.delenv("ABG_THREADS", raising=False)
    config = RunConfig(thread_count=1)
    assert config.homology_max_dim == 2
    assert config.thread_count == 1
    assert config.to_dict() == {
        "k": 1,
        "L": 1,
        "group_kind": "G",
        "checks": list(CHECK_REGISTRY),
        "homology_max_dim": 2,
        "link_sample": 50,
    }


@pytest.mark.parametrize("name", ["g_pipeline", "ghat_pipeline"])
def test_all_checks_pass(request, name):
    pipeline = request.getfixturevalue(name)
    skipped = set()
    if pipeline.params.group_kind == "Ghat":
        skipped = {"double-cover-iso", "cup-degree"}
    for check in CHECK_REGISTRY:
        status, payload, _ = pipeline.run_check(check)
        expected = "skipped" if check in skipped else "pass"
        assert status == expected, (check, payload)


def test_euler_payload(g_pipeline):
    _, payload, _ = g_pipeline.run_check("euler")
    assert payload["z_cell_counts"] == [3, 9]
    assert payload["published_counts"] == [2, 6]
    assert not payload["published_agrees"]
    assert payload["chi_x"] == -6
    assert payload["chi_x_hat"] == -12


def test_run_pipeline_writes_report(tmp_path):
    config = RunConfig(
        1, 1, "G", checks="build,euler", output_dir=tmp_path, thread_count=1
    )
    report = run_pipeline(config, verbose=False)
    assert report["passed"]
    assert set(report["files"]) == {"x.scx", "x_hat.scx"}

    written = json.loads((tmp_path / "report.json").read_text())
    assert written["checks"]["build"]["status"] == "pass"
    assert written["checks"]["build"]["payload"]["covolume"] == "3/2"
    checks = pd.read_csv(tmp_path / "checks.csv")
    assert checks.to_dict("records") == [
        {"check": "build", "status": "pass"},
        {"check": "euler", "status": "pass"},
    ]
    assert (tmp_path / "x.scx").exists()


def test_runs_are_deterministic_across_thread_counts(tmp_path):
    reports = []
    for threads in (1, 3):
        config = RunConfig(
            1,
            1,
            "Ghat",
            checks="build",
            output_dir=tmp_path / str(threads),
            thread_count=threads,
        )
        reports.append(run_pipeline(config, verbose=False))
    for report in reports:
        del report["timings"]
    assert reports[0] == reports[1]


def test_euler_oracle_table():
    table = euler_oracle_table(1, 1)
    assert table["oracle"].tolist() == [3, 9]
    assert table["closed_form"].tolist() == [3, 9]
    assert table["published"].tolist() == [2, 6]
    assert table["closed_form_agrees"].all()
    assert not table["published_agrees"].any()


def test_verify_written_surface(tmp_path, g_pipeline):
    path = write_scx(tmp_path / "x.scx", g_pipeline.x)
    config = RunConfig(1, 1, "G", thread_count=1)
    report = verify_complex(path, config, verbose=False)
    assert report["passed"]
    assert set(report["files"]) == {"x.scx"}
    for name, check in report["checks"].items():
        if name in FILE_CHECKS:
            assert check["status"] == "pass", name
        else:
            assert check["status"] == "skipped", name


def test_verify_damaged_surface(tmp_path, g_pipeline):
    x = g_pipeline.x
    damaged = x.restrict(x.top[1:])
    path = write_scx(tmp_path / "damaged.scx", damaged)
    config = RunConfig(1, 1, "G", checks="pseudomanifold,orientation", thread_count=1)
    report = verify_complex(path, config, verbose=False)
    assert not report["passed"]
    assert report["checks"]["pseudomanifold"]["status"] == "fail"
    assert report["checks"]["orientation"]["status"] == "fail"
    assert report["checks"]["orientation"]["payload"]["error"] == "NotPseudomanifold"


def test_cli_oracle(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["abg", "oracle", "euler"])
    main()
    out = capsys.readouterr().out
    assert "closed_form_agrees" in out


def test_cli_invariants(monkeypatch, capsys, tmp_path, rp2):
    path = write_scx(tmp_path / "rp2.scx", rp2)
    summary = tmp_path / "rp2.json"
    argv = ["abg", "invariants", str(path), f"--json={summary}"]
    monkeypatch.setattr(sys, "argv", argv)
    main()
    out = capsys.readouterr().out
    assert "H_1(Z) = Z2" in out
    payload = json.loads(summary.read_text())
    assert payload["euler"] == 1
    assert payload["homology"][1] == {"degree": 1, "betti": 0, "torsion": [2]}


def test_cli_reports_errors(monkeypatch, tmp_path):
    path = tmp_path / "future.scx"
    path.write_text("scx 9 3 0 0\n")
    monkeypatch.setattr(sys, "argv", ["abg", "invariants", str(path)])
    with pytest.raises(SystemExit) as excinfo:
        main()
    assert excinfo.value.code == 2


def test_cli_invariants_on_quotient_surface(monkeypatch, tmp_path, g_pipeline):
    path = write_scx(tmp_path / "x.scx", g_pipeline.x)
    summary = tmp_path / "x.json"
    argv = ["abg", "invariants", str(path), "--coeff=Z2", f"--json={summary}"]
    monkeypatch.setattr(sys, "argv", argv)
    main()
    payload = json.loads(summary.read_text())
    assert payload["euler"] == -6
    assert [g["betti"] for g in payload["homology"]] == [1, 8, 1]

    monkeypatch.setattr(sys, "argv", ["abg", "invariants", str(path), "--validate"])
    with pytest.raises(SystemExit) as excinfo:
        main()
    assert excinfo.value.code == 2


def test_boundary_payload(g_pipeline):
    status, payload, _ = g_pipeline.run_check("boundary-eq")
    assert status == "pass"
    assert payload["intersection_is_boundary"] is True
    assert payload["n_z_top"] + payload["n_zprime_top"] >= 3456
