import io
import json

import jsonschema
import pytest

from cases import k4, triangle_all_conflicts
from ctbound.cli import EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OK, EXIT_USAGE, format_table, main, table_row
from ctbound.engine import report_schema
from ctbound.instance import Instance, write_instance


def run(*argv):
    buf = io.StringIO()
    rc = main(list(map(str, argv)), out=buf)
    return rc, buf.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, inst in (("toy_k4", k4()), ("free_k4", k4(())), ("tri", triangle_all_conflicts())):
        p = tmp_path / f"{name}.ccmst"
        p.write_text(write_instance(inst))
        paths[name] = p
    return paths


def test_solve_json(files):
    rc, out = run("solve", files["toy_k4"], "--budget", 10)
    assert rc == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema())
    assert doc["instance"] == "toy_k4" and doc["best_dual_ceil"] == 8 and doc["kstab_bound"] == 8


def test_infeasible_exit(files):
    rc, out = run("solve", files["tri"])
    assert rc == EXIT_INFEASIBLE and json.loads(out)["infeasible"]
    assert run("kstab-bound", files["tri"], "--no-preprocess")[0] == EXIT_INFEASIBLE
    assert run("brute", files["tri"])[0] == EXIT_INFEASIBLE


def test_usage_errors(files, capsys):
    assert run("solve", files["toy_k4"], "--bogus")[0] == EXIT_USAGE
    assert run("frobnicate")[0] == EXIT_USAGE
    assert run()[0] == EXIT_USAGE
    assert run("solve", files["toy_k4"], "--budget", -1)[0] == EXIT_USAGE
    assert run("solve", files["toy_k4"], "--budget", 5, "--ascent-budget", 10)[0] == EXIT_USAGE
    assert run("solve", files["toy_k4"].with_name("missing.ccmst"))[0] == EXIT_USAGE
    assert "usage" in capsys.readouterr().err
    assert run("--help")[0] == EXIT_OK


def test_bad_file(tmp_path):
    p = tmp_path / "bad.ccmst"
    p.write_text("3 x\n")
    assert run("solve", p)[0] == EXIT_USAGE


def test_kstab_bound_and_brute(files):
    rc, out = run("kstab-bound", files["toy_k4"])
    assert rc == EXIT_OK and json.loads(out)["kstab_bound"] == 8
    rc, out = run("brute", files["free_k4"])
    doc = json.loads(out)
    assert rc == EXIT_OK and doc["opt"] == 6 and doc["spanning_trees"] == 16


def test_ascent_only_skips_volume(files):
    rc, out = run("ascent-only", files["toy_k4"])
    doc = json.loads(out)
    assert rc == EXIT_OK and doc["iterations"]["volume"] == 0


def test_zero_budget(files):
    rc, out = run("solve", files["toy_k4"], "--budget", 0, "--kstab-budget", 0)
    assert rc == EXIT_OK
    jsonschema.validate(json.loads(out), report_schema())


def test_batch_table_matches_single_runs(files, tmp_path):
    opt = tmp_path / "optima.csv"
    opt.write_text("instance,opt\ntoy_k4,8\nfree_k4,6\n")
    rc, out = run("solve", files["toy_k4"].parent, "--budget", 5, "--opt-file", opt, "--json")
    assert rc == EXIT_INFEASIBLE
    batch = {d["instance"]: d for d in json.loads(out)}
    for name in ("toy_k4", "free_k4"):
        single = json.loads(run("solve", files[name], "--budget", 5)[1])
        assert batch[name]["best_dual"] == single["best_dual"]
        assert batch[name]["kstab_bound"] == single["kstab_bound"]
        assert batch[name]["opt"] == {"toy_k4": 8, "free_k4": 6}[name]
    rc, table = run("solve", files["toy_k4"].parent, "--budget", 5, "--opt-file", opt)
    lines = table.splitlines()
    assert lines[0].startswith("ID") and "% from OPT" in lines[0]
    row = next(l for l in lines if l.startswith("toy_k4"))
    assert row.split("|")[1].strip() == "8" and row.split("|")[-1].strip() == "0.00"
    assert "(infeasible)" in next(l for l in lines if l.startswith("tri"))


def test_batch_parallel_equals_serial(files, monkeypatch):
    serial = json.loads(run("solve", files["toy_k4"].parent, "--json", "--budget", 5)[1])
    monkeypatch.setenv("CTB_THREADS", "2")
    parallel = json.loads(run("solve", files["toy_k4"].parent, "--json", "--budget", 5)[1])
    assert [d["best_dual"] for d in serial] == [d["best_dual"] for d in parallel]


def test_csv(files):
    rc, out = run("solve", files["toy_k4"], "--csv")
    header, row = out.strip().splitlines()
    assert header.startswith("ID,OPT,KSTAB") and row.startswith("toy_k4,")


def test_lab(capsys):
    rc, out = run("lab", "--max-n", 3, "--random", 2, "--random-min-n", 5, "--random-max-n", 6)
    doc = json.loads(out)
    assert rc == EXIT_OK and doc["violations"] == 0 and doc["graphs"] == 1 + 2 + 8 + 2


def test_guard_exit(tmp_path):
    inst = Instance.build(10, [(i, i + 1) for i in range(9)])
    p = tmp_path / "path10.ccmst"
    p.write_text(write_instance(inst))
    assert run("brute", p)[0] == EXIT_LIMIT


def test_table_formatting():
    from ctbound.engine import solve
    r = solve(k4(), None)
    text = format_table([table_row(r, 8.0)])
    assert text.splitlines()[2].startswith("k4 ")
