import json

import pytest
from click.testing import CliRunner

from provlock.cli import main
from provlock.fixtures import FIXTURE_IDS, fixture_spec
from provlock.model import workflow_relation
from provlock.optimizer import optimize_workflow
from provlock.privacy import gamma_achieved
from provlock.safety import enumerate_udsafe
from provlock.standalone import enumerate_safe_subsets


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, env=None):
        return runner.invoke(main, list(args), env=env)

    return invoke


def write_spec(tmp_path, spec, name="w.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def test_validate_fixture(run):
    res = run("validate", "wb-chain")
    assert res.exit_code == 0
    assert "3 modules" in res.output and "single-predecessor yes" in res.output


def test_validate_file(run, tmp_path):
    assert run("validate", write_spec(tmp_path, fixture_spec("fig1-m1"))).exit_code == 0


def test_validate_cycle(run, tmp_path):
    spec = fixture_spec("wb-chain")
    m1 = spec["modules"][0]
    m1["inputs"] = ["a1", "a6"]
    res = run("validate", write_spec(tmp_path, spec))
    assert res.exit_code == 2
    assert "CycleDetected" in res.output


def test_validate_missing_domain(run, tmp_path):
    spec = fixture_spec("wb-chain")
    del spec["attributes"]["a2"]
    res = run("validate", write_spec(tmp_path, spec))
    assert res.exit_code == 2
    assert "UnknownAttribute" in res.output


def test_validate_bad_json(run, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run("validate", str(path)).exit_code == 1


def test_unknown_source(run):
    assert run("validate", "no-such-thing").exit_code == 1


def test_safe_matches_library(run, load):
    res = run("safe", "fig1-m1", "--module", "m1", "--gamma", "4")
    assert res.exit_code == 0
    w = load("fig1-m1")
    expected = enumerate_safe_subsets(w.module("m1"), 4, w.domains).to_json()
    assert json.loads(res.output) == expected
    assert ["a3", "a4"] in expected["subsets"]


def test_safe_unknown_module(run):
    assert run("safe", "fig1-m1", "--module", "m9", "--gamma", "2").exit_code == 1


def test_udsafe_matches_library(run, load):
    w = load("fig3-r1")
    name = w.public_modules[0].name
    res = run("udsafe", "fig3-r1", "--module", name)
    assert res.exit_code == 0
    assert json.loads(res.output) == enumerate_udsafe(w.module(name)).to_json()


def test_verify_exit_codes(run):
    assert run("verify", "wb-chain", "--hide", "a3,a5", "--gamma", "m1=2").exit_code == 3
    assert run("verify", "wb-chain", "--hide", "a3,a4,a5", "--gamma", "m1=2").exit_code == 0
    assert run("verify", "wb-chain", "--hide", "a3", "--gamma", "2").exit_code == 3


def test_verify_matches_library(run, load):
    res = run("verify", "wb-chain", "--hide", "a3,a4,a5")
    w = load("wb-chain")
    assert json.loads(res.output) == gamma_achieved(workflow_relation(w), w, ["a3", "a4", "a5"], targets=2).to_json()


def test_verify_unknown_attribute(run):
    assert run("verify", "wb-chain", "--hide", "a99").exit_code == 1


def test_bad_gamma(run):
    assert run("verify", "wb-chain", "--hide", "a3", "--gamma", "m1=x").exit_code != 0


def test_optimize_wb(run, load):
    res = run("optimize", "wb-chain", "--gamma", "m1=2", "--check")
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["cost"] == 3 and data["hidden"] == ["a3", "a4", "a5"]
    assert data["check"]["holds"] is True
    assert data == {**optimize_workflow(load("wb-chain"), {"m1": 2}).to_json(), "check": data["check"]}


def test_optimize_routes(run):
    res = run("optimize", "wa-nopred")
    assert res.exit_code == 2 and "NotSinglePredecessor" in res.output
    res = run("optimize", "wa-nopred", "--route", "general")
    assert res.exit_code == 0 and json.loads(res.output)["cost"] == 3


def test_optimize_infeasible(run):
    res = run("optimize", "wb-chain", "--gamma", "3")
    assert res.exit_code == 4 and "NoFeasiblePlan" in res.output


def test_optimize_debug_tables(run):
    data = json.loads(run("optimize", "wb-chain", "--gamma", "m1=2", "--debug").output)
    assert "table" in data["modules"]["m1"]


def test_optimize_jobs_from_environment(run):
    plain = run("optimize", "fig2-singlepred")
    parallel = run("optimize", "fig2-singlepred", env={"PROVLOCK_JOBS": "2"})
    assert plain.exit_code == parallel.exit_code == 0
    assert plain.output == parallel.output


@pytest.mark.parametrize("fixture", FIXTURE_IDS)
def test_reproduce(run, fixture):
    res = run("reproduce", fixture)
    assert res.exit_code == 0, res.output
    assert res.output.startswith(f"# {fixture}")


def test_reproduce_unknown(run):
    assert run("reproduce", "nope").exit_code != 0
