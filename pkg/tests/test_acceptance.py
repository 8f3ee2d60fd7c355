"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line; the lines
are also collected and repeated in the pytest terminal summary. Running
this file directly prints the same lines without pytest.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from randomflows import (  # noqa: E402
    random_module,
    random_public_group,
    random_workflow,
    valid_plans,
)

from provlock import fixtures  # noqa: E402
from provlock.closures import classify_single_predecessor, public_closure  # noqa: E402
from provlock.equiv import flip  # noqa: E402
from provlock.model import workflow_relation  # noqa: E402
from provlock.optimizer import (  # noqa: E402
    NotAChain,
    NotATree,
    brute_force_closure,
    optimize_chain_closure,
    optimize_dag_closure,
    optimize_tree_closure,
)
from provlock.privacy import (  # noqa: E402
    ConditionViolated,
    assemble_single_pred,
    construct_witness_world,
    gamma_achieved,
)
from provlock.safety import (  # noqa: E402
    compose_public,
    enumerate_dsafe,
    enumerate_udsafe,
    is_dsafe,
    is_udsafe,
    is_usafe,
)
from provlock.standalone import (  # noqa: E402
    all_subsets,
    count_standalone_worlds,
    is_standalone_safe,
    standalone_out,
)

RESULTS: dict[int, str] = {}

# Frozen values, copied from the published tables before any code ran.
TABLE_4_ROWS = {
    (0, 0, 1, 0, 1, 0),
    (0, 1, 0, 0, 0, 1),
    (1, 0, 0, 0, 0, 1),
    (1, 1, 0, 0, 0, 1),
}
M1_OUT_HIDING_INPUTS = {(0, 1, 1), (1, 1, 0), (1, 0, 1)}


def _run(number: int, check):
    start = time.perf_counter()
    try:
        detail = check()
    except AssertionError as exc:
        reason = str(exc).split("\nassert")[0]
        line = f"criterion {number}: FAIL ({reason})"
        RESULTS[number] = line
        print(line)
        raise
    line = f"criterion {number}: PASS ({detail}; {time.perf_counter() - start:.2f}s)"
    RESULTS[number] = line
    print(line)


def check_worlds_count():
    w = fixtures.load_fixture("fig1-m1")
    m1 = w.module("m1")
    start = time.perf_counter()
    n = count_standalone_worlds(m1, ["a2", "a4"], w.domains)
    took = time.perf_counter() - start
    assert n == 64, f"expected 64 worlds, got {n}"
    assert took < 0.1, f"took {took:.3f}s"
    return "64 worlds"


def check_standalone_privacy():
    w = fixtures.load_fixture("fig1-m1")
    m1 = w.module("m1")
    assert is_standalone_safe(m1, ["a2", "a4"], 4, w.domains)
    assert not is_standalone_safe(m1, ["a1", "a2"], 4, w.domains)
    for x in m1.table:
        out = standalone_out(m1, x, ["a1", "a2"], w.domains)
        assert out == M1_OUT_HIDING_INPUTS, f"Out{x} = {sorted(out)}"
    return "safe at 4 hiding {a2,a4}; hiding {a1,a2} leaves 3 outputs per input"


def check_udsafe_catalogs():
    r1 = fixtures.load_fixture("fig3-r1").module("r1")
    r2 = fixtures.load_fixture("fig3-r2").module("r2")
    m1 = fixtures.load_fixture("fig1-m1").module("m1")
    c1, c2 = enumerate_udsafe(r1), enumerate_udsafe(r2)
    assert ("a1", "a3") in c1 and ("a2", "a4") in c1
    assert ("a1", "a4") not in c1
    assert c2.subsets and all("a2" in s for s in c2.subsets)
    proper = [s for s in enumerate_udsafe(m1).subsets if 0 < len(s) < len(m1.attrs)]
    assert proper == [], f"m1 has non-trivial UD-safe subsets {proper}"
    return f"r1 {len(c1.subsets)} subsets, r2 {len(c2.subsets)} subsets, m1 trivial only"


def check_algorithm_one():
    rng = random.Random(4)
    mismatches = 0
    for _ in range(200):
        m = random_module(rng, max_attrs=4)
        fast = set(enumerate_udsafe(m).subsets)
        slow = {h for h in all_subsets(m.attrs) if is_dsafe(m, h) and is_usafe(m, h)}
        mismatches += fast != slow
    assert mismatches == 0, f"{mismatches} of 200 modules disagree"
    return "200 modules, 0 mismatches"


def check_closures():
    w = fixtures.load_fixture("fig2-singlepred")
    big = ("m3", "m4", "m6", "m7")
    assert public_closure(w, ["a2"]) == big
    assert public_closure(w, ["a3"]) == big
    assert public_closure(w, ["a4"]) == ("m5", "m8")
    return "C(a2) = C(a3) = {m3,m4,m6,m7}, C(a4) = {m5,m8}"


def check_necessity():
    cases = [
        ("wa-nopred", ["a2", "a3", "a4", "a5"]),
        ("wb-chain", ["a3", "a5"]),
        ("app-multipred", ["a2", "a3", "a4", "a5"]),
        ("app-datashare", ["a3", "a4", "a5"]),
    ]
    for name, hidden in cases:
        w = fixtures.load_fixture(name)
        start = time.perf_counter()
        g = gamma_achieved(workflow_relation(w), w, hidden).gamma
        took = time.perf_counter() - start
        assert g == 1, f"{name}: gamma {g}"
        assert took < 1, f"{name}: {took:.2f}s"
    return "all four report gamma 1"


def check_resolution():
    w = fixtures.load_fixture("wb-chain")
    rel = workflow_relation(w)
    hidden = ["a3", "a4", "a5"]
    g = gamma_achieved(rel, w, hidden).gamma
    assert g == 2, f"gamma {g}"
    world = construct_witness_world(w, "m1", ["a3"], (0, 0), (1, 0), hidden, rel)
    assert world.schema == ("a1", "a2", "a3", "a4", "a5", "a6")
    assert set(world.rows) == TABLE_4_ROWS, f"witness {sorted(world.rows)}"
    return "gamma 2, witness equals Table 4"


def _soundness(route, rng, want, strict=False):
    seen = plans = 0
    bad = []
    while seen < want:
        w = random_workflow(rng, fresh_inputs=route == "single-pred" and rng.random() < 0.7)
        if route == "single-pred" and not classify_single_predecessor(w).is_single_predecessor:
            continue
        seen += 1
        rel = workflow_relation(w)
        for plan in valid_plans(w, 2, route, rng, limit=5, strict=strict):
            plans += 1
            if gamma_achieved(rel, w, plan.hidden, cap=2).gamma < 2:
                bad.append((w, plan))
    return plans, bad


def _rejected_by_strict(w, plan):
    choices = {part.module: set(part.hidden) for part in plan.parts}
    try:
        assemble_single_pred(w, choices, 2, strict=True)
    except ConditionViolated as exc:
        return exc.which == "closure-inputs"
    return False


def check_soundness():
    start = time.perf_counter()
    sp_plans, sp_bad = _soundness("single-pred", random.Random(7), 100)
    strict_plans, strict_bad = _soundness("single-pred", random.Random(7), 100, strict=True)
    gen_plans, gen_bad = _soundness("general", random.Random(8), 100)
    took = time.perf_counter() - start
    summary = (f"single-pred {len(sp_bad)}/{sp_plans} plans below 2, "
               f"strict single-pred {len(strict_bad)}/{strict_plans}, general {len(gen_bad)}/{gen_plans}")
    if sp_bad:
        in_corner = sum(_rejected_by_strict(w, plan) for w, plan in sp_bad)
        summary += (f"; {in_corner}/{len(sp_bad)} failing plans have a closure group that feeds a"
                    f" private module and reads an initial input; first hides {','.join(sp_bad[0][1].hidden)}")
    assert not sp_bad and not strict_bad and not gen_bad, summary
    assert took < 30, f"took {took:.1f}s"
    return summary


def _flip_properties(rng) -> int:
    bad = 0
    attrs = ["a1", "a2", "a3", "a4"]
    for _ in range(200):
        p_attrs = rng.sample(attrs, rng.randint(1, 4))
        u_attrs = rng.sample(attrs, rng.randint(1, 4))
        p = {a: rng.randint(0, 1) for a in p_attrs}
        q = {a: rng.randint(0, 1) for a in p_attrs}
        u = {a: rng.randint(0, 1) for a in u_attrs}
        w = flip(p, q, u)
        bad += flip(p, q, w) != u
        if not set(p_attrs) & set(u_attrs):
            bad += w != u
        bad += flip(p, q, dict(p)) != q or flip(p, q, dict(q)) != p
        common = set(p_attrs) & set(u_attrs)
        if all(p[a] == q[a] for a in common):
            bad += w != u
        split = rng.sample(u_attrs, rng.randint(0, len(u_attrs)))
        left = flip(p, q, {a: u[a] for a in split})
        right = flip(p, q, {a: u[a] for a in u_attrs if a not in split})
        if _agrees(p, q, u, split) and _agrees(p, q, u, [a for a in u_attrs if a not in split]):
            bad += {**left, **right} != w
    return bad


def _agrees(p, q, u, part):
    """The split rule needs both halves to fall in the same flip branch as the whole."""
    whole = [a for a in u if a in p]
    sub = [a for a in part if a in p]

    def branch(attrs):
        if all(u[a] == p[a] for a in attrs):
            return "p"
        if all(u[a] == q[a] for a in attrs):
            return "q"
        return "none"

    return branch(sub) == branch(whole) or not sub


def check_lemmas():
    rng = random.Random(9)
    union_bad = 0
    for _ in range(200):
        m = random_module(rng, max_attrs=4)
        safe = enumerate_dsafe(m).subsets
        h1, h2 = rng.choice(safe), rng.choice(safe)
        union_bad += not is_dsafe(m, set(h1) | set(h2))

    composite_bad = checked = 0
    while checked < 200:
        w = random_public_group(rng)
        attrs = w.attributes
        for h in rng.sample(all_subsets(attrs), min(16, 2 ** len(attrs))):
            if all(is_udsafe(m, set(h) & set(m.attrs)) for m in w.modules):
                comp = compose_public(w, [m.name for m in w.modules])
                composite_bad += not is_udsafe(comp, set(h) & set(comp.attrs))
                checked += 1

    flip_bad = _flip_properties(rng)

    prop_bad = 0
    for _ in range(200):
        m = random_module(rng, max_attrs=4)
        cat = enumerate_udsafe(m).subsets
        for u1, u2 in itertools.combinations(cat, 2):
            if set(u1) & set(m.outputs) == set(u2) & set(m.outputs):
                prop_bad += set(u1) != set(u2)

    counts = {"union": union_bad, "composite": composite_bad, "flip": flip_bad, "uds-property": prop_bad}
    assert not any(counts.values()), f"violations {counts}"
    return "200+ instances each for union, composite, flip, UD-safe property; 0 violations"


def _chain_fixture_cases():
    w = fixtures.load_fixture("wb-chain")
    yield w, "m1", ("a3",), public_closure(w, ["a3"])
    yield w, "m1", ("a3", "a4"), public_closure(w, ["a3", "a4"])
    f2 = fixtures.load_fixture("fig2-singlepred")
    yield f2, "m2", ("a4",), public_closure(f2, ["a4"])
    yield f2, "m9", ("a15",), public_closure(f2, ["a15"])


def _random_closure_cases(rng, want):
    found = 0
    while found < want:
        w = random_workflow(rng, max_modules=5, max_attrs=8, public_share=0.7, fresh_inputs=rng.random() < 0.5)
        for m in w.private_modules:
            for safe in all_subsets(m.outputs)[1:]:
                closure = public_closure(w, safe)
                if closure:
                    yield w, m.name, safe, closure
                    found += 1
                    break
            if found >= want:
                return


def check_optimizer():
    rng = random.Random(10)
    cases = list(_chain_fixture_cases()) + list(_random_closure_cases(rng, 50))
    compared = 0
    for w, owner, safe, closure in cases:
        catalogs = {n: enumerate_udsafe(w.module(n)).subsets for n in closure}
        ref = brute_force_closure(w, owner, safe, closure)
        dag = optimize_dag_closure(w, owner, safe, closure, catalogs)
        results = [("dag", dag)]
        for label, solver, shape_error in (("chain", optimize_chain_closure, NotAChain),
                                           ("tree", optimize_tree_closure, NotATree)):
            try:
                results.append((label, solver(w, owner, safe, closure, catalogs)))
            except shape_error:
                pass
        for label, res in results:
            if ref is None:
                assert res is None, f"{label} found a plan where none exists"
                continue
            assert res is not None, f"{label} missed a plan of cost {ref.cost}"
            assert res.cost == ref.cost, f"{label} cost {res.cost} vs exhaustive {ref.cost}"
            owner_mod = w.module(owner)
            goal = {p.name: 1 for p in w.private_modules}
            if classify_single_predecessor(w).is_single_predecessor and is_standalone_safe(
                    owner_mod, safe, 2, w.domains):
                goal[owner] = 2
                assemble_single_pred(w, {owner: res.hidden}, goal)
            compared += 1
    return f"{len(cases)} closures, {compared} solver results match the exhaustive minimum"


CRITERIA = {
    1: check_worlds_count,
    2: check_standalone_privacy,
    3: check_udsafe_catalogs,
    4: check_algorithm_one,
    5: check_closures,
    6: check_necessity,
    7: check_resolution,
    8: check_soundness,
    9: check_lemmas,
    10: check_optimizer,
}


def test_criterion_1_worlds_count():
    _run(1, check_worlds_count)


def test_criterion_2_standalone_privacy():
    _run(2, check_standalone_privacy)


def test_criterion_3_udsafe_catalogs():
    _run(3, check_udsafe_catalogs)


def test_criterion_4_algorithm_one():
    _run(4, check_algorithm_one)


def test_criterion_5_closures():
    _run(5, check_closures)


def test_criterion_6_necessity():
    _run(6, check_necessity)


def test_criterion_7_resolution():
    _run(7, check_resolution)


def test_criterion_8_soundness():
    _run(8, check_soundness)


def test_criterion_9_lemmas():
    _run(9, check_lemmas)


def test_criterion_10_optimizer():
    _run(10, check_optimizer)


if __name__ == "__main__":
    failed = 0
    for number, check in CRITERIA.items():
        try:
            _run(number, check)
        except AssertionError:
            failed += 1
    print("criterion 11: not an experiment; covered by criteria 4 and 10")
    sys.exit(1 if failed else 0)
