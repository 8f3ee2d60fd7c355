import random

import pytest

from randomflows import random_module

from provlock.model import PUBLIC, Module
from provlock.safety import (
    NonPublicMember,
    NotConnected,
    compose_public,
    enumerate_dsafe,
    enumerate_udsafe,
    is_dsafe,
    is_udsafe,
    is_usafe,
)
from provlock.standalone import all_subsets


@pytest.fixture
def r1(load):
    return load("fig3-r1").module("r1")


@pytest.fixture
def r2(load):
    return load("fig3-r2").module("r2")


def test_r2_hiding_its_ignored_input(r2):
    assert is_dsafe(r2, ["a2"])
    assert is_udsafe(r2, ["a2"])


def test_nothing_hidden_is_downstream_safe(r1, r2):
    assert is_dsafe(r1, []) and is_dsafe(r2, [])


def test_or_module_hiding_one_input_is_not_downstream_safe(load):
    m2 = load("wb-chain").module("m2")
    assert not is_dsafe(m2, ["a3"])


def test_r1_upstream_examples(r1):
    assert is_usafe(r1, ["a1", "a3"])
    assert not is_usafe(r1, ["a1", "a4"])
    assert is_usafe(r1, r1.attrs)


def test_r1_catalog(r1):
    cat = enumerate_udsafe(r1)
    for h in (("a1", "a3"), ("a2", "a4"), ("a1", "a2", "a3", "a4")):
        assert h in cat
    assert ("a1", "a4") not in cat


def test_r2_needs_a2(r2):
    for h in all_subsets(r2.attrs):
        if "a2" not in h:
            assert not is_udsafe(r2, h)
    assert all("a2" in h for h in enumerate_udsafe(r2).subsets)


def test_private_m1_has_only_trivial_subsets(load):
    m1 = load("fig1-m1").module("m1")
    subsets = enumerate_udsafe(m1).subsets
    assert subsets == (tuple(m1.attrs),)


def test_catalogs_always_hold_the_full_set():
    rng = random.Random(5)
    for _ in range(100):
        m = random_module(rng)
        assert tuple(m.attrs) in enumerate_udsafe(m)
        assert tuple(m.attrs) in enumerate_dsafe(m)


def test_constant_module():
    m = Module("k", PUBLIC, ("a", "b"), ("c",), {(0, 0): (1,), (0, 1): (1,), (1, 0): (1,), (1, 1): (1,)})
    for h in all_subsets(m.attrs):
        if "c" in h:
            assert is_dsafe(m, h)
    assert set(enumerate_udsafe(m).subsets) == {h for h in all_subsets(m.attrs) if is_udsafe(m, h)}


def test_fig2_closure_composite(load):
    w = load("fig2-singlepred")
    comp = compose_public(w, ["m3", "m4", "m6", "m7"])
    assert comp.inputs == ("a2", "a3")
    assert comp.outputs == ("a10", "a11", "a12", "a13")
    for x, y in comp.table.items():
        vals = dict(zip(comp.inputs, x))
        for name in comp.members:
            vals.update(w.module(name).apply(vals))
        assert y == tuple(vals[a] for a in comp.outputs)


def test_singleton_composite_is_the_module(load):
    w = load("wb-chain")
    comp = compose_public(w, ["m2"])
    m2 = w.module("m2")
    assert (comp.inputs, comp.outputs) == (("a3", "a4"), ("a5",))
    assert dict(comp.table) == dict(m2.table)


def test_composite_errors(load):
    w = load("fig2-singlepred")
    with pytest.raises(NotConnected):
        compose_public(w, ["m3", "m5"])
    with pytest.raises(NonPublicMember):
        compose_public(w, ["m2"])
