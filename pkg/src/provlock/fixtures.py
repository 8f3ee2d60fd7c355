"""Bundled example workflows and the text reports `provlock reproduce` prints."""

from __future__ import annotations

import json
from importlib import resources

from .closures import classify_single_predecessor, public_closure
from .model import Workflow, build_workflow, workflow_relation
from .privacy import construct_witness_world, format_relation, gamma_achieved
from .safety import enumerate_udsafe
from .standalone import count_standalone_worlds, standalone_out

FIXTURE_IDS = (
    "fig1-m1",
    "fig3-r1",
    "fig3-r2",
    "wb-chain",
    "wa-nopred",
    "app-multipred",
    "app-datashare",
    "fig2-singlepred",
)


def _data(kind: str, name: str):
    return resources.files("provlock").joinpath("data", kind, name)


def fixture_spec(name: str) -> dict:
    if name not in FIXTURE_IDS:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_IDS)}")
    return json.loads(_data("fixtures", f"{name}.json").read_text(encoding="utf-8"))


def load_fixture(name: str) -> Workflow:
    return build_workflow(fixture_spec(name))


def expected_output(name: str) -> str:
    return _data("expected", f"{name}.txt").read_text(encoding="utf-8")


def _fmt(attrs) -> str:
    return "{" + ",".join(attrs) + "}"


def _gamma_lines(w, rel, hidden) -> list[str]:
    rep = gamma_achieved(rel, w, hidden)
    lines = [f"hidden {_fmt(rep.hidden)}: gamma {rep.gamma}"]
    for m in rep.modules:
        sizes = " ".join(f"{''.join(map(str, x))}:{n}" for x, n in m.outs)
        lines.append(f"  {m.module} gamma {m.gamma} ({sizes})")
    return lines


def _relation_block(title, w, rel, hidden=()) -> list[str]:
    return [title, format_relation(rel, w, hidden).rstrip("\n")]


def _catalog_lines(m) -> list[str]:
    cat = enumerate_udsafe(m)
    return [f"UD-safe subsets of {m.name}:"] + [f"  {_fmt(s)}" for s in cat.subsets]


def render_fixture(name: str) -> str:
    """Deterministic text report for one bundled workflow."""
    w = load_fixture(name)
    rel = workflow_relation(w)
    out: list[str] = [f"# {name}"]
    if name == "fig1-m1":
        m1 = w.module("m1")
        out += _relation_block("workflow relation:", w, rel)
        out += _relation_block("m1 relation:", w, m1.relation())
        out.append(f"standalone worlds of m1 hiding {{a2,a4}}: {count_standalone_worlds(m1, ['a2', 'a4'], w.domains)}")
        for hidden in (("a2", "a4"), ("a1", "a2")):
            sizes = [len(standalone_out(m1, x, hidden, w.domains)) for x in sorted(m1.table)]
            out.append(f"standalone outputs per input hiding {_fmt(hidden)}: {sizes}")
    elif name in ("fig3-r1", "fig3-r2"):
        m = w.public_modules[0]
        out += _relation_block(f"{m.name} relation:", w, m.relation())
        out += _catalog_lines(m)
    elif name == "wb-chain":
        out += _relation_block("workflow relation:", w, rel, ("a3", "a5"))
        out += _gamma_lines(w, rel, ("a3", "a5"))
        out += _gamma_lines(w, rel, ("a3", "a4", "a5"))
        hidden = ("a3", "a4", "a5")
        witness = construct_witness_world(w, "m1", ["a3"], (0, 0), (1, 0), hidden, rel)
        out += _relation_block("witness world, m1 sends 00 to 10:", w, witness, hidden)
    elif name == "wa-nopred":
        hidden = ("a2", "a3", "a4", "a5")
        out += _relation_block("workflow relation:", w, rel, hidden)
        out += _classification_lines(w)
        out += _gamma_lines(w, rel, hidden)
        out += _gamma_lines(w, rel, ("a3", "a5", "a6"))
    elif name == "app-multipred":
        hidden = ("a2", "a3", "a4", "a5")
        out += _relation_block("workflow relation:", w, rel, hidden)
        out += _classification_lines(w)
        out += _gamma_lines(w, rel, hidden)
    elif name == "app-datashare":
        hidden = ("a3", "a4", "a5")
        out += _relation_block("workflow relation:", w, rel, hidden)
        out += _classification_lines(w)
        out += _gamma_lines(w, rel, hidden)
    elif name == "fig2-singlepred":
        out += _classification_lines(w)
        for hidden in (("a2",), ("a3",), ("a2", "a3"), ("a4",)):
            out.append(f"public closure of {_fmt(hidden)}: {_fmt(public_closure(w, hidden))}")
    return "\n".join(out) + "\n"


def _classification_lines(w) -> list[str]:
    cls = classify_single_predecessor(w)
    lines = [f"single-predecessor: {'yes' if cls.is_single_predecessor else 'no'}"]
    lines += [f"  {v.kind}: {v.detail}" for v in cls.violations]
    return lines
