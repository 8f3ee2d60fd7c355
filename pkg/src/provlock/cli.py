"""Command-line interface.

Every command takes a SOURCE that is either a path to a workflow JSON file
or the id of a bundled fixture. Exit codes: 0 success, 1 usage or parse
error, 2 model error, 3 privacy target not met, 4 no feasible plan.
"""

from __future__ import annotations

import difflib
import json
import os
import sys

import click

from . import fixtures
from .closures import classify_single_predecessor
from .model import ModelError, SpecParseError, load_workflow, workflow_relation
from .optimizer import ROUTES, NoFeasiblePlan, optimize_workflow
from .privacy import NotSinglePredecessor, gamma_achieved
from .safety import enumerate_udsafe
from .standalone import enumerate_safe_subsets

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_UNMET, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


def _load(source: str):
    try:
        if os.path.exists(source):
            return load_workflow(source)
        if source in fixtures.FIXTURE_IDS:
            return fixtures.load_fixture(source)
    except SpecParseError as exc:
        _fail(EXIT_USAGE, f"parse error: {exc}")
    except ModelError as exc:
        _fail(EXIT_MODEL, "\n".join(f"{kind}: {detail}" for kind, detail in exc.violations))
    _fail(EXIT_USAGE, f"{source}: no such file or fixture")


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _emit(data):
    click.echo(json.dumps(data, indent=2))


def _module(w, name):
    try:
        return w.module(name)
    except KeyError:
        _fail(EXIT_USAGE, f"no module named {name}")


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_gamma(text: str):
    """``2`` applies to every private module; ``m1=2,m3=1`` sets targets per module."""
    try:
        if "=" not in text:
            return int(text)
        out = {}
        for part in _split(text):
            name, value = part.split("=")
            out[name.strip()] = int(value)
        return out
    except ValueError:
        raise click.BadParameter(f"expected an integer or name=value pairs, got {text!r}")


class _Gamma(click.ParamType):
    name = "gamma"

    def convert(self, value, param, ctx):
        if isinstance(value, (int, dict)):
            return value
        return _parse_gamma(value)


GAMMA = _Gamma()


@click.group()
def main():
    """Module privacy analysis for workflow provenance views."""


@main.command()
@click.argument("source")
def validate(source):
    """Check that a workflow description is well formed."""
    w = _load(source)
    cls = classify_single_predecessor(w)
    click.echo(
        f"valid: {len(w.modules)} modules, {len(w.attributes)} attributes, "
        f"initial inputs {','.join(w.initial_inputs)}, "
        f"single-predecessor {'yes' if cls.is_single_predecessor else 'no'}"
    )


@main.command()
@click.argument("source")
@click.option("--module", "module_name", required=True)
@click.option("--gamma", type=int, required=True)
@click.option("--outputs-only/--mixed", default=True, show_default=True,
              help="Restrict candidates to output attributes.")
def safe(source, module_name, gamma, outputs_only):
    """List the hidden subsets that keep a module private on its own."""
    w = _load(source)
    m = _module(w, module_name)
    _emit(enumerate_safe_subsets(m, gamma, w.domains, outputs_only=outputs_only).to_json())


@main.command()
@click.argument("source")
@click.option("--module", "module_name", required=True)
def udsafe(source, module_name):
    """List the hidden subsets under which a module is upstream- and downstream-safe."""
    w = _load(source)
    _emit(enumerate_udsafe(_module(w, module_name)).to_json())


@main.command()
@click.argument("source")
@click.option("--hide", required=True, help="Comma-separated hidden attributes.")
@click.option("--gamma", type=GAMMA, default="2", show_default=True)
@click.option("--cap", type=int, default=None, help="Stop counting outputs per input at this many.")
def verify(source, hide, gamma, cap):
    """Measure the privacy a hidden set gives every private module."""
    w = _load(source)
    hidden = _split(hide)
    unknown = [a for a in hidden if a not in w.domains]
    if unknown:
        _fail(EXIT_USAGE, f"unknown attributes {','.join(unknown)}")
    try:
        report = gamma_achieved(workflow_relation(w), w, hidden, targets=gamma, cap=cap)
    except KeyError as exc:
        _fail(EXIT_USAGE, str(exc))
    _emit(report.to_json())
    sys.exit(EXIT_OK if report.holds else EXIT_UNMET)


@main.command()
@click.argument("source")
@click.option("--gamma", type=GAMMA, default="2", show_default=True)
@click.option("--route", type=click.Choice(ROUTES), default="single-pred", show_default=True)
@click.option("--check", is_flag=True, help="Confirm the plan with the possible-worlds oracle.")
@click.option("--debug", is_flag=True, help="Include dynamic-programming tables.")
@click.option("--strict", is_flag=True, help="Reject closures that feed a private module and read initial inputs.")
@click.option("--jobs", type=int, default=lambda: int(os.environ.get("PROVLOCK_JOBS", "1")),
              show_default="PROVLOCK_JOBS or 1")
def optimize(source, gamma, route, check, debug, strict, jobs):
    """Find a cheapest hidden set meeting the privacy target."""
    w = _load(source)
    try:
        result = optimize_workflow(w, gamma, route=route, jobs=jobs, strict=strict)
    except NotSinglePredecessor as exc:
        _fail(EXIT_MODEL, f"NotSinglePredecessor: {exc}")
    except NoFeasiblePlan as exc:
        _fail(EXIT_INFEASIBLE, f"NoFeasiblePlan: {exc}")
    except KeyError as exc:
        _fail(EXIT_USAGE, str(exc))
    data = result.to_json(debug=debug)
    code = EXIT_OK
    if check:
        report = gamma_achieved(workflow_relation(w), w, result.hidden, targets=gamma)
        data["check"] = report.to_json()
        code = EXIT_OK if report.holds else EXIT_UNMET
    _emit(data)
    sys.exit(code)


@main.command()
@click.argument("fixture", type=click.Choice(fixtures.FIXTURE_IDS))
def reproduce(fixture):
    """Regenerate a bundled example and compare it with the stored output."""
    text = fixtures.render_fixture(fixture)
    click.echo(text, nl=False)
    expected = fixtures.expected_output(fixture)
    if text != expected:
        diff = difflib.unified_diff(expected.splitlines(True), text.splitlines(True), "expected", "actual")
        _fail(EXIT_UNMET, "output differs from the stored copy:\n" + "".join(diff))
