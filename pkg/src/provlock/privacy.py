"""Workflow possible worlds, Γ-workflow-privacy, plan assembly and witness worlds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .closures import (
    classify_single_predecessor,
    downward_closure,
    public_closure,
)
from .equiv import eflip, flip
from .model import Module, Relation, Workflow, cost_of, workflow_relation
from .safety import compose_public, is_dsafe, is_udsafe
from .standalone import InputNotInRelation, is_standalone_safe
from .worlds import CompletionSearch

SINGLE_PRED = "single-pred"
GENERAL = "general"


class NotSinglePredecessor(ValueError):
    def __init__(self, classification):
        self.classification = classification
        kinds = sorted({v.kind for v in classification.violations})
        super().__init__("workflow is not single-predecessor: " + ", ".join(kinds))


class ConditionViolated(ValueError):
    """A plan breaks one of the composability conditions.

    ``which`` is one of ``"i"`` (standalone safety), ``"ii"`` (closure
    safety), ``"iii"`` (hiding outside the closure) or ``"disjoint"``.
    """

    def __init__(self, which: str, witness: Mapping[str, Any]):
        self.which = which
        self.witness = dict(witness)
        super().__init__(f"condition ({which}) violated: {self.witness}")


class PreconditionViolated(ValueError):
    pass


def _targets(w: Workflow, gamma) -> dict[str, int]:
    if isinstance(gamma, Mapping):
        unknown = set(gamma) - {m.name for m in w.private_modules}
        if unknown:
            raise KeyError(f"privacy targets given for non-private modules {sorted(unknown)}")
        return {m.name: int(gamma.get(m.name, 1)) for m in w.private_modules}
    return {m.name: int(gamma) for m in w.private_modules}


# ---------------------------------------------------------------- oracle


def workflow_worlds(relation: Relation, w: Workflow, hidden: Iterable[str], limit: int | None = None) -> Iterator[Relation]:
    """Yield each distinct possible world of the workflow relation."""
    search = CompletionSearch(w, relation, hidden)
    seen = set()
    for rows, _ in search.search():
        rel = search.as_relation(rows)
        if rel.rows in seen:
            continue
        seen.add(rel.rows)
        yield rel
        if limit is not None and len(seen) >= limit:
            return


def is_possible_world(candidate: Relation, relation: Relation, w: Workflow, hidden: Iterable[str]) -> bool:
    """Check the three world conditions directly on a candidate relation."""
    hidden = set(hidden)
    if candidate.schema != relation.schema:
        return False
    for m in w.modules:
        if not candidate.satisfies_fd(m.inputs, m.outputs):
            return False
        if m.is_public:
            for row in candidate.as_dicts():
                if m.apply(row) != {a: row[a] for a in m.outputs}:
                    return False
    visible = [a for a in relation.schema if a not in hidden]
    return candidate.project(visible) == relation.project(visible)


class _OutTracker:
    """Collects, per private module and input, the outputs some world allows."""

    def __init__(self, w: Workflow, relation: Relation, hidden):
        self.w = w
        self.search = CompletionSearch(w, relation, hidden)
        self.codomain = {
            m.name: list(itertools.product(*(w.domains[a] for a in m.outputs))) for m in w.private_modules
        }
        self.inputs = {
            m.name: sorted(relation.project(m.inputs).rows, key=_rank_key(w, m.inputs)) for m in w.private_modules
        }
        self.out: dict[str, dict[tuple, set]] = {
            m.name: {x: set() for x in self.inputs[m.name]} for m in w.private_modules
        }

    def harvest(self, rows, fd):
        for m in self.w.private_modules:
            present = {tuple(r[a] for a in m.inputs) for r in rows}
            for x, seen in self.out[m.name].items():
                if x in present:
                    seen.add(fd[m.name][x])
                else:
                    seen.update(self.codomain[m.name])

    def fill(self, name: str, x: tuple, cap: int | None = None):
        seen = self.out[name][x]
        for y in self.codomain[name]:
            if cap is not None and len(seen) >= cap:
                return
            if y in seen:
                continue
            found = next(self.search.search(seed={name: {x: y}}), None)
            if found is not None:
                self.harvest(*found)


def _rank_key(w: Workflow, attrs):
    ranks = [{v: i for i, v in enumerate(w.domains[a])} for a in attrs]
    return lambda t: tuple(r[v] for r, v in zip(ranks, t))


def workflow_out(relation: Relation, w: Workflow, hidden: Iterable[str], module: str, x: Sequence) -> set[tuple]:
    """Outputs y such that some world sends every occurrence of ``x`` to y.

    A world in which ``x`` never reaches the module satisfies this for
    every y, so such worlds admit the whole co-domain.
    """
    m = w.module(module)
    if not m.is_private:
        raise ValueError(f"{module} is not private")
    x = tuple(x)
    tracker = _OutTracker(w, relation, hidden)
    if x not in tracker.out[module]:
        raise InputNotInRelation(f"{list(x)} never reaches {module}")
    first = next(tracker.search.search(), None)
    if first is not None:
        tracker.harvest(*first)
    tracker.fill(module, x)
    return set(tracker.out[module][x])


@dataclass(frozen=True)
class ModuleReport:
    module: str
    target: int
    gamma: int
    outs: tuple[tuple[tuple, int], ...]

    def to_json(self):
        return {
            "gamma": self.gamma,
            "target": self.target,
            "inputs": [{"input": list(x), "outputs": n} for x, n in self.outs],
        }


@dataclass(frozen=True)
class PrivacyReport:
    hidden: tuple[str, ...]
    gamma: int
    modules: tuple[ModuleReport, ...]
    capped: bool = False

    @property
    def holds(self) -> bool:
        return all(r.gamma >= r.target for r in self.modules)

    def module(self, name: str) -> ModuleReport:
        return next(r for r in self.modules if r.module == name)

    def to_json(self):
        return {
            "hidden": list(self.hidden),
            "gamma": self.gamma,
            "holds": self.holds,
            "capped": self.capped,
            "modules": {r.module: r.to_json() for r in self.modules},
        }


def gamma_achieved(
    relation: Relation,
    w: Workflow,
    hidden: Iterable[str],
    targets=1,
    cap: int | None = None,
) -> PrivacyReport:
    """Exact Γ per private module under the possible-worlds oracle.

    ``targets`` only labels the report. With ``cap`` set, counting for an
    input stops once that many outputs are known, which is enough to
    decide whether a target is met but makes the reported Γ a lower bound.
    """
    hidden = w.sort_attrs(hidden)
    goal = _targets(w, targets)
    tracker = _OutTracker(w, relation, hidden)
    first = next(tracker.search.search(), None)
    if first is not None:
        tracker.harvest(*first)
    reports = []
    for m in w.private_modules:
        for x in tracker.inputs[m.name]:
            tracker.fill(m.name, x, cap)
    for m in w.private_modules:
        outs = tuple((x, len(tracker.out[m.name][x])) for x in tracker.inputs[m.name])
        g = min((n for _, n in outs), default=len(tracker.codomain[m.name]))
        if cap is not None:
            g = min(g, cap)
        reports.append(ModuleReport(m.name, goal[m.name], g, outs))
    overall = min((r.gamma for r in reports), default=0)
    return PrivacyReport(hidden, overall, tuple(reports), cap is not None)


# ---------------------------------------------------------------- assembly


@dataclass(frozen=True)
class PlanPart:
    module: str
    safe: tuple[str, ...]
    closure: tuple[str, ...]
    picks: Mapping[str, tuple[str, ...]]
    hidden: tuple[str, ...]

    def to_json(self):
        return {
            "safe": list(self.safe),
            "closure": list(self.closure),
            "picks": {k: list(v) for k, v in self.picks.items()},
            "hidden": list(self.hidden),
        }


@dataclass(frozen=True)
class AssemblyPlan:
    route: str
    targets: Mapping[str, int]
    parts: tuple[PlanPart, ...]
    hidden: tuple[str, ...]
    cost: float = 0

    def part(self, module: str) -> PlanPart:
        return next(p for p in self.parts if p.module == module)

    def to_json(self):
        return {
            "route": self.route,
            "hidden": list(self.hidden),
            "cost": self.cost,
            "targets": dict(self.targets),
            "modules": {p.module: p.to_json() for p in self.parts},
        }


def _hidden_of(choice) -> set[str]:
    if isinstance(choice, tuple) and len(choice) == 2 and isinstance(choice[1], Mapping):
        safe, picks = choice
        return set(safe).union(*(set(v) for v in picks.values()))
    return set(choice)


def _outside_inputs(w: Workflow, m: Module, closure) -> list[tuple[tuple[str, ...], list[str]]]:
    """Closure groups that feed a private module yet read attributes ``m`` does not produce."""
    found = []
    for names in _groups(w, closure):
        mods = [w.module(n) for n in names]
        produced = {a for g in mods for a in g.outputs}
        reads = {a for g in mods for a in g.inputs} - produced
        feeds_private = any(c.is_private for a in produced for c in w.consumers(a))
        if feeds_private and not reads <= set(m.outputs):
            found.append((names, list(w.sort_attrs(reads - set(m.outputs)))))
    return found


def _assemble(w: Workflow, choices, gamma, route: str, strict: bool = False) -> AssemblyPlan:
    goal = _targets(w, gamma)
    parts = []
    for m in w.private_modules:
        hidden_i = _hidden_of(choices.get(m.name, ()))
        unknown = hidden_i - set(w.attributes)
        if unknown:
            raise ConditionViolated("iii", {"module": m.name, "unknown": sorted(unknown)})
        safe = w.sort_attrs(hidden_i & set(m.outputs))
        if not is_standalone_safe(m, safe, goal[m.name], w.domains):
            raise ConditionViolated("i", {"module": m.name, "safe": list(safe), "gamma": goal[m.name]})
        if route == SINGLE_PRED:
            closure = public_closure(w, safe)
            check, label = is_udsafe, "UD-safe"
        else:
            closure = downward_closure(w, safe)
            check, label = is_dsafe, "D-safe"
        allowed = set(m.outputs).union(*(set(w.module(j).attrs) for j in closure))
        outside = hidden_i - allowed
        if outside:
            raise ConditionViolated("iii", {"module": m.name, "outside": list(w.sort_attrs(outside))})
        picks = {}
        for j in closure:
            mj = w.module(j)
            local = w.sort_attrs(hidden_i & set(mj.attrs))
            if not check(mj, local):
                raise ConditionViolated("ii", {"module": m.name, "closure_module": j,
                                               "hidden": list(local), "needs": label})
            picks[j] = local
        if strict and route == SINGLE_PRED:
            for names, extra in _outside_inputs(w, m, closure):
                raise ConditionViolated("closure-inputs", {"module": m.name, "group": list(names), "reads": extra})
        parts.append(PlanPart(m.name, safe, tuple(closure), picks, w.sort_attrs(hidden_i)))
    if route == SINGLE_PRED:
        for a, b in itertools.combinations(parts, 2):
            shared = set(a.hidden) & set(b.hidden)
            if shared:
                raise ConditionViolated("disjoint", {"modules": [a.module, b.module], "shared": list(w.sort_attrs(shared))})
    hidden = w.sort_attrs(set().union(*(set(p.hidden) for p in parts)) if parts else ())
    return AssemblyPlan(route, goal, tuple(parts), hidden, cost_of(w.costs, hidden))


def assemble_single_pred(w: Workflow, choices: Mapping[str, Any], gamma=2, strict: bool = False) -> AssemblyPlan:
    """Combine per-module choices into one hidden set for a single-predecessor workflow.

    Each choice is either ``(safe_subset, {public_module: subset})`` or the
    module's whole hidden set. Private modules without a choice hide
    nothing, which only passes when their target is 1.

    The theorem's three conditions are not enough when a closure group
    that feeds a private module also reads an initial input: the oracle
    then finds plans that pass and still leave Γ at 1. ``strict=True``
    rejects such groups with ``ConditionViolated("closure-inputs")``.
    """
    cls = classify_single_predecessor(w)
    if not cls.is_single_predecessor:
        raise NotSinglePredecessor(cls)
    return _assemble(w, choices, gamma, SINGLE_PRED, strict)


def assemble_general(w: Workflow, choices: Mapping[str, Any], gamma=2) -> AssemblyPlan:
    """Like :func:`assemble_single_pred`, with downward closures and D-safety."""
    return _assemble(w, choices, gamma, GENERAL)


# ---------------------------------------------------------------- witnesses


def _as_dict(attrs, values) -> dict[str, Any]:
    return dict(zip(attrs, values))


def construct_witness_world(
    w: Workflow,
    module: str,
    safe: Iterable[str],
    x: Sequence,
    y: Sequence,
    hidden: Iterable[str],
    relation: Relation | None = None,
    route: str | None = None,
) -> Relation:
    """Build a possible world in which private ``module`` maps ``x`` to ``y``.

    The alternative world redefines modules by swapping ``y`` with the
    true output ``z``. On single-predecessor workflows the swap is
    propagated through each public-closure component: a component whose
    outputs reach a private module is keyed on its own output, so that the
    downstream private modules can undo the swap. Elsewhere only the
    chosen module changes and downstream D-safety absorbs the difference.
    """
    m = w.module(module)
    if not m.is_private:
        raise PreconditionViolated(f"{module} is not private")
    safe = set(safe)
    hidden = set(hidden)
    if not safe <= set(m.outputs) or not safe <= hidden:
        raise PreconditionViolated("the safe subset must be hidden outputs of the module")
    x = tuple(x)
    if x not in m.table:
        raise PreconditionViolated(f"{list(x)} is not an input of {module}")
    y = tuple(y)
    z = m.table[x]
    if any(a not in safe and yv != zv for a, yv, zv in zip(m.outputs, y, z)):
        raise PreconditionViolated(f"{list(y)} differs from {list(z)} on a visible output")
    if relation is None:
        relation = workflow_relation(w)
    if route is None:
        route = SINGLE_PRED if classify_single_predecessor(w).is_single_predecessor else GENERAL

    yd, zd = _as_dict(m.outputs, y), _as_dict(m.outputs, z)
    overrides = {}
    if route == GENERAL:
        overrides[m.name] = lambda u: tuple(flip(yd, zd, _as_dict(m.outputs, m.table[u]))[a] for a in m.outputs)
    else:
        overrides.update(_single_pred_overrides(w, m, safe, yd, zd))

    init = w.initial_inputs
    starts = sorted(relation.project(init).rows, key=_rank_key(w, init))
    world = workflow_relation(w, starts, overrides)
    if not is_possible_world(world, relation, w, hidden):
        raise PreconditionViolated("the constructed relation is not a possible world for this hidden set")
    for row in world.as_dicts():
        if tuple(row[a] for a in m.inputs) == x and tuple(row[a] for a in m.outputs) != y:
            raise PreconditionViolated("the constructed world does not send x to y")
    return world


def _single_pred_overrides(w: Workflow, m: Module, safe, yd, zd):
    closure = public_closure(w, safe)
    groups = _groups(w, closure)
    big_y, big_z = dict(yd), dict(zd)
    keyed = []
    for names in groups:
        comp = compose_public(w, names, allow_disconnected=False)
        if not set(comp.inputs) <= set(m.outputs):
            raise PreconditionViolated(
                f"public group {list(names)} reads {sorted(set(comp.inputs) - set(m.outputs))}, not only outputs of {m.name}")
        feeds_private = any(c.is_private for a in comp.outputs for c in w.consumers(a))
        wy = comp.table[tuple(yd[a] for a in comp.inputs)]
        wz = comp.table[tuple(zd[a] for a in comp.inputs)]
        if feeds_private and wy != wz:
            big_y.update(zip(comp.outputs, wy))
            big_z.update(zip(comp.outputs, wz))
            keyed.append(comp)
    keyed_inputs = {a for comp in keyed for a in comp.inputs}
    rest = [a for a in m.outputs if a not in keyed_inputs]

    def chosen(u):
        out = _as_dict(m.outputs, m.table[u])
        new = dict(flip(big_y, big_z, {a: out[a] for a in rest}))
        for comp in keyed:
            part = {a: out[a] for a in comp.inputs}
            pivot = _as_dict(comp.outputs, comp.table[tuple(part[a] for a in comp.inputs)])
            new.update(eflip(big_y, big_z, pivot, part))
        return tuple(new[a] for a in m.outputs)

    overrides = {m.name: chosen}
    for other in w.private_modules:
        if other.name == m.name:
            continue
        overrides[other.name] = _undo(other, big_y, big_z)
    return overrides


def _undo(mod: Module, big_y, big_z):
    def run(u):
        flipped = flip(big_y, big_z, _as_dict(mod.inputs, u))
        return mod.table[tuple(flipped[a] for a in mod.inputs)]
    return run


def _groups(w: Workflow, names: Sequence[str]) -> list[tuple[str, ...]]:
    """Split a set of public modules into attribute-connected groups."""
    left = [w.module(n) for n in names]
    groups = []
    while left:
        group = [left.pop(0)]
        grown = True
        while grown:
            grown = False
            for cand in list(left):
                if any(set(cand.attrs) & set(g.attrs) for g in group):
                    group.append(cand)
                    left.remove(cand)
                    grown = True
        groups.append(tuple(g.name for g in w.order if g in group))
    return groups


def format_relation(rel: Relation, w: Workflow, hidden: Iterable[str] = ()) -> str:
    """Render rows as comma-separated text; hidden columns appear in brackets."""
    hidden = set(hidden)
    head = ",".join(f"[{a}]" if a in hidden else a for a in rel.schema)
    lines = [head] + [",".join(map(str, r)) for r in rel.sorted_rows(w.domains)]
    return "\n".join(lines) + "\n"
