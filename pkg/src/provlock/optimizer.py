"""Minimum-cost hidden sets: per-closure search and workflow-level assembly."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .closures import classify_single_predecessor, downward_closure, public_closure
from .model import Workflow, cost_of
from .privacy import (
    GENERAL,
    SINGLE_PRED,
    AssemblyPlan,
    NotSinglePredecessor,
    _outside_inputs,
    _targets,
    assemble_general,
    assemble_single_pred,
)
from .safety import enumerate_dsafe, enumerate_udsafe, is_dsafe, is_udsafe
from .standalone import all_subsets, enumerate_safe_subsets, subset_key

BOTH = "both"
ROUTES = (SINGLE_PRED, GENERAL, BOTH)
INF = math.inf


class NotAChain(ValueError):
    pass


class NotATree(ValueError):
    pass


class NoFeasiblePlan(ValueError):
    pass


@dataclass
class DPTable:
    """Costs per (closure module, catalog entry); ``back`` holds the chosen
    entries of the neighbours the cost was built from."""

    modules: tuple[str, ...]
    subsets: list[list[tuple[str, ...]]]
    cost: list[list[float]]
    back: list[list[Any]]

    def to_json(self):
        return {
            name: [
                {"subset": list(s), "cost": None if c == INF else c, "back": b}
                for s, c, b in zip(self.subsets[j], self.cost[j], self.back[j])
            ]
            for j, name in enumerate(self.modules)
        }


@dataclass(frozen=True)
class ClosureResult:
    hidden: tuple[str, ...]
    cost: float
    picks: Mapping[str, tuple[str, ...]]
    shape: str
    table: DPTable | None = field(default=None, compare=False)


def _costs(w: Workflow, costs) -> Mapping[str, float]:
    return w.costs if costs is None else costs


def _allowed(w: Workflow, module: str, safe, name: str, catalog) -> list[tuple[str, ...]]:
    """Catalog entries that hide exactly the safe subset among the owner's outputs."""
    outs = set(w.module(module).outputs)
    need = set(safe) & set(w.module(name).attrs)
    return [tuple(u) for u in catalog if set(u) & outs == need]


def _shared(w: Workflow, a: str, b: str) -> set[str]:
    return set(w.module(a).attrs) & set(w.module(b).attrs)


def _finish(w, module, safe, picks, costs, shape, table=None) -> ClosureResult:
    hidden = set(safe).union(*(set(u) for u in picks.values()))
    ordered = {n: w.sort_attrs(picks[n]) for n in sorted(picks, key=lambda n: [m.name for m in w.order].index(n))}
    return ClosureResult(w.sort_attrs(hidden), cost_of(costs, hidden), ordered, shape, table)


def _better(cand: tuple, best: tuple | None) -> bool:
    return best is None or cand < best


# ---------------------------------------------------------------- chain


def _chain_order(w: Workflow, closure: Sequence[str]) -> list[str]:
    names = [m.name for m in w.order if m.name in set(closure)]
    for i, a in enumerate(names):
        for j in range(i + 1, len(names)):
            touching = bool(_shared(w, a, names[j]))
            if touching != (j == i + 1):
                raise NotAChain(f"{list(names)} do not form a chain")
    return names


def optimize_chain_closure(w: Workflow, module: str, safe, closure, catalogs, costs=None) -> ClosureResult | None:
    """Chain dynamic program; ``None`` when no catalog choice fits.

    Entry (j, l) is the cheapest way to cover modules 1..j with module j
    using its l-th catalog entry. Each module pays for the hidden
    attributes it does not share with its predecessor, so every attribute
    is charged once. Safe-subset attributes outside the chain are added at
    the end.
    """
    costs = _costs(w, costs)
    names = _chain_order(w, closure)
    if not names:
        return _finish(w, module, safe, {}, costs, "chain")
    subsets = [_allowed(w, module, safe, n, catalogs[n]) for n in names]
    cost: list[list[float]] = []
    back: list[list[Any]] = []
    for j, name in enumerate(names):
        row, ptr = [], []
        prev_attrs = set(w.module(names[j - 1]).attrs) if j else set()
        for u in subsets[j]:
            own = cost_of(costs, set(u) - prev_attrs)
            if j == 0:
                row.append(own)
                ptr.append(None)
                continue
            here = set(u) & prev_attrs
            best = None
            for q, v in enumerate(subsets[j - 1]):
                if cost[j - 1][q] == INF or set(v) & set(w.module(name).attrs) != here:
                    continue
                key = (cost[j - 1][q], q)
                if _better(key, best):
                    best = key
            row.append(INF if best is None else own + best[0])
            ptr.append(None if best is None else best[1])
        cost.append(row)
        back.append(ptr)
    table = DPTable(tuple(names), subsets, cost, back)
    finals = [(c, subset_key(subsets[-1][l], w.attributes), l) for l, c in enumerate(cost[-1]) if c < INF]
    if not finals:
        return None
    l = min(finals)[2]
    picks = {}
    for j in range(len(names) - 1, -1, -1):
        picks[names[j]] = subsets[j][l]
        l = back[j][l]
    return _finish(w, module, safe, picks, costs, "chain", table)


# ---------------------------------------------------------------- tree


def _tree_children(w: Workflow, module: str, closure) -> dict[str, list[str]]:
    nodes = [module] + [m.name for m in w.order if m.name in set(closure)]
    edges = {n: [m for m in nodes if m != n and _shared(w, n, m)] for n in nodes}
    children: dict[str, list[str]] = {n: [] for n in nodes}
    seen, stack = {module}, [module]
    while stack:
        cur = stack.pop()
        for nxt in edges[cur]:
            if nxt in seen:
                continue
            seen.add(nxt)
            children[cur].append(nxt)
            stack.append(nxt)
    if len(seen) != len(nodes):
        raise NotATree(f"{sorted(set(nodes) - seen)} are not reachable from {module}")
    if sum(len(c) for c in children.values()) != sum(len(e) for e in edges.values()) // 2:
        raise NotATree(f"the closure of {module} contains a cycle")
    return children


def optimize_tree_closure(w: Workflow, module: str, safe, closure, catalogs, costs=None) -> ClosureResult | None:
    """Bottom-up dynamic program over a closure shaped as a tree under ``module``.

    A node pays for its hidden attributes that none of its children
    carry; children are matched on the attributes they share with their
    parent. The owner pays for its safe attributes no child carries.
    """
    costs = _costs(w, costs)
    children = _tree_children(w, module, closure)
    names = [m.name for m in w.order if m.name in set(closure)]
    idx = {n: j for j, n in enumerate(names)}
    subsets = [_allowed(w, module, safe, n, catalogs[n]) for n in names]
    cost = [[INF] * len(s) for s in subsets]
    back: list[list[Any]] = [[None] * len(s) for s in subsets]

    def best_child(child, parent_attrs, parent_hidden):
        j = idx[child]
        best = None
        for l, u in enumerate(subsets[j]):
            if cost[j][l] == INF or set(u) & parent_attrs != parent_hidden:
                continue
            key = (cost[j][l], subset_key(u, w.attributes), l)
            if _better(key, best):
                best = key
        return best

    def solve(node):
        for c in children[node]:
            solve(c)
        if node == module:
            return
        j = idx[node]
        attrs = set(w.module(node).attrs)
        below = set().union(*(set(w.module(c).attrs) for c in children[node]))
        for l, u in enumerate(subsets[j]):
            total = cost_of(costs, set(u) - below)
            ptr = {}
            for c in children[node]:
                found = best_child(c, attrs, set(u) & set(w.module(c).attrs))
                if found is None:
                    total = INF
                    break
                total += found[0]
                ptr[c] = found[2]
            cost[j][l] = total
            back[j][l] = ptr if total < INF else None

    solve(module)
    table = DPTable(tuple(names), subsets, cost, back)
    below = set().union(*(set(w.module(c).attrs) for c in children[module]))
    total = cost_of(costs, set(safe) - below)
    picks = {}
    stack = []
    for c in children[module]:
        # the owner-side filter already fixed what each child hides of the owner's outputs
        found = best_child(c, set(), set())
        if found is None:
            return None
        total += found[0]
        stack.append((c, found[2]))
    while stack:
        node, l = stack.pop()
        picks[node] = subsets[idx[node]][l]
        stack.extend(back[idx[node]][l].items())
    result = _finish(w, module, safe, picks, costs, "tree", table)
    assert math.isclose(result.cost, total), (result.cost, total)
    return result


# ---------------------------------------------------------------- DAG


def _pick_search(w: Workflow, module: str, safe, names: Sequence[str], options, costs) -> dict | None:
    """Backtracking over catalog picks with consistency checks and a cost bound."""
    best: list[Any] = [None, None]
    attrs = {n: set(w.module(n).attrs) for n in names}
    chosen: dict[str, tuple] = {}

    def walk(k, hidden):
        bound = (cost_of(costs, hidden),)
        if best[0] is not None and bound[0] > best[0][0]:
            return
        if k == len(names):
            key = (bound[0], subset_key(hidden, w.attributes))
            if _better(key, best[0]):
                best[0], best[1] = key, dict(chosen)
            return
        name = names[k]
        for u in options[name]:
            su = set(u)
            if any(su & attrs[p] != set(chosen[p]) & attrs[name] for p in chosen):
                continue
            chosen[name] = u
            walk(k + 1, hidden | su)
            del chosen[name]

    walk(0, set(safe))
    return best[1]


def optimize_dag_closure(w: Workflow, module: str, safe, closure, catalogs, costs=None) -> ClosureResult | None:
    """Exhaustive search over one catalog entry per closure module."""
    costs = _costs(w, costs)
    names = [m.name for m in w.order if m.name in set(closure)]
    options = {n: _allowed(w, module, safe, n, catalogs[n]) for n in names}
    picks = _pick_search(w, module, safe, names, options, costs)
    if picks is None:
        return None
    return _finish(w, module, safe, picks, costs, "dag")


def optimize_closure(w: Workflow, module: str, safe, closure, catalogs, costs=None) -> ClosureResult | None:
    """Use the chain DP, then the tree DP, then exhaustive search, whichever fits the shape."""
    try:
        return optimize_chain_closure(w, module, safe, closure, catalogs, costs)
    except NotAChain:
        pass
    try:
        return optimize_tree_closure(w, module, safe, closure, catalogs, costs)
    except NotATree:
        return optimize_dag_closure(w, module, safe, closure, catalogs, costs)


def brute_force_closure(w: Workflow, module: str, safe, closure, costs=None, downstream_only=False) -> ClosureResult | None:
    """Reference minimum over raw attribute subsets, used to check the DPs.

    Tries every hidden set between the safe subset and the closure's
    attributes that hides nothing else of the owner's outputs, and keeps
    the cheapest one under which every closure module is UD-safe (or
    D-safe with ``downstream_only``).
    """
    costs = _costs(w, costs)
    check = is_dsafe if downstream_only else is_udsafe
    names = [m.name for m in w.order if m.name in set(closure)]
    outs = set(w.module(module).outputs)
    pool = w.sort_attrs(set().union(*(set(w.module(n).attrs) for n in names)) - outs) if names else ()
    best = None
    for extra in all_subsets(pool):
        hidden = set(safe) | set(extra)
        if all(check(w.module(n), hidden & set(w.module(n).attrs)) for n in names):
            key = (cost_of(costs, hidden), subset_key(hidden, w.attributes), tuple(extra))
            if _better(key, best):
                best = key
    if best is None:
        return None
    hidden = set(safe) | set(best[2])
    picks = {n: w.sort_attrs(hidden & set(w.module(n).attrs)) for n in names}
    return _finish(w, module, safe, picks, costs, "brute")


# ---------------------------------------------------------------- workflow


@dataclass(frozen=True)
class ModuleChoice:
    module: str
    safe: tuple[str, ...]
    closure: tuple[str, ...]
    result: ClosureResult

    def to_json(self, debug=False):
        out = {
            "safe": list(self.safe),
            "closure": list(self.closure),
            "shape": self.result.shape,
            "hidden": list(self.result.hidden),
            "cost": self.result.cost,
        }
        if debug and self.result.table is not None:
            out["table"] = self.result.table.to_json()
        return out


@dataclass(frozen=True)
class OptimizeResult:
    route: str
    hidden: tuple[str, ...]
    cost: float
    plan: AssemblyPlan
    choices: tuple[ModuleChoice, ...]

    def to_json(self, debug=False):
        return {
            "route": self.route,
            "hidden": list(self.hidden),
            "cost": self.cost,
            "modules": {c.module: c.to_json(debug) for c in self.choices},
        }


def _best_for_module(w: Workflow, name: str, target: int, route: str, costs, strict=False) -> ModuleChoice | None:
    m = w.module(name)
    safe_subsets = enumerate_safe_subsets(m, target, w.domains).subsets
    catalog_cache: dict[str, tuple] = {}
    enumerate_catalog = enumerate_udsafe if route == SINGLE_PRED else enumerate_dsafe
    best = None
    for safe in safe_subsets:
        if route == SINGLE_PRED:
            closure = public_closure(w, safe)
            if strict and _outside_inputs(w, m, closure):
                continue
        else:
            closure = downward_closure(w, safe)
        for n in closure:
            if n not in catalog_cache:
                catalog_cache[n] = enumerate_catalog(w.module(n)).subsets
        if route == SINGLE_PRED:
            res = optimize_closure(w, name, safe, closure, catalog_cache, costs)
        else:
            res = optimize_dag_closure(w, name, safe, closure, catalog_cache, costs)
        if res is None:
            continue
        key = (res.cost, subset_key(res.hidden, w.attributes))
        if best is None or key < best[0]:
            best = (key, ModuleChoice(name, tuple(safe), tuple(closure), res))
    return None if best is None else best[1]


def _route(w: Workflow, targets: dict[str, int], route: str, costs, jobs: int, strict: bool = False) -> OptimizeResult:
    names = [m.name for m in w.private_modules]
    args = [(w, n, targets[n], route, costs, strict) for n in names]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(_best_for_module, *zip(*args)))
    else:
        found = [_best_for_module(*a) for a in args]
    missing = [n for n, c in zip(names, found) if c is None]
    if missing:
        raise NoFeasiblePlan(f"no hidden set meets the target for {', '.join(missing)}")
    choices = {c.module: c.result.hidden for c in found}
    if route == SINGLE_PRED:
        plan = assemble_single_pred(w, choices, targets, strict=strict)
    else:
        plan = assemble_general(w, choices, targets)
    plan = AssemblyPlan(plan.route, plan.targets, plan.parts, plan.hidden, cost_of(costs, plan.hidden))
    return OptimizeResult(route, plan.hidden, plan.cost, plan, tuple(found))


def optimize_workflow(
    w: Workflow, gamma=2, costs=None, route: str = SINGLE_PRED, jobs: int = 1, strict: bool = False
) -> OptimizeResult:
    """Cheapest theorem-backed hidden set for the whole workflow.

    Every safe subset of every private module is tried, the cheapest
    closure extension is kept per module, and the per-module sets are
    joined. ``gamma`` is one target for all private modules or a mapping
    from module name to target (unlisted modules get 1). ``route="both"``
    runs both routes and keeps the cheaper plan. ``strict`` skips safe
    subsets whose closure trips the extra check of :func:`assemble_single_pred`.
    """
    if route not in ROUTES:
        raise ValueError(f"route must be one of {', '.join(ROUTES)}")
    costs = _costs(w, costs)
    targets = _targets(w, gamma)
    if route == SINGLE_PRED:
        cls = classify_single_predecessor(w)
        if not cls.is_single_predecessor:
            raise NotSinglePredecessor(cls)
        return _route(w, targets, SINGLE_PRED, costs, jobs, strict)
    if route == GENERAL:
        return _route(w, targets, GENERAL, costs, jobs)
    results = []
    if classify_single_predecessor(w).is_single_predecessor:
        try:
            results.append(_route(w, targets, SINGLE_PRED, costs, jobs, strict))
        except NoFeasiblePlan:
            pass
    try:
        results.append(_route(w, targets, GENERAL, costs, jobs))
    except NoFeasiblePlan:
        pass
    if not results:
        raise NoFeasiblePlan("neither route finds a plan")
    return min(results, key=lambda r: (r.cost, subset_key(r.hidden, w.attributes)))
