"""Attribute domains, module tables, workflow construction and the cost model."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Any, Iterable, Mapping, Sequence

PUBLIC = "public"
PRIVATE = "private"


class ModelError(Exception):
    """A workflow description violates a structural assumption.

    ``violations`` holds every ``(kind, detail)`` pair found, so a caller can
    report all problems at once instead of fixing them one by one.
    """

    kind = "ModelError"

    def __init__(self, violations: Sequence[tuple[str, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(f"{k}: {d}" for k, d in self.violations))


class CycleDetected(ModelError):
    kind = "CycleDetected"


class DuplicateOutputAttr(ModelError):
    kind = "DuplicateOutputAttr"


class PartialTable(ModelError):
    kind = "PartialTable"


class UnknownAttribute(ModelError):
    kind = "UnknownAttribute"


class DuplicateModule(ModelError):
    kind = "DuplicateModule"


class InvalidDomain(ModelError):
    kind = "InvalidDomain"


class SpecParseError(ValueError):
    """The description is not shaped like a workflow spec at all."""


_ERROR_CLASSES = {
    cls.kind: cls
    for cls in (CycleDetected, DuplicateOutputAttr, PartialTable, UnknownAttribute, DuplicateModule, InvalidDomain)
}


@dataclass(frozen=True)
class Relation:
    """A set of rows over an ordered attribute schema."""

    schema: tuple[str, ...]
    rows: frozenset[tuple] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rows", frozenset(tuple(r) for r in self.rows))
        width = len(self.schema)
        for r in self.rows:
            if len(r) != width:
                raise ValueError(f"row {r!r} does not match schema {self.schema!r}")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def index(self, attrs: Iterable[str]) -> tuple[int, ...]:
        pos = {a: i for i, a in enumerate(self.schema)}
        return tuple(pos[a] for a in attrs)

    def project(self, attrs: Sequence[str]) -> "Relation":
        idx = self.index(attrs)
        return Relation(tuple(attrs), frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def satisfies_fd(self, lhs: Sequence[str], rhs: Sequence[str]) -> bool:
        li, ri = self.index(lhs), self.index(rhs)
        seen: dict[tuple, tuple] = {}
        for r in self.rows:
            key = tuple(r[i] for i in li)
            val = tuple(r[i] for i in ri)
            if seen.setdefault(key, val) != val:
                return False
        return True

    def as_dicts(self) -> list[dict[str, Any]]:
        return [dict(zip(self.schema, r)) for r in self.rows]

    def sorted_rows(self, domains: Mapping[str, Sequence] | None = None) -> list[tuple]:
        """Rows ordered by domain position of each value, left to right."""
        if domains is None:
            return sorted(self.rows, key=lambda r: tuple(map(repr, r)))
        ranks = [{v: i for i, v in enumerate(domains[a])} for a in self.schema]
        return sorted(self.rows, key=lambda r: tuple(rk[v] for rk, v in zip(ranks, r)))


@dataclass(frozen=True, eq=False)
class Module:
    """A finite total function from input attributes to output attributes."""

    name: str
    visibility: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    table: Mapping[tuple, tuple] = field(repr=False)

    @property
    def is_public(self) -> bool:
        return self.visibility == PUBLIC

    @property
    def is_private(self) -> bool:
        return self.visibility == PRIVATE

    @property
    def attrs(self) -> tuple[str, ...]:
        return self.inputs + self.outputs

    def __call__(self, x: Sequence) -> tuple:
        return self.table[tuple(x)]

    def apply(self, values: Mapping[str, Any]) -> dict[str, Any]:
        out = self.table[tuple(values[a] for a in self.inputs)]
        return dict(zip(self.outputs, out))

    def relation(self) -> Relation:
        return Relation(self.attrs, frozenset(k + v for k, v in self.table.items()))

    def __eq__(self, other):
        if not isinstance(other, Module):
            return NotImplemented
        return (self.name, self.visibility, self.inputs, self.outputs, dict(self.table)) == (
            other.name, other.visibility, other.inputs, other.outputs, dict(other.table))

    def __hash__(self):
        return hash((self.name, self.inputs, self.outputs))


@dataclass(frozen=True, eq=False)
class Workflow:
    """A DAG of modules wired by shared attribute names."""

    domains: Mapping[str, tuple]
    costs: Mapping[str, float]
    modules: tuple[Module, ...]

    def __post_init__(self):
        by_name = {m.name: m for m in self.modules}
        producer = {a: m.name for m in self.modules for a in m.outputs}
        consumers: dict[str, list[str]] = {a: [] for a in self.domains}
        for m in self.modules:
            for a in m.inputs:
                consumers[a].append(m.name)
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_producer", producer)
        object.__setattr__(self, "_consumers", {a: tuple(v) for a, v in consumers.items()})
        object.__setattr__(self, "_order", _topological_order(self.modules))

    @property
    def attributes(self) -> tuple[str, ...]:
        """Attributes in declaration order, restricted to those some module uses."""
        used = {a for m in self.modules for a in m.attrs}
        return tuple(a for a in self.domains if a in used)

    @property
    def initial_inputs(self) -> tuple[str, ...]:
        return tuple(a for a in self.attributes if a not in self._producer)

    @property
    def order(self) -> tuple[Module, ...]:
        """Modules in a deterministic topological order."""
        return self._order

    def module(self, name: str) -> Module:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no module named {name!r}") from None

    def producer(self, attr: str) -> Module | None:
        name = self._producer.get(attr)
        return None if name is None else self._by_name[name]

    def consumers(self, attr: str) -> tuple[Module, ...]:
        return tuple(self._by_name[n] for n in self._consumers.get(attr, ()))

    @property
    def private_modules(self) -> tuple[Module, ...]:
        return tuple(m for m in self.order if m.is_private)

    @property
    def public_modules(self) -> tuple[Module, ...]:
        return tuple(m for m in self.order if m.is_public)

    def rank(self, attr: str) -> int:
        return list(self.domains).index(attr)

    def sort_attrs(self, attrs: Iterable[str]) -> tuple[str, ...]:
        pos = {a: i for i, a in enumerate(self.domains)}
        return tuple(sorted(set(attrs), key=pos.__getitem__))

    def __eq__(self, other):
        if not isinstance(other, Workflow):
            return NotImplemented
        return (dict(self.domains) == dict(other.domains) and dict(self.costs) == dict(other.costs)
                and list(self.domains) == list(other.domains) and self.modules == other.modules)

    def __hash__(self):
        return hash(tuple(m.name for m in self.modules))


def _topological_order(modules: Sequence[Module]) -> tuple[Module, ...]:
    producer = {a: m.name for m in modules for a in m.outputs}
    position = {m.name: i for i, m in enumerate(modules)}
    graph = {m.name: {producer[a] for a in m.inputs if a in producer} for m in modules}
    sorter = TopologicalSorter(graph)
    sorter.prepare()
    by_name = {m.name: m for m in modules}
    order = []
    ready: list[str] = []
    while sorter.is_active():
        ready.extend(sorter.get_ready())
        ready.sort(key=position.__getitem__)
        name = ready.pop(0)
        order.append(by_name[name])
        sorter.done(name)
    return tuple(order)


def _check(cond, msg):
    if not cond:
        raise SpecParseError(msg)


def build_workflow(spec: Mapping[str, Any]) -> Workflow:
    """Validate a parsed workflow description and build a :class:`Workflow`.

    All violations are collected; the raised error's class follows the first
    one found and its ``violations`` attribute lists them all.
    """
    _check(isinstance(spec, Mapping), "workflow spec must be an object")
    _check("attributes" in spec and "modules" in spec, "spec needs 'attributes' and 'modules'")
    attrs = spec["attributes"]
    _check(isinstance(attrs, Mapping), "'attributes' must be an object")
    _check(isinstance(spec["modules"], list), "'modules' must be a list")

    violations: list[tuple[str, str]] = []
    domains: dict[str, tuple] = {}
    costs: dict[str, float] = {}
    for name, info in attrs.items():
        _check(isinstance(info, Mapping) and "domain" in info, f"attribute {name!r} needs a domain")
        dom = info["domain"]
        _check(isinstance(dom, list), f"domain of {name!r} must be a list")
        if not name:
            violations.append(("InvalidDomain", "empty attribute name"))
        if len(dom) == 0 or len({json.dumps(v) for v in dom}) != len(dom):
            violations.append(("InvalidDomain", f"domain of {name} must be non-empty with distinct values"))
        cost = info.get("cost", 1)
        _check(isinstance(cost, (int, float)) and not isinstance(cost, bool), f"cost of {name!r} must be a number")
        if cost < 0:
            violations.append(("InvalidDomain", f"cost of {name} is negative"))
        domains[name] = tuple(dom)
        costs[name] = cost

    modules: list[Module] = []
    seen_names: set[str] = set()
    produced: dict[str, str] = {}
    for raw in spec["modules"]:
        _check(isinstance(raw, Mapping), "each module must be an object")
        for key in ("name", "inputs", "outputs", "table"):
            _check(key in raw, f"module is missing {key!r}")
        name = raw["name"]
        vis = raw.get("visibility", PRIVATE)
        _check(vis in (PUBLIC, PRIVATE), f"module {name}: visibility must be public or private")
        ins, outs = tuple(raw["inputs"]), tuple(raw["outputs"])
        if name in seen_names:
            violations.append(("DuplicateModule", f"module name {name} used twice"))
        seen_names.add(name)
        unknown = [a for a in ins + outs if a not in domains]
        for a in unknown:
            violations.append(("UnknownAttribute", f"module {name} uses {a}, which has no domain"))
        if set(ins) & set(outs):
            violations.append(("DuplicateOutputAttr", f"module {name} lists {sorted(set(ins) & set(outs))} as both input and output"))
        if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
            violations.append(("DuplicateOutputAttr", f"module {name} repeats an attribute"))
        if not outs:
            violations.append(("PartialTable", f"module {name} has no outputs"))
        for a in outs:
            if a in produced:
                violations.append(("DuplicateOutputAttr", f"{a} is an output of both {produced[a]} and {name}"))
            produced.setdefault(a, name)
        table: dict[tuple, tuple] = {}
        if not unknown:
            table = _parse_table(name, ins, outs, raw["table"], domains, violations)
        modules.append(Module(name, vis, ins, outs, table))

    if not violations:
        try:
            _topological_order(modules)
        except CycleError as exc:
            violations.append(("CycleDetected", "modules " + " -> ".join(map(str, exc.args[1]))))

    if violations:
        raise _ERROR_CLASSES.get(violations[0][0], ModelError)(violations)
    return Workflow(domains, costs, tuple(modules))


def _parse_table(name, ins, outs, rows, domains, violations) -> dict[tuple, tuple]:
    _check(isinstance(rows, list), f"table of {name} must be a list")
    table: dict[tuple, tuple] = {}
    for pair in rows:
        _check(isinstance(pair, list) and len(pair) == 2, f"table rows of {name} must be [inputs, outputs] pairs")
        x, y = tuple(pair[0]), tuple(pair[1])
        if len(x) != len(ins) or len(y) != len(outs):
            violations.append(("PartialTable", f"module {name}: row {pair} has the wrong arity"))
            continue
        bad = [(a, v) for a, v in zip(ins + outs, x + y) if v not in domains[a]]
        if bad:
            violations.append(("PartialTable", f"module {name}: values {bad} lie outside their domains"))
            continue
        if table.setdefault(x, y) != y:
            violations.append(("PartialTable", f"module {name}: input {list(x)} mapped to two outputs"))
    missing = [x for x in itertools.product(*(domains[a] for a in ins)) if x not in table]
    if missing:
        violations.append(("PartialTable", f"module {name}: no output for {len(missing)} input tuple(s), e.g. {list(missing[0])}"))
    return table


def workflow_to_spec(w: Workflow) -> dict[str, Any]:
    """Serialize a workflow back to the JSON description format."""
    return {
        "attributes": {a: {"domain": list(d), "cost": w.costs[a]} for a, d in w.domains.items()},
        "modules": [
            {
                "name": m.name,
                "visibility": m.visibility,
                "inputs": list(m.inputs),
                "outputs": list(m.outputs),
                "table": [[list(x), list(y)] for x, y in m.table.items()],
            }
            for m in w.modules
        ],
    }


def load_workflow(path) -> Workflow:
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"{path}: {exc}") from exc
    return build_workflow(spec)


def make_module(name, visibility, inputs, outputs, fn, domains) -> Module:
    """Tabulate a Python callable over the product of the input domains.

    ``fn`` receives the input values positionally and returns a tuple (or a
    single value when there is one output).
    """
    table = {}
    for x in itertools.product(*(domains[a] for a in inputs)):
        y = fn(*x)
        table[x] = tuple(y) if isinstance(y, (tuple, list)) else (y,)
    return Module(name, visibility, tuple(inputs), tuple(outputs), table)


def input_product(w: Workflow) -> list[tuple]:
    return list(itertools.product(*(w.domains[a] for a in w.initial_inputs)))


def evaluate(w: Workflow, initial: Mapping[str, Any], modules: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Forward-evaluate one execution.

    ``modules`` may override the function used for a module name; each
    override is called with the input tuple and must return the output tuple.
    """
    values = dict(initial)
    for m in w.order:
        x = tuple(values[a] for a in m.inputs)
        fn = modules.get(m.name) if modules else None
        y = fn(x) if fn is not None else m.table[x]
        values.update(zip(m.outputs, y))
    return values


def workflow_relation(w: Workflow, inputs: Iterable[Sequence] | None = None, modules=None) -> Relation:
    """Execute the workflow once per initial-input tuple.

    When ``inputs`` is omitted the full product of initial-input domains is
    used; an empty iterable yields an empty relation with the full schema.
    """
    schema = w.attributes
    init = w.initial_inputs
    rows = set()
    for p in (input_product(w) if inputs is None else inputs):
        values = evaluate(w, dict(zip(init, p)), modules)
        rows.add(tuple(values[a] for a in schema))
    return Relation(schema, frozenset(rows))


def cost_of(costs: Mapping[str, float], hidden: Iterable[str]) -> float:
    return sum(costs[a] for a in set(hidden))
