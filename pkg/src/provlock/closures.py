"""Public paths, public and downward closures, and single-predecessor checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .model import Module, Workflow


class NotOutputOfPrivate(ValueError):
    pass


def _feeds(a: Module, b: Module) -> bool:
    return bool(set(a.outputs) & set(b.inputs))


def _touches(a: Module, b: Module) -> bool:
    return bool(set(a.attrs) & set(b.attrs))


def _reach(w: Workflow, starts: Iterable[Module], step, allowed) -> set[str]:
    seen = {m.name for m in starts}
    queue = deque(starts)
    while queue:
        cur = queue.popleft()
        for nxt in w.order:
            if nxt.name not in seen and allowed(nxt) and step(cur, nxt):
                seen.add(nxt.name)
                queue.append(nxt)
    return seen


def _ordered(w: Workflow, names: set[str]) -> tuple[str, ...]:
    return tuple(m.name for m in w.order if m.name in names)


def _public(w: Workflow, name: str) -> Module:
    m = w.module(name)
    if not m.is_public:
        raise ValueError(f"{name} is not public")
    return m


def directed_public_path(w: Workflow, source: str, target: str) -> bool:
    start = _public(w, source)
    _public(w, target)
    return target in _reach(w, [start], _feeds, lambda m: m.is_public)


def undirected_public_path(w: Workflow, source: str, target: str) -> bool:
    start = _public(w, source)
    _public(w, target)
    return target in _reach(w, [start], _touches, lambda m: m.is_public)


def public_closure(w: Workflow, hidden: Iterable[str]) -> tuple[str, ...]:
    """Public modules reachable from the hidden outputs of one private module.

    The first module on each path must itself carry the attribute; from
    there the walk moves between public modules sharing any attribute.
    """
    hidden = set(hidden)
    if not hidden:
        return ()
    owners = {w.producer(a) for a in hidden}
    if None in owners or len(owners) != 1 or not next(iter(owners)).is_private:
        raise NotOutputOfPrivate(f"{sorted(hidden)} are not all outputs of one private module")
    starts = [m for m in w.order if m.is_public and hidden & set(m.attrs)]
    if not starts:
        return ()
    return _ordered(w, _reach(w, starts, _touches, lambda m: m.is_public))


def downward_closure(w: Workflow, hidden: Iterable[str]) -> tuple[str, ...]:
    """Modules, public or private, reachable from ``hidden`` by directed paths."""
    hidden = set(hidden)
    starts = [m for m in w.order if hidden & set(m.inputs)]
    if not starts:
        return ()
    return _ordered(w, _reach(w, starts, _feeds, lambda m: True))


def private_predecessors(w: Workflow, target: str) -> tuple[str, ...]:
    """Private modules with a directed public path into public ``target``."""
    found = []
    for p in w.private_modules:
        firsts = [m for m in w.public_modules if _feeds(p, m)]
        if firsts and target in _reach(w, firsts, _feeds, lambda m: m.is_public):
            found.append(p.name)
    return tuple(found)


@dataclass(frozen=True)
class Violation:
    kind: str
    module: str | None = None
    attribute: str | None = None
    detail: str = ""

    def to_json(self):
        return {k: v for k, v in (("kind", self.kind), ("module", self.module),
                                  ("attribute", self.attribute), ("detail", self.detail)) if v}


@dataclass(frozen=True)
class Classification:
    is_single_predecessor: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def to_json(self):
        return {"single_predecessor": self.is_single_predecessor,
                "violations": [v.to_json() for v in self.violations]}


def classify_single_predecessor(w: Workflow) -> Classification:
    violations = []
    for a in w.attributes:
        readers = w.consumers(a)
        if len(readers) > 1:
            names = ", ".join(m.name for m in readers)
            violations.append(Violation("DataSharing", attribute=a, detail=f"{a} is read by {names}"))
    for owner in w.private_modules:
        for name in public_closure(w, owner.outputs):
            preds = private_predecessors(w, name)
            if owner.name not in preds:
                violations.append(Violation(
                    "NoDirectedPath", module=name,
                    detail=f"{name} is in the public closure of {owner.name} but {owner.name} has no directed public path to it"))
            others = [p for p in preds if p != owner.name]
            if others:
                violations.append(Violation(
                    "MultiplePrivatePredecessors", module=name,
                    detail=f"{name} is in the public closure of {owner.name} and also reached by {', '.join(others)}"))
    return Classification(not violations, tuple(violations))
