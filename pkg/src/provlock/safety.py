"""Downstream/upstream safety of public modules and composite public modules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .model import Module, Relation, Workflow
from .standalone import all_subsets


class TableLike(Protocol):
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    table: Mapping[tuple, tuple]


class NotConnected(ValueError):
    pass


class NonPublicMember(ValueError):
    pass


def _visible_positions(attrs: Sequence[str], hidden) -> tuple[int, ...]:
    return tuple(i for i, a in enumerate(attrs) if a not in hidden)


def _key(t: tuple, pos: tuple[int, ...]) -> tuple:
    return tuple(t[i] for i in pos)


def _classes(m: TableLike, hidden) -> tuple[dict, dict]:
    """Group inputs by their visible part, and outputs by theirs."""
    ipos = _visible_positions(m.inputs, hidden)
    opos = _visible_positions(m.outputs, hidden)
    by_input: dict[tuple, set] = {}
    by_output: dict[tuple, set] = {}
    for x, y in m.table.items():
        by_input.setdefault(_key(x, ipos), set()).add(_key(y, opos))
        by_output.setdefault(_key(y, opos), set()).add(_key(x, ipos))
    return by_input, by_output


def is_dsafe(m: TableLike, hidden: Iterable[str]) -> bool:
    """Inputs that look alike always produce outputs that look alike."""
    by_input, _ = _classes(m, frozenset(hidden))
    return all(len(ys) == 1 for ys in by_input.values())


def is_usafe(m: TableLike, hidden: Iterable[str]) -> bool:
    """Outputs that look alike only come from inputs that look alike."""
    _, by_output = _classes(m, frozenset(hidden))
    return all(len(xs) == 1 for xs in by_output.values())


def is_udsafe(m: TableLike, hidden: Iterable[str]) -> bool:
    hidden = frozenset(hidden)
    return is_dsafe(m, hidden) and is_usafe(m, hidden)


def _udsafe_by_counting(m: TableLike, hidden) -> bool:
    ipos = _visible_positions(m.inputs, hidden)
    opos = _visible_positions(m.outputs, hidden)
    label: dict[tuple, tuple] = {}
    for x, y in m.table.items():
        xp, yp = _key(x, ipos), _key(y, opos)
        if label.setdefault(xp, yp) != yp:
            return False
    return len(label) == len(set(label.values()))


@dataclass(frozen=True)
class UDSafeCatalog:
    module: str
    subsets: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict[str, Any]:
        return {"module": self.module, "subsets": [list(s) for s in self.subsets]}

    def __contains__(self, subset) -> bool:
        return frozenset(subset) in {frozenset(s) for s in self.subsets}


def enumerate_udsafe(m: TableLike) -> UDSafeCatalog:
    """All hidden subsets for which ``m`` is both upstream- and downstream-safe.

    For each candidate the inputs are grouped by their visible part; every
    group must agree on the visible output, and the map from visible input
    to visible output must then be one-to-one, which is checked by
    comparing the number of distinct keys on each side.
    """
    attrs = tuple(m.inputs) + tuple(m.outputs)
    return UDSafeCatalog(m.name, tuple(h for h in all_subsets(attrs) if _udsafe_by_counting(m, frozenset(h))))


def enumerate_dsafe(m: TableLike) -> UDSafeCatalog:
    attrs = tuple(m.inputs) + tuple(m.outputs)
    return UDSafeCatalog(m.name, tuple(h for h in all_subsets(attrs) if is_dsafe(m, h)))


@dataclass(frozen=True, eq=False)
class CompositeModule:
    """Several connected public modules viewed as one.

    ``inputs`` are attributes the members read but do not produce,
    ``outputs`` are member outputs that leave the group or are final, and
    ``table`` maps each boundary input tuple to its boundary output tuple.
    """

    name: str
    members: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    table: Mapping[tuple, tuple]
    joined: Relation

    @property
    def attrs(self) -> tuple[str, ...]:
        return self.inputs + self.outputs


def _connected(mods: Sequence[Module]) -> bool:
    seen = {mods[0].name}
    stack = [mods[0]]
    while stack:
        cur = stack.pop()
        for other in mods:
            if other.name not in seen and set(cur.attrs) & set(other.attrs):
                seen.add(other.name)
                stack.append(other)
    return len(seen) == len(mods)


def compose_public(w: Workflow, members: Iterable[str], allow_disconnected: bool = False) -> CompositeModule:
    """Materialize the sub-workflow formed by ``members`` as one module."""
    names = set(members)
    mods = [m for m in w.order if m.name in names]
    missing = names - {m.name for m in mods}
    if missing:
        raise KeyError(f"unknown modules {sorted(missing)}")
    if not mods:
        raise NotConnected("a composite needs at least one member")
    for m in mods:
        if not m.is_public:
            raise NonPublicMember(f"{m.name} is private")
    if not allow_disconnected and not _connected(mods):
        raise NotConnected(f"modules {sorted(names)} do not form a connected group")
    produced = {a for m in mods for a in m.outputs}
    inputs = w.sort_attrs(a for m in mods for a in m.inputs if a not in produced)
    outputs = w.sort_attrs(
        a for a in produced
        if not w.consumers(a) or any(c.name not in names for c in w.consumers(a))
    )
    schema = w.sort_attrs(set(inputs) | {a for m in mods for a in m.attrs})
    table, rows = {}, set()
    for x in itertools.product(*(w.domains[a] for a in inputs)):
        vals = dict(zip(inputs, x))
        for m in mods:
            vals.update(m.apply(vals))
        table[x] = tuple(vals[a] for a in outputs)
        rows.add(tuple(vals[a] for a in schema))
    label = "+".join(m.name for m in mods)
    return CompositeModule(label, tuple(m.name for m in mods), inputs, outputs, table, Relation(schema, frozenset(rows)))
