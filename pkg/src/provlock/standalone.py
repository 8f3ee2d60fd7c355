"""Possible worlds and Γ-privacy of a single module in isolation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .model import PRIVATE, Module, Relation, Workflow
from .worlds import CompletionSearch


class InputNotInRelation(KeyError):
    pass


def _alone(m: Module, domains: Mapping[str, Sequence]) -> Workflow:
    doms = {a: tuple(domains[a]) for a in m.attrs}
    solo = Module(m.name, PRIVATE, m.inputs, m.outputs, m.table)
    return Workflow(doms, {a: 0 for a in doms}, (solo,))


def _search(m, hidden, domains) -> CompletionSearch:
    return CompletionSearch(_alone(m, domains), m.relation(), hidden)


def standalone_worlds(m: Module, hidden: Iterable[str], domains, limit: int | None = None) -> Iterator[Relation]:
    """Yield each distinct possible world of the module's own relation.

    A world completes every row of the table on the hidden attributes so
    that the input still determines the output. ``limit`` stops the
    iterator after that many worlds.
    """
    search = _search(m, hidden, domains)
    seen = set()
    for rows, _ in search.search():
        rel = search.as_relation(rows)
        if rel.rows in seen:
            continue
        seen.add(rel.rows)
        yield rel
        if limit is not None and len(seen) >= limit:
            return


def count_standalone_worlds(m: Module, hidden, domains) -> int:
    return sum(1 for _ in standalone_worlds(m, hidden, domains))


def _check_input(m: Module, x) -> tuple:
    x = tuple(x)
    if x not in m.table:
        raise InputNotInRelation(f"{list(x)} is not an input of {m.name}")
    return x


def standalone_out(m: Module, x: Sequence, hidden: Iterable[str], domains, cap: int | None = None) -> set[tuple]:
    """Outputs that some possible world pairs with input ``x``.

    ``cap`` stops the search once that many outputs are known.
    """
    x = _check_input(m, x)
    hidden = frozenset(hidden)
    if not hidden & set(m.inputs):
        z = m.table[x]
        choices = [list(domains[a]) if a in hidden else [v] for a, v in zip(m.outputs, z)]
        return set(itertools.product(*choices))
    search = _search(m, hidden, domains)
    found: set[tuple] = set()
    for y in itertools.product(*(domains[a] for a in m.outputs)):
        pin = dict(zip(m.inputs, x))
        pin.update(zip(m.outputs, y))
        seed = {m.name: {x: y}}
        for i in range(len(search.rows)):
            if next(search.search(seed=seed, pins={i: pin}), None) is not None:
                found.add(y)
                break
        if cap is not None and len(found) >= cap:
            break
    return found


def is_standalone_safe(m: Module, hidden: Iterable[str], gamma: int, domains) -> bool:
    """Every input keeps at least ``gamma`` candidate outputs."""
    hidden = frozenset(hidden)
    if gamma <= 1:
        return True
    if not hidden & set(m.inputs):
        return math.prod(len(domains[a]) for a in m.outputs if a in hidden) >= gamma
    return all(len(standalone_out(m, x, hidden, domains, cap=gamma)) >= gamma for x in m.table)


def subset_key(subset: Iterable[str], order: Sequence[str]) -> tuple[int, ...]:
    pos = {a: i for i, a in enumerate(order)}
    return tuple(sorted(pos[a] for a in subset))


def all_subsets(attrs: Sequence[str]) -> list[tuple[str, ...]]:
    subs = []
    for r in range(len(attrs) + 1):
        subs.extend(itertools.combinations(attrs, r))
    return sorted(subs, key=lambda s: subset_key(s, attrs))


@dataclass(frozen=True)
class SafeCatalog:
    module: str
    gamma: int
    subsets: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict[str, Any]:
        return {"module": self.module, "gamma": self.gamma, "subsets": [list(s) for s in self.subsets]}

    def __contains__(self, subset) -> bool:
        return frozenset(subset) in {frozenset(s) for s in self.subsets}


def enumerate_safe_subsets(m: Module, gamma: int, domains, outputs_only: bool = True) -> SafeCatalog:
    """All hidden subsets that keep ``m`` Γ-private on its own.

    Every qualifying subset is kept, not only the cheapest, because the
    choice changes which public modules must also hide data downstream.
    """
    pool = m.outputs if outputs_only else m.attrs
    subsets = tuple(s for s in all_subsets(pool) if is_standalone_safe(m, s, gamma, domains))
    return SafeCatalog(m.name, gamma, subsets)
