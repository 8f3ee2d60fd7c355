"""Row-wise completion search shared by the standalone and workflow oracles.

A possible world keeps one completed row per row of the original relation:
visible values are copied, hidden values are chosen so that every module's
functional dependency holds across rows and every public module still
computes its own table. The search walks rows one at a time and, inside a
row, modules in topological order, so only hidden initial inputs and the
outputs of private modules on not-yet-seen inputs ever branch.
"""

from __future__ import annotations

import itertools
from typing import Any, Iterator, Mapping

from .model import Module, Relation, Workflow


class CompletionSearch:
    def __init__(self, w: Workflow, relation: Relation, hidden, private: set[str] | None = None):
        self.w = w
        self.schema = relation.schema
        self.hidden = frozenset(hidden)
        self.private = {m.name for m in w.modules if m.is_private} if private is None else set(private)
        self.order: tuple[Module, ...] = w.order
        self.rows = relation.sorted_rows(w.domains)
        self.visible = [
            {a: v for a, v in zip(self.schema, r) if a not in self.hidden} for r in self.rows
        ]
        self.hidden_initial = [a for a in w.initial_inputs if a in self.hidden]
        self.visible_initial = [a for a in w.initial_inputs if a not in self.hidden]

    def search(
        self,
        seed: Mapping[str, Mapping[tuple, tuple]] | None = None,
        pins: Mapping[int, Mapping[str, Any]] | None = None,
    ) -> Iterator[tuple[list[dict[str, Any]], dict[str, dict[tuple, tuple]]]]:
        """Yield ``(rows, fd)`` for every completion.

        ``seed`` pre-fixes some input/output pairs of private modules and
        ``pins`` pre-fixes values inside particular rows. The yielded
        objects are live and must be copied by callers that keep them.
        """
        fd = {name: dict(seed.get(name, {})) if seed else {} for name in self.private}
        pins = pins or {}
        done: list[dict[str, Any]] = [None] * len(self.rows)

        def rows_from(i):
            if i == len(self.rows):
                yield done, fd
                return
            for vals in self._complete(i, fd, pins.get(i, {})):
                done[i] = vals
                yield from rows_from(i + 1)

        yield from rows_from(0)

    def _fits(self, i, attr, value, pin) -> bool:
        vis = self.visible[i]
        if attr in vis and vis[attr] != value:
            return False
        return attr not in pin or pin[attr] == value

    def _complete(self, i, fd, pin):
        vis = self.visible[i]
        base = {a: vis[a] for a in self.visible_initial}
        if any(a in pin and pin[a] != base[a] for a in base):
            return
        choices = [
            [pin[a]] if a in pin else list(self.w.domains[a]) for a in self.hidden_initial
        ]
        for combo in itertools.product(*choices):
            vals = dict(base)
            vals.update(zip(self.hidden_initial, combo))
            yield from self._modules(i, 0, vals, fd, pin)

    def _modules(self, i, k, vals, fd, pin):
        if k == len(self.order):
            yield vals
            return
        m = self.order[k]
        x = tuple(vals[a] for a in m.inputs)
        if m.name not in self.private:
            y = m.table[x]
            if all(self._fits(i, a, v, pin) for a, v in zip(m.outputs, y)):
                nxt = dict(vals)
                nxt.update(zip(m.outputs, y))
                yield from self._modules(i, k + 1, nxt, fd, pin)
            return
        known = fd[m.name]
        if x in known:
            y = known[x]
            if all(self._fits(i, a, v, pin) for a, v in zip(m.outputs, y)):
                nxt = dict(vals)
                nxt.update(zip(m.outputs, y))
                yield from self._modules(i, k + 1, nxt, fd, pin)
            return
        vis = self.visible[i]
        choices = []
        for a in m.outputs:
            if a in vis:
                if a in pin and pin[a] != vis[a]:
                    return
                choices.append([vis[a]])
            elif a in pin:
                choices.append([pin[a]])
            else:
                choices.append(list(self.w.domains[a]))
        for y in itertools.product(*choices):
            known[x] = y
            nxt = dict(vals)
            nxt.update(zip(m.outputs, y))
            yield from self._modules(i, k + 1, nxt, fd, pin)
            del known[x]

    def as_relation(self, rows) -> Relation:
        return Relation(self.schema, frozenset(tuple(r[a] for a in self.schema) for r in rows))
