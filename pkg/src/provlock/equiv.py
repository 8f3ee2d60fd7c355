"""Tuple equivalence modulo hidden attributes, and the Flip/EFlip rewriters.

Tuples here are plain mappings from attribute name to value, so the schema of
a tuple is simply its key set.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

Tuple = Mapping[str, Any]


class SchemaMismatch(ValueError):
    pass


def equiv(x: Tuple, y: Tuple, attrs: Iterable[str], hidden: Iterable[str]) -> bool:
    """True iff ``x`` and ``y`` agree on every visible attribute of ``attrs``."""
    attrs = set(attrs)
    if set(x) != attrs or set(y) != attrs:
        raise SchemaMismatch(f"tuples over {sorted(x)} and {sorted(y)} are not both on {sorted(attrs)}")
    hidden = set(hidden)
    return all(x[a] == y[a] for a in attrs - hidden)


def _matches(u: Tuple, t: Tuple, attrs) -> bool:
    return all(u[a] == t[a] for a in attrs)


def flip(p: Tuple, q: Tuple, u: Tuple) -> dict[str, Any]:
    """Swap the p-part and q-part of ``u`` on the attributes it shares with p.

    ``p`` and ``q`` must share a schema P. If ``u`` agrees with ``p`` on
    P∩Q it takes q's values there, if it agrees with ``q`` it takes p's,
    otherwise it is returned unchanged. Attributes outside P never move.
    """
    if set(p) != set(q):
        raise SchemaMismatch("flip needs p and q on the same attributes")
    common = [a for a in u if a in p]
    w = dict(u)
    if _matches(u, p, common):
        w.update((a, q[a]) for a in common)
    elif _matches(u, q, common):
        w.update((a, p[a]) for a in common)
    return w


def eflip(p: Tuple, q: Tuple, v: Tuple, u: Tuple) -> dict[str, Any]:
    """Flip keyed on a pivot tuple ``v`` instead of on ``u`` itself.

    ``p`` and ``q`` are defined on P ∪ R and ``v`` on R. When ``v`` equals
    p restricted to R, the part of ``u`` inside P is overwritten with q's
    values; when it equals q restricted to R, with p's values. Otherwise
    ``u`` comes back unchanged.
    """
    if set(p) != set(q):
        raise SchemaMismatch("eflip needs p and q on the same attributes")
    pivot = list(v)
    if any(a not in p for a in pivot):
        raise SchemaMismatch("pivot attributes must belong to p and q")
    common = [a for a in u if a in p]
    w = dict(u)
    if _matches(v, p, pivot):
        w.update((a, q[a]) for a in common)
    elif _matches(v, q, pivot):
        w.update((a, p[a]) for a in common)
    return w
