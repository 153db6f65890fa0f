"""Finite tau-structures coding leveled trees.

A structure carries the sorts P, L and V, the tree order T on V, and the
witness relations F and G (stored as sets of triples so that malformed
input can still be represented and diagnosed).  The optional pair
(prec, H) turns a tau'-structure into a tau-structure.

L is stored as a sequence; the position of an element is its index.
Each element carries a kind tag:

* ``zero``  - the least element,
* ``succ``  - the successor of the element named in ``succ_of``,
* ``limit`` - preceded by an elided infinite block,
* ``max``   - the greatest element (when L has more than one element).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .errors import NotInStructure

ZERO = "zero"
SUCC = "succ"
LIMIT = "limit"
MAX = "max"
KINDS = (ZERO, SUCC, LIMIT, MAX)

LITERAL = "literal"
SURROGATE = "surrogate"
MODES = (LITERAL, SURROGATE)


@dataclass(frozen=True)
class LevelElem:
    id: str
    kind: str
    succ_of: str | None = None


@dataclass(frozen=True, order=True)
class Node:
    id: str
    level: str
    label: int | None = None


def node_key(v: Node) -> tuple:
    """Sort key for nodes; cheaper than the generated ordering."""
    return (v.id, v.level, v.label is not None, v.label or 0)


@dataclass(frozen=True)
class Violation:
    tag: str
    witnesses: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def tags(self) -> frozenset[str]:
        return frozenset(v.tag for v in self.violations)


@dataclass(frozen=True)
class TauStructure:
    P: frozenset[str]
    L: tuple[LevelElem, ...]
    V: frozenset[Node]
    T: frozenset[tuple[str, str]] = frozenset()
    F: frozenset[tuple[str, str, str]] = frozenset()
    G: frozenset[tuple[str, str, str]] = frozenset()
    prec: tuple[str, ...] | None = None
    H: frozenset[tuple[str, str, str]] | None = None
    mode: str = LITERAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "P", frozenset(self.P))
        object.__setattr__(self, "L", tuple(self.L))
        object.__setattr__(self, "V", frozenset(self.V))
        object.__setattr__(self, "T", frozenset(tuple(t) for t in self.T))
        object.__setattr__(self, "F", frozenset(tuple(t) for t in self.F))
        object.__setattr__(self, "G", frozenset(tuple(t) for t in self.G))
        if self.prec is not None:
            object.__setattr__(self, "prec", tuple(self.prec))
        if self.H is not None:
            object.__setattr__(self, "H", frozenset(tuple(t) for t in self.H))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    # -- derived views (computed lazily, never mutate fields) --

    @cached_property
    def level_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.L)

    @cached_property
    def position(self) -> dict[str, int]:
        pos: dict[str, int] = {}
        for i, e in enumerate(self.L):
            pos.setdefault(e.id, i)
        return pos

    @cached_property
    def level_elem(self) -> dict[str, LevelElem]:
        out: dict[str, LevelElem] = {}
        for e in self.L:
            out.setdefault(e.id, e)
        return out

    @property
    def max_level(self) -> str | None:
        return self.L[-1].id if self.L else None

    @cached_property
    def nonmax_levels(self) -> tuple[str, ...]:
        return self.level_ids[:-1]

    @cached_property
    def node(self) -> dict[str, Node]:
        return {v.id: v for v in sorted(self.V, key=node_key)}

    @cached_property
    def _by_level(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for v in sorted(self.V, key=node_key):
            out.setdefault(v.level, []).append(v.id)
        return {a: tuple(xs) for a, xs in out.items()}

    def nodes_at(self, a: str) -> tuple[str, ...]:
        return self._by_level.get(a, ())

    @property
    def max_nodes(self) -> tuple[str, ...]:
        m = self.max_level
        return self.nodes_at(m) if m is not None else ()

    def node_position(self, x: str) -> int:
        return self.position[self.node[x].level]

    @cached_property
    def below(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {v.id: set() for v in self.V}
        for x, y in self.T:
            acc.setdefault(y, set()).add(x)
        return {y: frozenset(xs) for y, xs in acc.items()}

    @cached_property
    def F_fn(self) -> dict[tuple[str, str], str]:
        return {(a, p): b for a, p, b in sorted(self.F)}

    @cached_property
    def G_fn(self) -> dict[tuple[str, str], str]:
        return {(a, p): x for a, p, x in sorted(self.G)}

    @property
    def size(self) -> int:
        return len(self.P) + len(self.L) + len(self.V)

    @cached_property
    def carriers(self) -> frozenset[str]:
        return self.P | frozenset(self.level_ids) | frozenset(v.id for v in self.V)

    def sort_of(self, ident: str) -> str | None:
        if ident in self.P:
            return "P"
        if ident in self.position:
            return "L"
        if ident in self.node:
            return "V"
        return None


def _node_id(x: Node | str) -> str:
    return x.id if isinstance(x, Node) else x


def predecessors(s: TauStructure, x: Node | str) -> tuple[Node, ...]:
    """All T-predecessors of ``x`` in order of level position."""
    xid = _node_id(x)
    if xid not in s.node:
        raise NotInStructure(xid)
    ys = [s.node[y] for y in s.below.get(xid, ()) if y in s.node]
    ys.sort(key=lambda v: (s.position.get(v.level, -1), v.id))
    return tuple(ys)


def _chain_key(s: TauStructure, xs: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(xs, key=lambda v: (s.position.get(s.node[v].level, -1), v)))


def materialized_branches(s: TauStructure) -> frozenset[tuple[str, ...]]:
    """Maximal T-chains inside the non-max part of V.

    An empty non-max part has exactly one maximal chain, the empty one.
    """
    top = s.max_level
    inner = [v.id for v in s.V if v.level != top]
    if not inner:
        return frozenset({()})
    g = nx.Graph()
    g.add_nodes_from(inner)
    keep = set(inner)
    g.add_edges_from((x, y) for x, y in s.T if x in keep and y in keep and x != y)
    return frozenset(_chain_key(s, c) for c in nx.find_cliques(g))


def branch_chain(s: TauStructure, b: Node | str) -> tuple[str, ...]:
    """The materialized chain under a max-level node."""
    return tuple(v.id for v in predecessors(s, b))


# -- construction helpers --


def transitive_closure(pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = {}
    for x, y in pairs:
        succ.setdefault(x, set()).add(y)
    out = set()
    for x in list(succ):
        stack = list(succ[x])
        seen: set[str] = set()
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(succ.get(y, ()))
        out.update((x, y) for y in seen)
    return frozenset(out)


def levels_from_kinds(ids: Iterable[str], kinds: Iterable[str]) -> tuple[LevelElem, ...]:
    """Build L from parallel id/kind lists; ``succ`` points at the previous id."""
    out: list[LevelElem] = []
    prev = None
    for a, k in zip(ids, kinds):
        out.append(LevelElem(a, k, prev if k == SUCC else None))
        prev = a
    return tuple(out)


def make_structure(
    P: Iterable[str],
    L: Iterable[LevelElem | tuple],
    V: Iterable[Node | tuple],
    *,
    parent: Mapping[str, str] | None = None,
    T: Iterable[tuple[str, str]] = (),
    F: Mapping[str, Mapping[str, str]] | None = None,
    G: Mapping[str, Mapping[str, str]] | None = None,
    prec: Iterable[str] | None = None,
    H: Mapping[str, Mapping[str, str]] | None = None,
    mode: str = LITERAL,
) -> TauStructure:
    """Convenience constructor from nested dicts.

    ``parent`` is closed transitively and merged into ``T``.
    """
    levels = tuple(e if isinstance(e, LevelElem) else LevelElem(*e) for e in L)
    nodes = frozenset(v if isinstance(v, Node) else Node(*v) for v in V)
    order = set(T)
    if parent:
        order |= set(transitive_closure((p, x) for x, p in parent.items()))
        order = set(transitive_closure(order))
    ftrip = frozenset((a, p, b) for a, m in (F or {}).items() for p, b in m.items())
    gtrip = frozenset((a, p, x) for a, m in (G or {}).items() for p, x in m.items())
    htrip = None
    if H is not None:
        htrip = frozenset((y, a, x) for y, m in H.items() for a, x in m.items())
    return TauStructure(
        P=frozenset(P), L=levels, V=nodes, T=frozenset(order), F=ftrip, G=gtrip,
        prec=tuple(prec) if prec is not None else None, H=htrip, mode=mode,
    )


def restrict(s: TauStructure, keep: Iterable[str]) -> TauStructure:
    """The induced substructure on the carriers in ``keep``."""
    k = set(keep)
    prec = None if s.prec is None else tuple(x for x in s.prec if x in k)
    H = None if s.H is None else frozenset(t for t in s.H if all(u in k for u in t))
    return TauStructure(
        P=frozenset(p for p in s.P if p in k),
        L=tuple(e for e in s.L if e.id in k),
        V=frozenset(v for v in s.V if v.id in k),
        T=frozenset(t for t in s.T if t[0] in k and t[1] in k),
        F=frozenset(t for t in s.F if all(u in k for u in t)),
        G=frozenset(t for t in s.G if all(u in k for u in t)),
        prec=prec, H=H, mode=s.mode,
    )


def rename(s: TauStructure, mapping: Mapping[str, str]) -> TauStructure:
    """Rename carrier ids; ids missing from ``mapping`` are kept."""
    r = lambda u: mapping.get(u, u)  # noqa: E731
    return TauStructure(
        P=frozenset(r(p) for p in s.P),
        L=tuple(LevelElem(r(e.id), e.kind, None if e.succ_of is None else r(e.succ_of)) for e in s.L),
        V=frozenset(Node(r(v.id), r(v.level), v.label) for v in s.V),
        T=frozenset((r(x), r(y)) for x, y in s.T),
        F=frozenset(tuple(r(u) for u in t) for t in s.F),
        G=frozenset(tuple(r(u) for u in t) for t in s.G),
        prec=None if s.prec is None else tuple(r(x) for x in s.prec),
        H=None if s.H is None else frozenset(tuple(r(u) for u in t) for t in s.H),
        mode=s.mode,
    )


def without_sigma_extras(s: TauStructure) -> TauStructure:
    return replace(s, prec=None, H=None)


__all__ = [
    "ZERO", "SUCC", "LIMIT", "MAX", "KINDS", "LITERAL", "SURROGATE", "MODES",
    "LevelElem", "Node", "Violation", "Verdict", "TauStructure", "node_key",
    "predecessors", "materialized_branches", "branch_chain", "transitive_closure",
    "levels_from_kinds", "make_structure", "canonical_model", "restrict", "rename", "without_sigma_extras",
]


def canonical_model(
    c: int,
    kinds: Sequence[str],
    widths: Sequence[int],
    parents: Mapping[str, str] | None = None,
    branches: Sequence[tuple[str | None, int | None]] = (),
    *,
    mode: str = LITERAL,
    F: Mapping[str, Mapping[str, str]] | None = None,
    G: Mapping[str, Mapping[str, str]] | None = None,
) -> TauStructure:
    """A model with canonical ids.

    L is ``l0`` (zero), then ``l1..`` with the given ``kinds``, then ``M``.
    ``widths[i]`` nodes ``v{i}_{j}`` sit at ``l{i}``; ``parents`` maps a node
    to its parent one level down (default: ``v{i-1}_0``).  ``branches`` lists
    (parent, label) for max-level nodes ``b{k}``.  Unspecified F and G map
    the k-th element of P to the min(k, last)-th target.
    """
    P = [f"p{i}" for i in range(c)]
    ids = [f"l{i}" for i in range(len(widths))] + ["M"]
    all_kinds = [ZERO] + list(kinds) + [MAX] if widths else [ZERO]
    if len(all_kinds) != len(ids):
        raise ValueError("need one kind per non-zero non-max level")
    L = levels_from_kinds(ids, all_kinds)
    V = []
    par = dict(parents or {})
    for i, w in enumerate(widths):
        for j in range(w):
            x = f"v{i}_{j}"
            V.append(Node(x, ids[i]))
            if i and x not in par:
                par[x] = f"v{i-1}_0"
    for k, (p, lab) in enumerate(branches):
        V.append(Node(f"b{k}", ids[-1], lab))
        if p is not None:
            par[f"b{k}"] = p
    if F is None:
        F = {ids[i]: {p: ids[min(j, i)] for j, p in enumerate(P)} for i in range(len(widths))}
    if G is None:
        G = {ids[i]: {p: f"v{i}_{min(j, widths[i] - 1)}" for j, p in enumerate(P)} for i in range(len(widths))}
    return make_structure(P, L, V, parent=par, F=F, G=G, mode=mode)
