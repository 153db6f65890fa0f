"""Finite conditions (t, f) for adding a Kurepa tree, and Cohen supports.

A condition is a leveled tree ``t`` and a finite map ``f`` from branch
indices onto the top level of ``t``.  Tree node ids are ``"level.index"``.
Negative indices are reserved: ``reserved_index(node)`` is the slot used
to keep ``f`` onto after restricting to a suborder.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import NotAFilter, PreconditionFailed, WidthExceeded
from .treeops import PrunedTree


def node_id(level: int, index: int) -> str:
    return f"{level}.{index}"


def node_coords(x: str) -> tuple[int, int]:
    a, b = x.split(".")
    return int(a), int(b)


def reserved_index(x: str) -> int:
    """Cantor pairing of (level, index), mapped to the negatives."""
    i, j = node_coords(x)
    return -(1 + (i + j) * (i + j + 1) // 2 + j)


@dataclass(frozen=True)
class KurepaCondition:
    t: PrunedTree
    f: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "f", dict(sorted(self.f.items())))

    @property
    def height(self) -> int:
        """Number of levels (the top level is ``height - 1``)."""
        return self.t.n_levels

    @property
    def top(self) -> tuple[str, ...]:
        return self.t.levels[-1] if self.t.levels else ()

    def is_valid(self, c: int | None = None) -> bool:
        if not self.t.levels or set(self.f.values()) != set(self.top):
            return False
        return c is None or all(len(lv) <= c for lv in self.t.levels)

    def __hash__(self) -> int:
        return hash((self.t, tuple(self.f.items())))


def trivial_condition() -> KurepaCondition:
    root = node_id(0, 0)
    return KurepaCondition(PrunedTree(levels=((root,),)), {reserved_index(root): root})


def _below(t: PrunedTree, x: str, y: str) -> bool:
    """x <_t y."""
    p = t.parent.get(y)
    while p is not None:
        if p == x:
            return True
        p = t.parent.get(p)
    return False


def is_initial_segment(s: PrunedTree, t: PrunedTree) -> bool:
    k = s.n_levels
    if k > t.n_levels or s.levels != t.levels[:k]:
        return False
    inner = set(s.nodes)
    return {x: p for x, p in t.parent.items() if x in inner} == dict(s.parent)


def leq(q: KurepaCondition, p: KurepaCondition) -> bool:
    """q extends p."""
    if not is_initial_segment(p.t, q.t):
        return False
    if not set(p.f) <= set(q.f):
        return False
    same = q.height == p.height
    for d, x in p.f.items():
        y = q.f[d]
        if same and y != x:
            return False
        if not same and not _below(q.t, x, y):
            return False
    return True


# -- dense requests --


@dataclass(frozen=True)
class HeightAtLeast:
    gamma: int


@dataclass(frozen=True)
class IndexInDomain:
    delta: int


@dataclass(frozen=True)
class Split:
    d1: int
    d2: int

    def __post_init__(self) -> None:
        if self.d1 == self.d2:
            raise ValueError("Split needs two different indices")


DenseRequest = HeightAtLeast | IndexInDomain | Split


def meets(p: KurepaCondition, d: DenseRequest) -> bool:
    if isinstance(d, HeightAtLeast):
        return p.height >= d.gamma
    if isinstance(d, IndexInDomain):
        return d.delta in p.f
    return d.d1 in p.f and d.d2 in p.f and p.f[d.d1] != p.f[d.d2]


def _grow(p: KurepaCondition, split: str | None, c: int | None, route) -> KurepaCondition:
    """Add one level: one child per top node, two under ``split``."""
    lvl = p.height
    new_level: list[str] = []
    parent = dict(p.t.parent)
    kids: dict[str, list[str]] = {}
    for x in sorted(p.top, key=node_coords):
        for _ in range(2 if x == split else 1):
            y = node_id(lvl, len(new_level))
            new_level.append(y)
            parent[y] = x
            kids.setdefault(x, []).append(y)
    if c is not None and len(new_level) > c:
        raise WidthExceeded(f"level {lvl} would have {len(new_level)} nodes but c = {c}")
    f = {d: route(d, kids[x]) for d, x in p.f.items()}
    return KurepaCondition(PrunedTree(levels=p.t.levels + (tuple(new_level),), parent=parent), f)


def _first(_d: int, children: list[str]) -> str:
    return children[0]


def extend_to_meet(
    p: KurepaCondition, d: DenseRequest, c: int, *, rng: random.Random | None = None
) -> KurepaCondition:
    """A deterministic q <= p meeting ``d`` (``rng`` breaks exact ties)."""
    if meets(p, d):
        return p
    if isinstance(d, HeightAtLeast):
        q = p
        while q.height < d.gamma:
            q = _grow(q, None, c, _first)
        return q
    if isinstance(d, IndexInDomain):
        load = {x: 0 for x in p.top}
        for x in p.f.values():
            load[x] += 1
        least = min(load.values())
        ties = sorted((x for x in p.top if load[x] == least), key=node_coords)
        pick = ties[0] if rng is None or len(ties) == 1 else rng.choice(ties)
        return KurepaCondition(p.t, {**p.f, d.delta: pick})
    # Split: place missing indices first, then split a shared node
    q = p
    for delta in (d.d1, d.d2):
        if delta not in q.f:
            q = extend_to_meet(q, IndexInDomain(delta), c, rng=rng)
    if meets(q, d):
        return q
    x = q.f[d.d1]

    def route(delta: int, children: list[str]) -> str:
        if len(children) == 1:
            return children[0]
        if delta == d.d1:
            return children[0]
        if delta == d.d2:
            return children[1]
        return children[0] if rng is None else rng.choice(children)

    try:
        return _grow(q, x, c, route)
    except WidthExceeded as e:
        raise WidthExceeded(str(e), request=d) from None


@dataclass(frozen=True)
class GenericRun:
    conditions: tuple[KurepaCondition, ...]
    requests: tuple[DenseRequest, ...] = ()
    c: int = 0
    seed: int = 0

    @property
    def final(self) -> KurepaCondition:
        return self.conditions[-1]

    @property
    def final_tree(self) -> PrunedTree:
        return self.final.t

    def branch_map(self) -> dict[int, tuple[str, ...]]:
        """delta -> the chain of nodes below and at its final position."""
        t = self.final.t
        out = {}
        for d, x in self.final.f.items():
            if d < 0:
                continue
            chain = [x]
            while chain[-1] in t.parent:
                chain.append(t.parent[chain[-1]])
            out[d] = tuple(reversed(chain))
        return out


def run_generic(requests: Sequence[DenseRequest], c: int, seed: int = 0) -> GenericRun:
    rng = random.Random(seed)
    conds = [trivial_condition()]
    for d in requests:
        conds.append(extend_to_meet(conds[-1], d, c, rng=rng))
    return GenericRun(tuple(conds), tuple(requests), c, seed)


def standard_requests(height: int, branches: int) -> list[DenseRequest]:
    """HeightAtLeast(height), every index below ``branches``, every split."""
    reqs: list[DenseRequest] = [HeightAtLeast(height)]
    reqs += [IndexInDomain(i) for i in range(branches)]
    reqs += [Split(i, j) for i, j in combinations(range(branches), 2)]
    return reqs


def lower_bound(chain: Sequence[KurepaCondition]) -> KurepaCondition:
    """A condition below every member of a decreasing chain (its last one)."""
    for q, p in zip(chain[1:], chain):
        if not leq(q, p):
            raise PreconditionFailed("sequence is not decreasing")
    return chain[-1]


# -- suborders --


def restrict_to_suborder(p: KurepaCondition, idx: Iterable[int], *, repair: bool = True) -> KurepaCondition:
    """Keep f on ``idx`` (reserved indices always stay), then repair.

    Repair: every node ``a`` with a top-level descendant but none in the
    kept range gets ``reserved_index(a)`` mapped to the top node reached
    by always taking the lowest child.
    """
    keep = set(idx)
    f = {d: x for d, x in p.f.items() if d < 0 or d in keep}
    if not repair or not p.t.levels:
        return KurepaCondition(p.t, f)
    kids = p.t.children()
    top = set(p.top)
    covered = set()
    for x in f.values():
        while x is not None:
            covered.add(x)
            x = p.t.parent.get(x)
    reaches = set()
    for x in top:
        while x is not None and x not in reaches:
            reaches.add(x)
            x = p.t.parent.get(x)
    for a in sorted(reaches - covered, key=node_coords):
        y = a
        while y not in top:
            y = min((k for k in kids[y] if k in reaches), key=node_coords)
        r = reserved_index(a)
        if r in f and f[r] != y:
            raise ValueError(f"reserved index {r} is already used")
        f[r] = y
    return KurepaCondition(p.t, f)


# -- Cohen conditions --

CohenCondition = frozenset  # of ((coordinate, slot), bit)


def cohen(items: Mapping[tuple[int, int], int] | Iterable) -> frozenset:
    if isinstance(items, Mapping):
        return frozenset(items.items())
    return frozenset((tuple(k), b) for k, b in items)


def is_filter(filt: Iterable[frozenset]) -> bool:
    """Nonempty, pairwise compatible and closed under weakening."""
    fam = set(filt)
    if not fam:
        return False
    seen: dict[tuple[int, int], int] = {}
    for g in fam:
        keys = [k for k, _ in g]
        if len(keys) != len(set(keys)):
            return False
        for k, b in g:
            if seen.setdefault(k, b) != b:
                return False
    return all(g - {item} in fam for g in fam for item in g)


@dataclass(frozen=True)
class CohenRestriction:
    dstar: frozenset[tuple[int, int]]
    d: frozenset[int]
    restricted: frozenset[frozenset]


def cohen_support_and_restrict(conds: Sequence[frozenset], filt: Iterable[frozenset]) -> CohenRestriction:
    fam = frozenset(filt)
    if not is_filter(fam):
        raise NotAFilter("the given family is not a filter")
    missing = [g for g in conds if g not in fam]
    if missing:
        raise PreconditionFailed("every condition must belong to the filter")
    dstar = frozenset(k for g in conds for k, _ in g)
    d = frozenset(i for i, _ in dstar)
    restricted = frozenset(frozenset(item for item in g if item[0][0] in d) for g in fam)
    return CohenRestriction(dstar, d, restricted)


# -- trace documents --


def request_to_obj(d: DenseRequest) -> dict:
    if isinstance(d, HeightAtLeast):
        return {"kind": "HeightAtLeast", "gamma": d.gamma}
    if isinstance(d, IndexInDomain):
        return {"kind": "IndexInDomain", "delta": d.delta}
    return {"kind": "Split", "d1": d.d1, "d2": d.d2}


def condition_to_obj(p: KurepaCondition) -> dict:
    return {
        "levels": [list(lv) for lv in p.t.levels],
        "parent": [[x, y] for x, y in sorted(p.t.parent.items())],
        "f": [[d, x] for d, x in sorted(p.f.items())],
    }


def run_to_obj(run: GenericRun) -> dict:
    return {
        "c": run.c,
        "seed": run.seed,
        "requests": [request_to_obj(d) for d in run.requests],
        "conditions": [condition_to_obj(p) for p in run.conditions],
        "branches": {str(d): list(ch) for d, ch in sorted(run.branch_map().items())},
    }
