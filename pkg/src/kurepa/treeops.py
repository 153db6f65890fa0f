"""Leveled trees: coding into tau-structures, shifted merge, pruning.

``height`` is the index of the top level, so a chain of height 3 has
four nodes.  Roots normally sit at level 0; the shifted merge also
produces roots higher up (copies are added disjointly, never attached).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .checker import SentenceId, check
from .core import MAX, SUCC, SURROGATE, ZERO, LevelElem, Node, TauStructure, predecessors
from .errors import PreconditionFailed, WidthExceeded


@dataclass(frozen=True)
class PrunedTree:
    levels: tuple[tuple[str, ...], ...]
    parent: Mapping[str, str] = field(default_factory=dict)
    branch_labels: Mapping[str, tuple[int, ...]] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(tuple(sorted(lv)) for lv in self.levels))
        object.__setattr__(self, "parent", dict(self.parent))
        if self.branch_labels is not None:
            labels = {x: tuple(sorted(ls)) for x, ls in self.branch_labels.items() if ls}
            object.__setattr__(self, "branch_labels", labels)

    @property
    def height(self) -> int:
        return max(len(self.levels) - 1, 0)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(x for lv in self.levels for x in lv)

    def level_of(self) -> dict[str, int]:
        return {x: i for i, lv in enumerate(self.levels) for x in lv}

    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {x: [] for x in self.nodes}
        for x, p in self.parent.items():
            out.setdefault(p, []).append(x)
        return out

    def is_leveled(self) -> bool:
        """Each parent sits exactly one level down; level sets are disjoint."""
        lev = self.level_of()
        if len(lev) != sum(len(lv) for lv in self.levels):
            return False
        return all(x in lev and p in lev and lev[p] == lev[x] - 1 for x, p in self.parent.items())

    def is_rooted_at_zero(self) -> bool:
        return all(x in self.parent for lv in self.levels[1:] for x in lv)

    def is_pruned(self) -> bool:
        kids = self.children()
        return all(kids[x] for lv in self.levels[:-1] for x in lv)

    def __hash__(self) -> int:
        return hash((self.levels, tuple(sorted(self.parent.items()))))


def _level_ids(h: int, taken: set[str]) -> list[str]:
    ids = []
    for i in range(h):
        a = f"@l{i}"
        if a in taken:
            raise ValueError(f"tree node id {a} collides with a reserved level id")
        ids.append(a)
    if "@M" in taken:
        raise ValueError("tree node id @M collides with a reserved level id")
    return ids + ["@M"]


def encode_tree(t: PrunedTree, c: int, with_branch_level: bool = True) -> TauStructure:
    """Code ``t`` as a surrogate-mode tau'-structure with |P| = c.

    Levels become ``@l0 .. @l{h}`` plus a max ``@M``.  With the branch
    level, each top-level node gets one labeled max node per label in
    ``t.branch_labels`` (default: the k-th top node gets label k).
    """
    if not t.is_leveled() or not t.is_rooted_at_zero():
        raise PreconditionFailed("encoding needs a leveled tree with every root at level 0")
    if any(not lv for lv in t.levels):
        raise PreconditionFailed("encoding needs nonempty levels")
    widest = max((len(lv) for lv in t.levels), default=0)
    if widest > c:
        raise WidthExceeded(f"a level has {widest} nodes but c = {c}")
    if t.n_levels > c:
        raise WidthExceeded(f"{t.n_levels} levels cannot be covered by |P| = {c}")
    taken = set(t.nodes)
    ids = _level_ids(t.n_levels, taken)
    P = [f"@p{i}" for i in range(c)]
    if taken & set(P):
        raise ValueError("tree node ids collide with reserved P ids")
    L = [LevelElem(ids[0], ZERO)] if t.n_levels else []
    L += [LevelElem(ids[i], SUCC, ids[i - 1]) for i in range(1, t.n_levels)]
    L.append(LevelElem(ids[-1], MAX if t.n_levels else ZERO))
    V = [Node(x, ids[i]) for i, lv in enumerate(t.levels) for x in lv]
    def ancestors(x: str) -> list[str]:
        out = []
        p = t.parent.get(x)
        while p is not None:
            out.append(p)
            p = t.parent.get(p)
        return out

    T = {(p, x) for x in t.nodes for p in ancestors(x)}
    if with_branch_level and t.n_levels:
        top = t.levels[-1]
        labels = t.branch_labels if t.branch_labels is not None else {x: (k,) for k, x in enumerate(top)}
        k = 0
        for x in top:
            for lab in labels.get(x, ()):
                b = f"@b{k}"
                k += 1
                V.append(Node(b, ids[-1], lab))
                T.update((u, b) for u in [x] + ancestors(x))
    F, G = set(), set()
    for i, lv in enumerate(t.levels):
        for j, p in enumerate(P):
            F.add((ids[i], p, ids[min(j, i)]))
            G.add((ids[i], p, lv[min(j, len(lv) - 1)]))
    return TauStructure(P=frozenset(P), L=tuple(L), V=frozenset(V), T=frozenset(T),
                        F=frozenset(F), G=frozenset(G), mode=SURROGATE)


def decode_structure(s: TauStructure) -> PrunedTree:
    """Read the non-max part of ``s`` back as a tree.

    Labels of max-level nodes are recorded under the top-level node they
    sit over; ``branch_labels`` is None when V(max) is empty.
    """
    v = check(s, SentenceId.SIGMA_PRIME)
    if not v.ok:
        raise PreconditionFailed(f"not a model of sigma': {sorted(v.tags)}")
    levels = [s.nodes_at(a) for a in s.nonmax_levels]
    parent = {}
    for i, a in enumerate(s.nonmax_levels[1:], start=1):
        below = s.nonmax_levels[i - 1]
        for x in s.nodes_at(a):
            parent[x] = next(y.id for y in predecessors(s, x) if y.level == below)
    labels = None
    if s.max_nodes:
        labels = {}
        top = s.nonmax_levels[-1] if s.nonmax_levels else None
        for b in s.max_nodes:
            lab = s.node[b].label
            under = [y.id for y in predecessors(s, b) if y.level == top]
            if lab is not None and under:
                labels.setdefault(under[0], []).append(lab)
    return PrunedTree(levels=tuple(levels), parent=parent, branch_labels=labels)


def merge_shifted(trees: Sequence[PrunedTree]) -> PrunedTree:
    """Disjoint union with the i-th tree's level j placed at level j + i.

    Node ids are prefixed with the source index (``"i/"``).  A single
    tree is returned unchanged.
    """
    if not trees:
        raise ValueError("merge_shifted needs at least one tree")
    if len(trees) == 1:
        return trees[0]
    levels: list[list[str]] = []
    parent: dict[str, str] = {}
    for i, t in enumerate(trees):
        for j, lv in enumerate(t.levels):
            while len(levels) <= i + j:
                levels.append([])
            levels[i + j].extend(f"{i}/{x}" for x in lv)
        parent.update({f"{i}/{x}": f"{i}/{p}" for x, p in t.parent.items()})
    return PrunedTree(levels=tuple(tuple(lv) for lv in levels), parent=parent)


def count_branches(t: PrunedTree) -> int:
    """Number of maximal chains, i.e. of nodes without children."""
    kids = t.children()
    return sum(1 for x in t.nodes if not kids[x])


def prune(t: PrunedTree) -> PrunedTree:
    """Drop every node that does not reach the top level.

    An empty top level kills everything and gives the empty tree.
    """
    if not t.levels or not t.levels[-1]:
        return PrunedTree(levels=())
    alive = set(t.levels[-1])
    frontier = list(alive)
    while frontier:
        p = t.parent.get(frontier.pop())
        if p is not None and p not in alive:
            alive.add(p)
            frontier.append(p)
    kept = tuple(tuple(x for x in lv if x in alive) for lv in t.levels)
    parent = {x: p for x, p in t.parent.items() if x in alive}
    labels = None
    if t.branch_labels is not None:
        labels = {x: ls for x, ls in t.branch_labels.items() if x in alive}
    return PrunedTree(levels=kept, parent=parent, branch_labels=labels)
