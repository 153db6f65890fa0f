"""Substructures of psi-models and budgeted extension search.

``M <= N`` is literal: the carriers of M are carriers of N and every
relation of M is the restriction of N's.  Extension search is
exhaustive up to a total-size budget; fresh elements get canonical ids,
which loses nothing because any extension is isomorphic over the base
to one named this way.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .checker import SentenceId, check, is_long
from .core import LIMIT, LITERAL, MAX, SUCC, ZERO, LevelElem, Node, TauStructure
from .errors import BadBudget, InconsistentCarriers, PreconditionFailed


@dataclass(frozen=True)
class EmbeddingReport:
    is_sub: bool
    l_initial_segment: bool
    levels_equal: bool
    order_preserved: bool
    new_branch_count: int


def _sort_clash(m: TauStructure, n: TauStructure) -> str | None:
    for u in sorted(m.carriers & n.carriers):
        if m.sort_of(u) != n.sort_of(u):
            return u
    return None


def _restricts(R_m, R_n, keep) -> bool:
    return set(R_m) == {t for t in R_n if all(u in keep for u in t)}


def relations_restrict(m: TauStructure, n: TauStructure) -> bool:
    """True iff m's carriers lie in n and m is n's induced substructure."""
    keep = m.carriers
    if not keep <= n.carriers:
        return False
    if any(m.sort_of(u) != n.sort_of(u) for u in keep):
        return False
    for e in m.L:
        if n.level_elem[e.id] != e:
            return False
    if [a for a in n.level_ids if a in keep] != list(m.level_ids):
        return False
    for v in m.V:
        if n.node[v.id] != v:
            return False
    if not (_restricts(m.T, n.T, keep) and _restricts(m.F, n.F, keep) and _restricts(m.G, n.G, keep)):
        return False
    if m.prec is not None and n.prec is not None:
        if list(m.prec) != [x for x in n.prec if x in keep]:
            return False
    if m.H is not None and n.H is not None and not _restricts(m.H, n.H, keep):
        return False
    return True


def embedding_report(m: TauStructure, n: TauStructure) -> EmbeddingReport:
    u = _sort_clash(m, n)
    if u is not None:
        raise InconsistentCarriers(f"{u} is a {m.sort_of(u)} in one structure and a {n.sort_of(u)} in the other")
    is_sub = relations_restrict(m, n)
    lm, ln = list(m.nonmax_levels), list(n.nonmax_levels)
    init = ln[: len(lm)] == lm and bool(m.L) and m.max_level == n.max_level
    n_nodes = {v.id for v in n.V}
    levels_equal = all(set(m.nodes_at(a)) == set(n.nodes_at(a)) for a in lm)
    mv = sorted(v.id for v in m.V)
    order_ok = all(x in n_nodes for x in mv) and all(
        ((x, y) in m.T) == ((x, y) in n.T) for x in mv for y in mv
    )
    m_nodes = {v.id for v in m.V}
    fresh = sum(1 for x in n.max_nodes if x not in m_nodes)
    return EmbeddingReport(is_sub, init, levels_equal, order_ok, fresh)


def is_substructure_model(
    m: TauStructure,
    n: TauStructure,
    *,
    sentence: "str | SentenceId" = SentenceId.PSI,
    c: int | None = None,
    validate: bool = True,
) -> EmbeddingReport:
    if validate:
        c = len(n.P) if c is None else c
        for name, s in (("m", m), ("n", n)):
            v = check(s, sentence, c=c)
            if not v.ok:
                raise PreconditionFailed(f"{name} is not a model: {sorted(v.tags)}")
    return embedding_report(m, n)


# -- exhaustive common-extension search --


def _fresh(prefix: str, taken: set[str]) -> Iterator[str]:
    i = 0
    while True:
        name = f"{prefix}{i}"
        i += 1
        if name not in taken:
            taken.add(name)
            yield name


def _linear_extensions(items: list[str], before: dict[str, set[str]]) -> Iterator[tuple[str, ...]]:
    """All linear orders of ``items`` respecting ``before`` (x -> must precede)."""
    indeg = {x: 0 for x in items}
    for x in items:
        for y in before.get(x, ()):
            indeg[y] += 1
    out: list[str] = []

    def rec():
        if len(out) == len(items):
            yield tuple(out)
            return
        for x in sorted(items):
            if indeg[x] == 0 and x not in out:
                out.append(x)
                for y in before.get(x, ()):
                    indeg[y] -= 1
                yield from rec()
                for y in before.get(x, ()):
                    indeg[y] += 1
                out.pop()

    yield from rec()


def _compositions(k: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if k == 0:
            yield ()
        return
    if parts == 1:
        yield (k,)
        return
    for i in range(k + 1):
        for rest in _compositions(k - i, parts - 1):
            yield (i,) + rest


class _Union:
    """Consistent union of several bases, or ``ok = False``."""

    def __init__(self, bases: Sequence[TauStructure]):
        self.bases = list(bases)
        self.ok = True
        self.P = bases[0].P
        self.mode = bases[0].mode
        self.elems: dict[str, LevelElem] = {}
        self.nodes: dict[str, Node] = {}
        for b in bases:
            if b.P != self.P:
                self.ok = False
            for e in b.L:
                if self.elems.setdefault(e.id, e) != e:
                    self.ok = False
            for v in b.V:
                if self.nodes.setdefault(v.id, v) != v:
                    self.ok = False
        ids_l, ids_v = set(self.elems), set(self.nodes)
        if ids_l & ids_v or ids_l & self.P or ids_v & self.P:
            self.ok = False
        self.F = frozenset().union(*(b.F for b in bases))
        self.G = frozenset().union(*(b.G for b in bases))
        self.taken = set(self.P) | ids_l | ids_v
        self.owners: dict[str, list[TauStructure]] = {}
        for b in bases:
            for v in b.V:
                self.owners.setdefault(v.id, []).append(b)


def _l_prunes(E_L: list[LevelElem], U: _Union, c: int) -> bool:
    """Necessary conditions on the level order alone."""
    n = len(E_L)
    if n - 1 > c:
        return False
    pos = {e.id: i for i, e in enumerate(E_L)}
    for i, e in enumerate(E_L):
        if (e.kind == ZERO) != (i == 0):
            return False
        if n > 1 and (e.kind == MAX) != (i == n - 1):
            return False
        if e.kind == SUCC and (i == 0 or E_L[i - 1].id != e.succ_of):
            return False
    top = E_L[-1].id
    for b in U.bases:
        if c >= 1 and b.max_level != top:
            return False
        for a in b.nonmax_levels:
            below = {x.id for x in E_L[: pos[a] + 1]}
            if below != set(b.level_ids[: b.position[a] + 1]):
                return False
    return True


def common_extensions(
    bases: Sequence[TauStructure],
    budget: int,
    *,
    fresh_levels: Sequence[int] | None = None,
    fresh_branches: int = 0,
) -> Iterator[TauStructure]:
    """Yield psi-models of size <= budget that contain every base.

    Fresh max-level nodes are only added when ``fresh_branches`` asks for
    them; deleting fresh branches from any common extension leaves a
    common extension, so existence questions never need them.
    """
    U = _Union(bases)
    if not U.ok:
        return
    c = len(U.P)
    P = sorted(U.P)
    mode = U.mode
    before: dict[str, set[str]] = {}
    for b in bases:
        for x, y in zip(b.level_ids, b.level_ids[1:]):
            before.setdefault(x, set()).add(y)
    base_levels = sorted(U.elems)
    n_base_nodes = len(U.nodes)
    # every base's max is E's max, so base non-max levels stay non-max
    n_nonmax = len({a for b in bases for a in b.nonmax_levels})
    if fresh_levels is None:
        fresh_levels = range(0, c + 1)
    for k in fresh_levels:
        if n_nonmax + k > c:
            continue
        if len(P) + len(base_levels) + k + n_base_nodes + k + fresh_branches > budget:
            continue
        for order in _linear_extensions(base_levels, before):
            gaps = max(len(order) - 1, 0)
            if k and not gaps:
                continue
            for comp in _compositions(k, gaps):
                for kinds in product((SUCC, LIMIT), repeat=k):
                    yield from _with_levels(U, c, P, mode, order, comp, kinds, budget, fresh_branches)


def _with_levels(U, c, P, mode, order, comp, kinds, budget, fresh_branches):
    taken = set(U.taken)
    names = _fresh("+L", taken)
    E_L: list[LevelElem] = []
    fresh_pos: list[int] = []
    kinds_it = iter(kinds)
    for j, a in enumerate(order):
        E_L.append(U.elems[a])
        if j < len(comp):
            for _ in range(comp[j]):
                kind = next(kinds_it)
                name = next(names)
                E_L.append(LevelElem(name, kind, E_L[-1].id if kind == SUCC else None))
                fresh_pos.append(len(E_L) - 1)
    if not _l_prunes(E_L, U, c):
        return
    base_at: dict[str, list[str]] = {}
    for v in U.nodes.values():
        base_at.setdefault(v.level, []).append(v.id)
    fixed = len(P) + len(E_L) + len(U.nodes) + fresh_branches
    room = budget - fixed
    if room < len(fresh_pos):
        return
    for widths in product(range(1, c + 1), repeat=len(fresh_pos)):
        if sum(widths) > room:
            continue
        yield from _with_widths(U, c, P, mode, E_L, fresh_pos, widths, base_at, taken, fresh_branches)


def _with_widths(U, c, P, mode, E_L, fresh_pos, widths, base_at, taken, fresh_branches):
    taken = set(taken)
    vnames = _fresh("+v", taken)
    V_at: list[list[str]] = []
    new_nodes: dict[str, Node] = {}
    wit = dict(zip(fresh_pos, widths))
    for i, e in enumerate(E_L):
        xs = sorted(base_at.get(e.id, []))
        for _ in range(wit.get(i, 0)):
            x = next(vnames)
            new_nodes[x] = Node(x, e.id)
            xs.append(x)
        V_at.append(xs)
    F = set(U.F)
    G = set(U.G)
    for i in fresh_pos:
        a = E_L[i].id
        lows = [x.id for x in E_L[: i + 1]]
        for j, p in enumerate(P):
            F.add((a, p, lows[min(j, len(lows) - 1)]))
            G.add((a, p, V_at[i][min(j, len(V_at[i]) - 1)]))
    labels_used = {v.label for v in U.nodes.values() if v.label is not None}
    branch_names = [next(vnames) for _ in range(fresh_branches)]

    preds: dict[str, frozenset[str]] = {}
    for x in V_at[0]:
        preds[x] = frozenset()
    nodes_all = dict(U.nodes)
    nodes_all.update(new_nodes)
    last = len(E_L) - 1

    def allowed(y: str, cand_preds: frozenset[str]) -> bool:
        for b in U.owners.get(y, ()):
            if cand_preds & b.carriers != b.below.get(y, frozenset()):
                return False
        return True

    def unique_ok(xs: list[str], pr: dict[str, frozenset[str]], lab: dict[str, int | None]) -> bool:
        seen: dict[frozenset[str], list[str]] = {}
        for x in xs:
            seen.setdefault(pr[x], []).append(x)
        for grp in seen.values():
            if len(grp) < 2:
                continue
            if mode == LITERAL:
                return False
            ls = [lab.get(x) for x in grp]
            if None in ls or len(set(ls)) != len(ls):
                return False
        return True

    def level_rec(i: int):
        if i > last:
            yield from _finish(U, c, P, mode, E_L, V_at, nodes_all, preds, F, G, branch_names, labels_used)
            return
        xs = V_at[i]
        chosen: list[str] = []

        def node_rec(j: int):
            if j == len(xs):
                if E_L[i].kind == LIMIT or i == last:
                    lab = {x: nodes_all[x].label for x in xs}
                    if not unique_ok(xs, preds, lab):
                        return
                yield from level_rec(i + 1)
                return
            y = xs[j]
            for par in V_at[i - 1]:
                cp = preds[par] | {par}
                if allowed(y, cp):
                    preds[y] = cp
                    yield from node_rec(j + 1)
            preds.pop(y, None)

        yield from node_rec(0)

    if not V_at[0] or all(allowed(x, frozenset()) for x in V_at[0]):
        if last == 0:
            lab = {x: nodes_all[x].label for x in V_at[0]}
            if not unique_ok(V_at[0], preds, lab):
                return
        yield from level_rec(1)


def _finish(U, c, P, mode, E_L, V_at, nodes_all, preds, F, G, branch_names, labels_used):
    if not branch_names:
        E = _assemble(U, mode, E_L, nodes_all, preds, F, G)
        if _accept(E, U, c):
            yield E
        return
    # one fresh branch at a time; parents range over the top non-max level
    last = len(E_L) - 1
    top_id = E_L[-1].id
    parents = V_at[last - 1] if last >= 1 else [None]
    label = None
    if mode != LITERAL:
        label = 0
        while label in labels_used:
            label += 1
    for par_choice in product(parents, repeat=len(branch_names)):
        nodes2 = dict(nodes_all)
        preds2 = dict(preds)
        lab = label
        for name, par in zip(branch_names, par_choice):
            nodes2[name] = Node(name, top_id, lab)
            preds2[name] = frozenset() if par is None else preds[par] | {par}
            if lab is not None:
                lab += 1
        E = _assemble(U, mode, E_L, nodes2, preds2, F, G)
        if _accept(E, U, c):
            yield E


def _assemble(U, mode, E_L, nodes, preds, F, G) -> TauStructure:
    T = frozenset((u, y) for y, ps in preds.items() for u in ps)
    return TauStructure(P=U.P, L=tuple(E_L), V=frozenset(nodes.values()), T=T,
                        F=frozenset(F), G=frozenset(G), mode=mode)


def _accept(E: TauStructure, U: _Union, c: int) -> bool:
    if not check(E, SentenceId.PSI, c=c).ok:
        return False
    return all(relations_restrict(b, E) for b in U.bases)


def _require_models(*structures: TauStructure) -> int:
    c = len(structures[0].P)
    for s in structures:
        v = check(s, SentenceId.PSI, c=c)
        if not v.ok:
            raise PreconditionFailed(f"not a model of psi: {sorted(v.tags)}")
    return c


def find_proper_extension(m: TauStructure, budget: int) -> TauStructure | None:
    """First proper extension of ``m`` within ``budget`` total elements.

    Order: one fresh branch (parents in id order, least unused label),
    then end-extensions by 1, 2, ... fresh levels when L is short.
    """
    if budget < m.size:
        raise BadBudget(f"budget {budget} is below |m| = {m.size}")
    c = _require_models(m)
    if budget == m.size:
        return None
    for e in common_extensions([m], budget, fresh_levels=[0], fresh_branches=1):
        return e
    if not is_long(m, c):
        for e in common_extensions([m], budget, fresh_levels=range(1, c + 1)):
            return e
    return None


def is_maximal(m: TauStructure, budget: int) -> bool:
    return find_proper_extension(m, budget) is None
