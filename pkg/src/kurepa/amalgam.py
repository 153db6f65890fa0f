"""Amalgamation over long L, and witnesses for JEP and AP failure."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .checker import SentenceId, check, is_long
from .core import LIMIT, LITERAL, SUCC, Node, TauStructure, canonical_model, rename
from .errors import BadBudget, BadSize, LabelConflict, NotUncountableSurrogate, PreconditionFailed
from .morphisms import common_extensions, embedding_report, relations_restrict

AP_BUDGET = 10


@dataclass(frozen=True)
class AmalgamResult:
    n: TauStructure
    identified_pairs: frozenset[tuple[str, str]]
    right_map: dict[str, str] = field(default_factory=dict, compare=False)


def _psi(s: TauStructure, c: int, name: str) -> None:
    v = check(s, SentenceId.PSI, c=c)
    if not v.ok:
        raise PreconditionFailed(f"{name} is not a model of psi: {sorted(v.tags)}")


def amalgamate(m0: TauStructure, m1: TauStructure, m2: TauStructure) -> AmalgamResult:
    """m0 together with every branch of m1 and of m2.

    A branch of m2 is identified with a branch of m1 when both sit over
    the same chain and (in surrogate mode) carry the same label.  A new
    m2 branch whose id is taken in m1 is renamed; ``right_map`` records
    where each max node of m2 went.
    """
    c = len(m0.P)
    for name, s in (("m0", m0), ("m1", m1), ("m2", m2)):
        _psi(s, c, name)
    if not (is_long(m1, c) and is_long(m2, c)):
        raise NotUncountableSurrogate("amalgamation is only guaranteed over long L")
    if m1.L != m2.L or m0.L != m1.L:
        raise PreconditionFailed("the three structures must share L")
    for name, s in (("m1", m1), ("m2", m2)):
        if not embedding_report(m0, s).is_sub:
            raise PreconditionFailed(f"m0 is not a substructure of {name}")
    if any(m1.nodes_at(a) != m2.nodes_at(a) for a in m1.nonmax_levels):
        raise PreconditionFailed("non-max levels differ")
    surrogate = m0.mode != LITERAL
    base = set(m0.max_nodes)

    def key(s: TauStructure, b: str):
        chain = s.below.get(b, frozenset())
        return (chain, s.node[b].label) if surrogate else chain

    index1 = {key(m1, b): b for b in m1.max_nodes if b not in base}
    by_label1 = {m1.node[b].label: b for b in m1.max_nodes if m1.node[b].label is not None}
    taken = set(m1.carriers)
    nodes = set(m1.V)
    T = set(m1.T)
    pairs = set()
    right = {b: b for b in base}
    for b2 in sorted(m2.max_nodes):
        if b2 in base:
            continue
        lab = m2.node[b2].label
        b1 = index1.get(key(m2, b2))
        if b1 is not None:
            if not surrogate and m1.node[b1].label != lab:
                raise LabelConflict(f"{b1} and {b2} share a chain but not a label")
            pairs.add((b1, b2))
            right[b2] = b1
            continue
        if lab is not None and lab in by_label1:
            raise LabelConflict(f"label {lab} sits over different chains in m1 and m2")
        new = b2
        k = 2
        while new in taken:
            new = f"{b2}~{k}"
            k += 1
        taken.add(new)
        right[b2] = new
        nodes.add(Node(new, m2.node[b2].level, lab))
        T.update((u, new) for u in m2.below.get(b2, ()))
        if lab is not None:
            by_label1[lab] = new
    n = TauStructure(P=m1.P, L=m1.L, V=frozenset(nodes), T=frozenset(T), F=m1.F, G=m1.G, mode=m1.mode)
    return AmalgamResult(n, frozenset(pairs), right)


def _budget_floor(budget: int, *structures: TauStructure) -> None:
    need = max(s.size for s in structures)
    if budget < need:
        raise BadBudget(f"budget {budget} is below the input size {need}")


def joint_embed_search(m: TauStructure, n: TauStructure, budget: int) -> TauStructure | None:
    """First common extension of m and n over their shared ids, if any."""
    _budget_floor(budget, m, n)
    c = len(m.P)
    _psi(m, c, "m")
    _psi(n, len(n.P), "n")
    if m == n:
        return m
    for e in common_extensions([m, n], budget):
        return e
    return None


def _partial_injections(src: list[str], dst: list[str], same_sort) -> Iterator[dict[str, str]]:
    out: dict[str, str] = {}
    used: set[str] = set()

    def rec(i: int):
        if i == len(src):
            yield dict(out)
            return
        yield from rec(i + 1)
        for y in dst:
            if y not in used and same_sort(src[i], y):
                out[src[i]] = y
                used.add(y)
                yield from rec(i + 1)
                used.discard(y)
                del out[src[i]]

    yield from rec(0)


def amalgam_search(m0: TauStructure, m1: TauStructure, m2: TauStructure, budget: int) -> TauStructure | None:
    """Exhaustive search for E with m1 <= E and m2 embedded over m0.

    m1 sits in E literally; each element of m2 outside m0 is either
    identified with an element of m1 outside m0 or kept apart.
    """
    _budget_floor(budget, m1, m2)
    c = len(m0.P)
    for name, s in (("m0", m0), ("m1", m1), ("m2", m2)):
        _psi(s, c, name)
    for s in (m1, m2):
        if not relations_restrict(m0, s):
            raise PreconditionFailed("m0 must be a substructure of both sides")
    new1 = sorted(m1.carriers - m0.carriers)
    new2 = sorted(m2.carriers - m0.carriers)
    same = lambda x, y: m2.sort_of(x) == m1.sort_of(y)  # noqa: E731
    for inj in _partial_injections(new2, new1, same):
        mapping = dict(inj)
        taken = set(m1.carriers) | set(m2.carriers)
        for x in new2:
            if x not in mapping and x in m1.carriers:
                k = 2
                while f"{x}~{k}" in taken:
                    k += 1
                mapping[x] = f"{x}~{k}"
                taken.add(mapping[x])
        m2r = rename(m2, mapping)
        for e in common_extensions([m1, m2r], budget):
            return e
    return None


def jep_witness(size: int) -> tuple[TauStructure, TauStructure]:
    """Two long models with ``size`` levels and |P| = size - 1.

    They share P, the zero, the first successor and the max; position 2
    is a successor in one and a limit in the other.  From size 5 on the
    level-1 widths also differ (2 against 3 nodes).
    """
    if size < 4:
        raise BadSize("jep_witness needs size >= 4")
    c = size - 1
    w1 = (2, 3) if size >= 5 else (1, 1)
    mods = []
    for side, kind2, w in (("a", SUCC, w1[0]), ("b", LIMIT, w1[1])):
        kinds = [SUCC, kind2] + [SUCC] * (size - 4)
        widths = [1, w] + [1] * (size - 3)
        parents = {f"v1_{j}": "v0_0" for j in range(w)}
        m = canonical_model(c, kinds, widths, parents)
        ren = {f"l{i}": f"{side}{i}" for i in range(2, size - 1)}
        ren.update({f"v{i}_0": f"{side}v{i}" for i in range(2, size - 1)})
        mods.append(rename(m, ren))
    return mods[0], mods[1]


def ap_failure_witness() -> tuple[TauStructure, TauStructure, TauStructure]:
    """A short m0 with two levels, extended by a successor and by a limit."""
    m1 = canonical_model(3, [SUCC, SUCC], [1, 1, 1])
    m2 = rename(canonical_model(3, [SUCC, LIMIT], [1, 1, 1]), {"l2": "k2", "v2_0": "w2"})
    keep = {"p0", "p1", "p2", "l0", "l1", "M", "v0_0", "v1_0"}
    m0 = TauStructure(
        P=m1.P,
        L=tuple(e for e in m1.L if e.id in keep),
        V=frozenset(v for v in m1.V if v.id in keep),
        T=frozenset(t for t in m1.T if set(t) <= keep),
        F=frozenset(t for t in m1.F if set(t) <= keep),
        G=frozenset(t for t in m1.G if set(t) <= keep),
    )
    return m0, m1, m2


__all__ = [
    "AmalgamResult", "amalgamate", "joint_embed_search", "amalgam_search",
    "jep_witness", "ap_failure_witness", "AP_BUDGET",
]
