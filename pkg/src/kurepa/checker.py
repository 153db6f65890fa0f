"""Validation of tau-structures against sigma, sigma' and psi.

Every axiom has a stable tag (see ``TAGS``).  ``check`` reports all
violated axioms at once, in tag order, with the offending elements.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

from .core import LIMIT, LITERAL, MAX, SUCC, ZERO, TauStructure, Verdict, Violation
from .errors import MissingComponent, PreconditionFailed


class SentenceId(str, Enum):
    SIGMA = "sigma"
    SIGMA_PRIME = "sigma_prime"
    PSI = "psi"

    @classmethod
    def parse(cls, name: "str | SentenceId") -> "SentenceId":
        if isinstance(name, SentenceId):
            return name
        return cls(name.replace("-", "_"))


TAGS = (
    "disjoint", "L-nonempty", "L-min", "L-max", "successor", "V-level",
    "T-domain", "T-upward", "T-transitive", "T-levels",
    "limit-unique", "label-level", "label-unique",
    "F-domain", "F-range", "F-function", "F-total", "F-surjective",
    "G-domain", "G-range", "G-function", "G-total", "G-surjective",
    "pruned",
    "prec-domain", "prec-no-max",
    "H-domain", "H-range", "H-function", "H-total", "H-surjective",
    "P-size",
)
_ORDER = {t: i for i, t in enumerate(TAGS)}


@dataclass(frozen=True)
class Classification:
    l_kind: str
    kurepa_analog: bool


class _Report:
    def __init__(self) -> None:
        self.items: list[tuple[int, tuple[str, ...], str, str]] = []

    def add(self, tag: str, witnesses, message: str) -> None:
        self.items.append((_ORDER[tag], tuple(map(str, witnesses)), message, tag))

    def verdict(self) -> Verdict:
        seen = set()
        out = []
        for rank, wit, message, tag in sorted(self.items):
            if (rank, wit) not in seen:
                seen.add((rank, wit))
                out.append(Violation(tag, wit, message))
        return Verdict(tuple(out))


def _witness_fns(rep: _Report, name: str, triples, dom_ok, rng_ok, keys, targets, universe) -> None:
    """Shared F/G/H logic: domain, range, functionality, totality, onto.

    ``keys`` lists the (first, second) argument pairs that must be defined;
    ``targets`` maps each first argument to the values that must be hit.
    A value outside ``universe`` never counts as defined.
    """
    values = defaultdict(set)
    every = defaultdict(set)
    for t in triples:
        a, u, b = t
        every[(a, u)].add(b)
        if not dom_ok(a, u):
            rep.add(f"{name}-domain", t, f"{name}({a},{u}) is outside the domain")
            continue
        if not rng_ok(a, b):
            rep.add(f"{name}-range", t, f"{name}({a},{u}) = {b} lies outside the codomain")
        values[(a, u)].add(b)
    # functionality binds every triple, in the domain or not
    for key, bs in every.items():
        if len(bs) > 1:
            rep.add(f"{name}-function", key, f"{name}{key} has {len(bs)} values")
    for key in keys:
        if not values.get(key, set()) & universe:
            rep.add(f"{name}-total", key, f"{name}{key} is undefined")
    hit = defaultdict(set)
    for (a, _), bs in values.items():
        hit[a] |= bs
    for a, want in targets.items():
        for b in want:
            if b not in hit[a]:
                rep.add(f"{name}-surjective", (a, b), f"{b} is not in the range of {name}({a},.)")


def check(
    s: TauStructure,
    which: "str | SentenceId" = SentenceId.SIGMA_PRIME,
    *,
    mode: str | None = None,
    c: int | None = None,
    pruned: bool = False,
) -> Verdict:
    """Check ``s`` against the chosen sentence.

    ``mode`` overrides ``s.mode``.  ``c`` is the declared size of P and is
    required for psi.  ``pruned`` adds the optional pruning axiom.
    """
    which = SentenceId.parse(which)
    mode = mode or s.mode
    if which is SentenceId.SIGMA and (s.prec is None or s.H is None):
        raise MissingComponent("sigma needs both prec and H")
    if which is SentenceId.PSI and c is None:
        raise ValueError("psi needs the declared size c")
    rep = _Report()

    level_ids = [e.id for e in s.L]
    node_ids = [v.id for v in s.V]
    lset, vset = set(level_ids), set(node_ids)
    for u in (s.P & lset) | (s.P & vset) | (lset & vset):
        k = (u in s.P) + (u in lset) + (u in vset)
        rep.add("disjoint", [u], f"{u} belongs to {k} sorts")
    if len(lset) != len(level_ids) or len(vset) != len(node_ids):
        for u, k in (Counter(level_ids) + Counter(node_ids)).items():
            if k > 1:
                rep.add("disjoint", [u], f"{u} is declared {k} times")

    pos = s.position
    n = len(s.L)
    last = s.L[-1].id if n else None
    if n == 0:
        rep.add("L-nonempty", [], "L is empty")
    for i, e in enumerate(s.L):
        if (e.kind == ZERO) != (i == 0):
            rep.add("L-min", [e.id], "the zero element must be exactly the least element")
        if n > 1 and (e.kind == MAX) != (i == n - 1):
            rep.add("L-max", [e.id], "the max element must be exactly the greatest element")
        if e.kind == SUCC:
            if e.succ_of is None or pos.get(e.succ_of) != i - 1 or i == 0:
                rep.add("successor", [e.id], f"{e.id} is tagged successor of {e.succ_of}, which does not immediately precede it")
        elif e.succ_of is not None:
            rep.add("successor", [e.id], f"{e.id} is not a successor but names {e.succ_of}")

    # an id declared twice sits at every level it was declared at
    lvl: dict[str, set[int]] = defaultdict(set)
    labs: dict[str, set] = defaultdict(set)
    for v in s.V:
        if v.level in pos:
            lvl[v.id].add(pos[v.level])
        if v.label is not None:
            labs[v.id].add(v.label)
    for x in {v.id for v in s.V} - lvl.keys():
        rep.add("V-level", [x], f"{x} sits at no known level")
    lvl = dict(lvl)
    by_pos = defaultdict(list)
    for x, ps in lvl.items():
        for i in ps:
            by_pos[i].append(x)
    nodes = s.node
    carriers = s.carriers

    succ = defaultdict(set)
    pred = defaultdict(set)
    for x, y in s.T:
        if x not in nodes or y not in nodes:
            rep.add("T-domain", (x, y), "T relates a non-node")
        if x in lvl and y in lvl and min(lvl[x]) >= max(lvl[y]):
            rep.add("T-upward", (x, y), f"T({x},{y}) does not go up in level")
        succ[x].add(y)
        pred[y].add(x)
    for x, ys in list(succ.items()):
        for y in ys:
            for z in succ.get(y, ()):
                if z not in succ[x] and {x, y, z} <= carriers:
                    rep.add("T-transitive", (x, y, z), f"T({x},{y}) and T({y},{z}) but not T({x},{z})")
    for y, ps in lvl.items():
        below = defaultdict(int)
        for x in pred.get(y, ()):
            for i in lvl.get(x, ()):
                below[i] += 1
        for i in range(max(ps)):
            if below[i] != 1:
                rep.add("T-levels", (y, s.L[i].id), f"{y} has {below[i]} predecessors at level {s.L[i].id}")

    limit_pos = {i for i, e in enumerate(s.L) if e.kind == LIMIT}
    if n:
        limit_pos.add(n - 1)
    for i in limit_pos:
        groups = defaultdict(list)
        for x in sorted(by_pos.get(i, ())):
            groups[frozenset(pred.get(x, ())) & carriers].append(x)
        for xs in groups.values():
            for j, x in enumerate(xs):
                for y in xs[j + 1:]:
                    apart = any(a != b for a in labs.get(x, ()) for b in labs.get(y, ()))
                    if mode == LITERAL or not apart:
                        rep.add("limit-unique", (x, y), f"{x} and {y} share their predecessors at limit level {s.L[i].id}")

    by_label = defaultdict(set)
    for x, ls in labs.items():
        if n == 0 or n - 1 not in lvl.get(x, ()):
            rep.add("label-level", [x], f"{x} carries a label below the max level")
        for lab in ls:
            by_label[lab].add(x)
    for lab, xs in by_label.items():
        if len(xs) > 1:
            rep.add("label-unique", sorted(xs), f"label {lab} is used {len(xs)} times")

    nonmax = [e.id for e in s.L[:-1]]
    nonmax_set = set(nonmax)
    P = sorted(s.P)
    _witness_fns(
        rep, "F", s.F,
        dom_ok=lambda a, p: a in nonmax_set and p in s.P,
        rng_ok=lambda a, b: b in pos and pos[b] <= pos[a],
        keys=[(a, p) for a in nonmax for p in P],
        targets={a: [b.id for b in s.L[: pos[a] + 1]] for a in nonmax},
        universe=carriers,
    )
    _witness_fns(
        rep, "G", s.G,
        dom_ok=lambda a, p: a in nonmax_set and p in s.P,
        rng_ok=lambda a, x: pos.get(a) in lvl.get(x, ()),
        keys=[(a, p) for a in nonmax for p in P],
        targets={a: by_pos.get(pos[a], ()) for a in nonmax},
        universe=carriers,
    )

    if pruned:
        for x, ps in lvl.items():
            if min(ps) >= n - 1:
                continue
            up = {i for y in succ.get(x, ()) for i in lvl.get(y, ())}
            for j in range(min(ps) + 1, n - 1):
                if j not in up:
                    rep.add("pruned", (x, s.L[j].id), f"{x} has no successor at level {s.L[j].id}")

    if which is SentenceId.SIGMA:
        top = sorted(by_pos.get(n - 1, ())) if n else []
        prec = list(s.prec)
        rank: dict[str, int] = {}
        for i, x in enumerate(prec):
            rank.setdefault(x, i)
        bad = sorted({x for x, k in Counter(prec).items() if k > 1} | (set(prec) - set(top)) | (set(top) - set(prec)))
        for x in bad:
            rep.add("prec-domain", [x], f"prec is not a linear order of V(max) at {x}")
        if prec:
            rep.add("prec-no-max", [prec[-1]], f"{prec[-1]} is a prec-maximum")
        top_set = set(top)

        def below_eq(x: str, y: str) -> bool:
            return x in rank and y in rank and rank[x] <= rank[y]

        _witness_fns(
            rep, "H", s.H,
            dom_ok=lambda y, a: y in top_set and a in pos,
            rng_ok=lambda y, x: below_eq(x, y),
            keys=[(y, a) for y in top for a in level_ids],
            targets={y: sorted(x for x in top if below_eq(x, y)) for y in top},
            universe=carriers,
        )

    if which is SentenceId.PSI and len(s.P) != c:
        rep.add("P-size", [], f"|P| = {len(s.P)} but c = {c}")
    return rep.verdict()


def is_long(s: TauStructure, c: int | None = None) -> bool:
    c = len(s.P) if c is None else c
    return len(s.L) - 1 == c


def classify(s: TauStructure, c: int | None = None) -> Classification:
    """Short/long L and the Kurepa-analog flag of a psi-model."""
    c = len(s.P) if c is None else c
    if c < 1:
        raise PreconditionFailed("classification needs c >= 1")
    v = check(s, SentenceId.PSI, c=c)
    if not v.ok:
        raise PreconditionFailed(f"not a model of psi: {sorted(v.tags)}")
    long_l = is_long(s, c)
    return Classification("longL" if long_l else "shortL", long_l and len(s.max_nodes) > c)
