"""Small-model laboratory: enumerate psi-models up to isomorphism and
check the structural laws behind the three-way classification.

A model is determined (up to isomorphism) by its L-shape, the leveled
forest of non-max nodes, how many max-level nodes sit over each top
chain, and the multiset of P-profiles (for every non-max level, where
F and G send that element of P).  Normal form: literal models carry no
labels, surrogate models label every max-level node ``0, 1, ...``.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations, product
from typing import Iterable, Iterator

from .checker import SentenceId, check, classify, is_long
from .core import LIMIT, LITERAL, MODES, SUCC, TauStructure, canonical_model
from .errors import PreconditionFailed, TooLarge
from .io import structure_to_obj
from .morphisms import find_proper_extension
from .treeops import count_branches, decode_structure

MAX_FEASIBLE = 12


def _workers() -> int:
    """KUREPA_THREADS caps the worker count; 0 or unset means one per CPU."""
    raw = os.environ.get("KUREPA_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


# -- shapes and raw candidates --


def _shapes(max_size: int, c: int) -> Iterator[tuple[tuple[str, ...], tuple[int, ...]]]:
    """(kinds of levels 1..n-1, widths of levels 0..n-1), smallest first."""
    yield (), ()
    if c == 0:
        return
    for n in range(1, c + 1):
        for kinds in product((SUCC, LIMIT), repeat=n - 1):
            for widths in product(range(1, c + 1), repeat=n):
                if c + n + 1 + sum(widths) <= max_size:
                    yield kinds, widths


def _parent_choices(kinds, widths) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Parent index of every node at levels 1.., sorted within a level."""
    per_level = []
    for i in range(1, len(widths)):
        opts = []
        for ps in combinations_with_replacement(range(widths[i - 1]), widths[i]):
            if kinds[i - 1] == LIMIT and len(set(ps)) < len(ps):
                continue
            opts.append(ps)
        per_level.append(opts)
    return product(*per_level)


def _branch_counts(top: int, room: int, mode: str) -> Iterator[tuple[int, ...]]:
    cap = 1 if mode == LITERAL else room
    for counts in product(range(cap + 1), repeat=top):
        if sum(counts) <= room:
            yield counts


def _profile_sets(c: int, widths) -> Iterator[tuple[tuple[tuple[int, int], ...], ...]]:
    """Multisets of c profiles whose F and G parts are onto, level by level."""
    n = len(widths)
    profiles = list(product(*[list(product(range(i + 1), range(widths[i]))) for i in range(n)]))
    for combo in combinations_with_replacement(profiles, c):
        ok = True
        for i in range(n):
            if len({p[i][0] for p in combo}) != i + 1 or len({p[i][1] for p in combo}) != widths[i]:
                ok = False
                break
        if ok:
            yield combo


# -- canonical form --


def _relabel(kinds, widths, parents, counts, profiles, perms):
    """Rename nodes by ``perms`` (old index -> new index per level)."""
    new_parents = []
    for i in range(1, len(widths)):
        row = [0] * widths[i]
        for old, p in enumerate(parents[i - 1]):
            row[perms[i][old]] = perms[i - 1][p]
        new_parents.append(tuple(row))
    if widths:
        top = len(widths) - 1
        new_counts = [0] * widths[top]
        for old, k in enumerate(counts):
            new_counts[perms[top][old]] = k
        new_counts = tuple(new_counts)
    else:
        new_counts = counts
    new_prof = tuple(sorted(tuple((f, perms[i][g]) for i, (f, g) in enumerate(p)) for p in profiles))
    return (tuple(new_parents), new_counts, new_prof)


def canonical_key(kinds, widths, parents, counts, profiles) -> tuple:
    """Least encoding over all renamings of the non-max nodes."""
    best = None
    for perms in product(*[list(permutations(range(w))) for w in widths]):
        enc = _relabel(kinds, widths, parents, counts, profiles, perms)
        if best is None or enc < best:
            best = enc
    return (tuple(kinds), tuple(widths)) + best


def _build(c: int, mode: str, key: tuple) -> TauStructure:
    kinds, widths, parents, counts, profiles = key
    n = len(widths)
    par = {}
    for i in range(1, n):
        for j, p in enumerate(parents[i - 1]):
            par[f"v{i}_{j}"] = f"v{i - 1}_{p}"
    branches = []
    for j, k in enumerate(counts):
        for _ in range(k):
            branches.append((f"v{n - 1}_{j}" if n else None, len(branches) if mode != LITERAL else None))
    P = [f"p{k}" for k in range(c)]
    lv = [f"l{i}" for i in range(n)]
    F = {lv[i]: {P[k]: lv[prof[i][0]] for k, prof in enumerate(profiles)} for i in range(n)}
    G = {lv[i]: {P[k]: f"v{i}_{prof[i][1]}" for k, prof in enumerate(profiles)} for i in range(n)}
    return canonical_model(c, list(kinds), list(widths), par, branches, mode=mode, F=F, G=G)


def _shape_keys(args) -> list[tuple]:
    max_size, c, mode, kinds, widths = args
    base = c + len(widths) + 1 + sum(widths)
    room = max_size - base
    top = widths[-1] if widths else 1
    keys = set()
    profile_sets = list(_profile_sets(c, widths)) if widths else [tuple(() for _ in range(c))]
    for parents in _parent_choices(kinds, widths):
        for counts in _branch_counts(top, room, mode):
            for profiles in profile_sets:
                keys.add(canonical_key(kinds, widths, parents, counts, profiles))
    return sorted(keys, key=lambda k: (base + sum(k[3]), k))


def enumerate_models(max_size: int, c: int, mode: str = LITERAL) -> Iterator[TauStructure]:
    """Every psi-model with |P| = c and at most ``max_size`` elements, once
    per isomorphism class, ordered by L-shape then size."""
    if max_size > MAX_FEASIBLE:
        raise TooLarge(f"max_size {max_size} exceeds the feasibility bound {MAX_FEASIBLE}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if c < 0:
        raise ValueError("c must be a natural number")
    jobs = [(max_size, c, mode, kinds, widths) for kinds, widths in _shapes(max_size, c)]
    if c + 1 > max_size:
        return
    workers = min(_workers(), len(jobs)) or 1
    # small spaces are cheaper than starting a pool
    if workers > 1 and max_size >= 10:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_shape_keys, jobs))
    else:
        results = map(_shape_keys, jobs)
    for keys in results:
        for key in keys:
            yield _build(c, mode, key)


# -- the report --


@dataclass(frozen=True)
class Counterexample:
    reason: str
    structure: TauStructure | None = None


@dataclass(frozen=True)
class SpectrumReport:
    sizes_realized: frozenset[int]
    mm_sizes: frozenset[int]
    counterexample: Counterexample | None
    c: int
    max_size: int
    ext_budget: int
    mode: str = LITERAL
    model_count: int = 0
    kurepa_count: int = 0
    counts_by_size: dict[int, int] = field(default_factory=dict, compare=False)

    @property
    def trichotomy_ok(self) -> bool:
        return self.counterexample is None


def _law_failure(s: TauStructure, c: int) -> str | None:
    v = check(s, SentenceId.PSI, c=c)
    if not v.ok:
        return "not a model: " + ",".join(sorted(v.tags))
    if is_long(s, c):
        top = s.nonmax_levels[-1]
        hit = {b for a, _, b in s.F if a == top}
        if len(hit) != c or len(s.nonmax_levels) != c:
            return "long L without a bijective top F"
    else:
        # the empty forest still has one (empty) branch
        if len(s.max_nodes) > max(count_branches(decode_structure(s)), 1):
            return "short L with more max-level nodes than branches"
    if s.mode == LITERAL and classify(s, c).kurepa_analog:
        return "Kurepa analog in literal mode"
    return None


def spectra_report(
    max_size: int,
    c: int,
    ext_budget: int = 1,
    mode: str = LITERAL,
    inject: Iterable[TauStructure] = (),
) -> SpectrumReport:
    """Sizes, budgeted maximal sizes and the classification laws.

    A model counts as maximal when no proper extension adds at most
    ``ext_budget`` elements.  ``inject`` feeds extra structures through
    the same checks (negative controls).
    """
    if c < 1:
        raise PreconditionFailed("the classification needs c >= 1")
    if ext_budget < 0:
        raise ValueError("ext_budget must be a natural number")
    sizes: dict[int, int] = {}
    mm = set()
    bad: Counterexample | None = None
    kurepa = 0
    for s in enumerate_models(max_size, c, mode):
        sizes[s.size] = sizes.get(s.size, 0) + 1
        why = _law_failure(s, c)
        if why is not None:
            bad = bad or Counterexample(why, s)
            if why.startswith("not a model"):
                continue
        if classify(s, c).kurepa_analog:
            kurepa += 1
        if find_proper_extension(s, s.size + ext_budget) is None:
            mm.add(s.size)
    for s in inject:
        why = _law_failure(s, c)
        if why is not None:
            bad = bad or Counterexample(why, s)
    if bad is None and sizes:
        lo, hi = min(sizes), max(sizes)
        gaps = [k for k in range(lo, hi + 1) if k not in sizes]
        if gaps:
            bad = Counterexample(f"sizes not downward closed: missing {gaps}")
    return SpectrumReport(
        sizes_realized=frozenset(sizes),
        mm_sizes=frozenset(mm),
        counterexample=bad,
        c=c,
        max_size=max_size,
        ext_budget=ext_budget,
        mode=mode,
        model_count=sum(sizes.values()),
        kurepa_count=kurepa,
        counts_by_size=dict(sorted(sizes.items())),
    )


def report_to_obj(r: SpectrumReport) -> dict:
    cx = None
    if r.counterexample is not None:
        cx = {"reason": r.counterexample.reason}
        if r.counterexample.structure is not None:
            cx["structure"] = structure_to_obj(r.counterexample.structure)
    return {
        "c": r.c,
        "max_size": r.max_size,
        "ext_budget": r.ext_budget,
        "mode": r.mode,
        "sizes_realized": sorted(r.sizes_realized),
        "mm_sizes": sorted(r.mm_sizes),
        "trichotomy_ok": r.trichotomy_ok,
        "counterexample": cx,
        "model_count": r.model_count,
        "kurepa_count": r.kurepa_count,
        "counts_by_size": {str(k): v for k, v in sorted(r.counts_by_size.items())},
    }
