"""The nine acceptance criteria, one test each (criterion 7 in parts).

Each criterion records a PASS/FAIL line; ``conftest.py`` prints them in
the terminal summary, and running this file directly prints them too.
"""
import random
import time
from itertools import chain, combinations

import pytest

import fo_oracle
import raw_space
import tree_space
from gen import label_variants, random_triple
from kurepa.amalgam import (
    amalgam_search, amalgamate, ap_failure_witness, jep_witness, joint_embed_search,
)
from kurepa.checker import check, classify, is_long
from kurepa.core import LITERAL, MAX, SURROGATE, LevelElem, Node, TauStructure, rename, restrict
from kurepa.errors import BadBudget, WidthExceeded
from kurepa.forcing import (
    HeightAtLeast, IndexInDomain, KurepaCondition, Split, cohen, cohen_support_and_restrict,
    leq, run_generic, run_to_obj,
)
from kurepa.io import dumps
from kurepa.morphisms import embedding_report
from kurepa.spectrum import enumerate_models, spectra_report
from kurepa.treeops import PrunedTree, count_branches, decode_structure, encode_tree, merge_shifted, prune

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    prev = RESULTS.get(n)
    if prev is not None:
        ok = ok and prev[0]
        detail = f"{prev[1]}; {detail}"
    RESULTS[n] = (ok, detail)


def summary_lines() -> list[str]:
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})" for n, (ok, detail) in sorted(RESULTS.items())]


# -- 1. checker against the naive evaluator --

SIGMA_TAGS = {"prec-domain", "prec-no-max", "H-domain", "H-range", "H-function", "H-total", "H-surjective"}


def _sigma_skeletons(max_size):
    """L plus max-level nodes with every typed (prec, H), up to max_size elements."""
    for nl in range(1, max_size + 1):
        ids = [f"a{i}" for i in range(nl)]
        L = tuple(LevelElem(a, "zero" if i == 0 else (MAX if i == nl - 1 else "limit")) for i, a in enumerate(ids))
        for t in range(0, max_size - nl + 1):
            V = frozenset(Node(f"v{j}", ids[-1]) for j in range(t))
            base = TauStructure(P=frozenset(), L=L, V=V)
            yield from raw_space._sigma_extras(base, ids, [f"v{j}" for j in range(t)])


def criterion_1():
    t0 = time.time()
    n = bad = 0
    for s in raw_space.structures(6):
        for mode in (LITERAL, SURROGATE):
            for which, c in (("sigma_prime", None), ("psi", len(s.P))):
                n += 1
                bad += check(s, which, mode=mode, c=c).tags != fo_oracle.evaluate(s, which, mode=mode, c=c)
    for s in raw_space.structures(5, sigma=True):
        for mode in (LITERAL, SURROGATE):
            n += 1
            bad += check(s, "sigma", mode=mode).tags != fo_oracle.evaluate(s, "sigma", mode=mode)
    # size 6 under sigma: the prec/H part exhaustively, full structures by sampling
    for s in _sigma_skeletons(6):
        n += 1
        bad += (check(s, "sigma").tags & SIGMA_TAGS) != fo_oracle._sigma(fo_oracle.Rel(s, s.mode))
    rng = random.Random(6)
    for k, base in enumerate(raw_space.structures(6, min_size=6)):
        if k % 5:
            continue
        top = [v.id for v in base.V if v.level == base.L[-1].id] if base.L else []
        ids = [e.id for e in base.L]
        extras = list(raw_space._sigma_extras(base, ids, top)) if len(top) <= 2 else None
        if extras is None:
            order = rng.sample(top, len(top))
            rank = {x: i for i, x in enumerate(order)}
            H = {(y, a, rng.choice([x for x in order if rank[x] <= rank[y]])) for y in order for a in ids}
            extras = [TauStructure(P=base.P, L=base.L, V=base.V, T=base.T, F=base.F, G=base.G,
                                   prec=order, H=H)]
        s = rng.choice(extras) if extras else None
        if s is None:
            continue
        for mode in (LITERAL, SURROGATE):
            n += 1
            bad += check(s, "sigma", mode=mode).tags != fo_oracle.evaluate(s, "sigma", mode=mode)
    dt = time.time() - t0
    return bad == 0 and dt <= 120, f"{n} comparisons, {bad} disagreements, {dt:.0f}s"


# -- 2 and 3. substructure pairs --


def _all_models(max_size):
    """Isomorphism types of psi-models up to max_size, every labeling."""
    for mode in (LITERAL, SURROGATE):
        for c in range(0, max_size):
            for s in enumerate_models(max_size, c, mode):
                yield from label_variants(s)


def _sub_pairs(max_size):
    """Every psi-model M inside a psi-model N with |N| <= max_size.

    N runs over isomorphism classes; M over the induced substructures that
    are models with the same P (psi pins |P|).
    """
    for N in _all_models(max_size):
        c = len(N.P)
        rest = sorted(N.carriers - N.P)
        for k in range(len(rest) + 1):
            for keep in combinations(rest, k):
                M = restrict(N, set(N.P) | set(keep))
                if check(M, "psi", c=c).ok:
                    yield M, N


def _oracle_fields(M, N):
    lm = [e.id for e in M.L]
    ln = [e.id for e in N.L]
    init = lm[:-1] == ln[: len(lm) - 1] and lm[-1] == ln[-1]
    at = lambda s, a: {v.id for v in s.V if v.level == a}  # noqa: E731
    levels = all(at(M, a) == at(N, a) for a in lm[:-1])
    ids = [v.id for v in M.V]
    order = all(((x, y) in M.T) == ((x, y) in N.T) for x in ids for y in ids)
    return init, levels, order


def criterion_2_and_3():
    t0 = time.time()
    pairs = bad2 = bad3 = mismatch = raw_size = 0
    for M, N in _sub_pairs(7):
        pairs += 1
        r = embedding_report(M, N)
        oracle = _oracle_fields(M, N)
        mismatch += (r.l_initial_segment, r.levels_equal, r.order_preserved) != oracle
        if r.is_sub and not all(oracle):
            bad2 += 1
        c = len(M.P)
        if r.is_sub and is_long(M, c) and M.L != N.L:
            bad3 += 1
        if r.is_sub and M.size > c and M.L != N.L:
            raw_size += 1
    dt = time.time() - t0
    ok2 = bad2 == 0 and mismatch == 0 and pairs > 0 and dt <= 300
    d2 = f"{pairs} pairs, {bad2} exceptions, {mismatch} report/oracle mismatches, {dt:.0f}s"
    d3 = f"{pairs} pairs, {bad3} long-L pairs with different L ({raw_size} short pairs differ, as expected)"
    return (ok2, d2), (bad3 == 0 and pairs > 0, d3)


# -- 4. amalgamation --


def criterion_4():
    rng = random.Random(4)
    bad = largest = 0
    for _ in range(1000):
        m0, m1, m2, shared = random_triple(rng, max_size=40)
        largest = max(largest, m1.size, m2.size)
        r = amalgamate(m0, m1, m2)
        c = len(m0.P)
        ok = check(r.n, "psi", c=c).ok and is_long(m1, c)
        ok = ok and embedding_report(m1, r.n).is_sub
        ok = ok and embedding_report(rename(m2, r.right_map), r.n).is_sub
        new1, new2 = m1.size - m0.size, m2.size - m0.size
        ok = ok and r.n.size == m0.size + new1 + new2 - len(r.identified_pairs)
        ok = ok and len(r.identified_pairs) == shared
        bad += not ok
    m0, _, _, _ = random_triple(random.Random(0))
    ident = amalgamate(m0, m0, m0)
    ok_id = ident.n == m0 and not ident.identified_pairs
    return bad == 0 and ok_id, f"1000 triples (largest {largest}), {bad} failures, identity {'ok' if ok_id else 'broken'}"


# -- 5. JEP and AP witnesses --


def _nonmax_union_exceeds_c(*ms):
    """Any common extension keeps every base non-max level below one shared max,
    so more than c of them rules it out (F-surjection bound)."""
    c = len(ms[0].P)
    return len({a for m in ms for a in m.nonmax_levels}) > c and len({m.max_level for m in ms}) == 1


def criterion_5():
    notes = []
    ok = True
    for size in range(4, 9):
        m, n = jep_witness(size)
        c = size - 1
        valid = check(m, "psi", c=c).ok and check(n, "psi", c=c).ok
        if max(m.size, n.size) <= 10:
            found = joint_embed_search(m, n, 10)
            how = "budget 10"
        else:
            # nothing of size <= 10 can contain a structure this big
            with pytest.raises(BadBudget):
                joint_embed_search(m, n, 10)
            found = joint_embed_search(m, n, m.size + n.size)
            how = f"budget 10 vacuous (|m|={m.size}), searched to {m.size + n.size}"
        ok = ok and valid and found is None and _nonmax_union_exceeds_c(m, n)
        notes.append(f"size {size}: {how}")
    m0, m1, m2 = ap_failure_witness()
    valid = all(check(s, "psi", c=3).ok for s in (m0, m1, m2))
    no_amalgam = amalgam_search(m0, m1, m2, 10) is None
    control = amalgam_search(m0, m1, m1, 10) is not None
    ok = ok and valid and no_amalgam and control and _nonmax_union_exceeds_c(m1, m2)
    notes.append(f"ap: amalgam {'absent' if no_amalgam else 'FOUND'}, control {'ok' if control else 'failed'}")
    return ok, "; ".join(notes)


# -- 6. tree operations --


def _chain_height(t):
    """Brute force: top level index reached by a maximal chain."""
    less = tree_space.strict_order(t)
    lev = t.level_of()
    return max((lev[min(ch, key=lambda x: lev[x])] + len(ch) - 1 for ch in tree_space.maximal_chains(t.nodes, less) if ch), default=-1)


def criterion_6():
    t0 = time.time()
    bad_rt = n_rt = 0
    for t in tree_space.forests(20, roots=1):
        n_rt += 1
        c = max(max(len(lv) for lv in t.levels), t.n_levels)
        d = decode_structure(encode_tree(t, c))
        bad_rt += (d.levels, d.parent) != (t.levels, t.parent)
    for t in tree_space.forests(9, pruned=False):
        n_rt += 1
        c = max(max(len(lv) for lv in t.levels), t.n_levels)
        d = decode_structure(encode_tree(t, c))
        bad_rt += (d.levels, d.parent) != (t.levels, t.parent)
    small = list(tree_space.forests(8, roots=1))
    chains = {t: len(tree_space.maximal_chains(t.nodes, tree_space.strict_order(t))) for t in small}
    heights = {t: _chain_height(t) for t in small}
    bad_merge = n_merge = 0
    seqs = chain(((a,) for a in small), ((a, b) for a in small for b in small),
                 ((a, b, x) for a in small for b in small for x in small))
    for seq in seqs:
        n_merge += 1
        m = merge_shifted(list(seq))
        want_branches = sum(chains[t] for t in seq)
        want_height = max(i + heights[t] for i, t in enumerate(seq))
        if count_branches(m) != want_branches or m.height != want_height:
            bad_merge += 1
        elif len(seq) <= 2 and len(tree_space.maximal_chains(m.nodes, tree_space.strict_order(m))) != want_branches:
            bad_merge += 1
    bad_prune = n_prune = 0
    for t in tree_space.forests(10, pruned=False):
        n_prune += 1
        p = prune(t)
        bad_prune += prune(p) != p or not p.is_pruned()
    dt = time.time() - t0
    ok = bad_rt == bad_merge == bad_prune == 0
    return ok, (f"round trip {n_rt} trees/{bad_rt} bad, merge {n_merge} sequences/{bad_merge} bad, "
                f"prune {n_prune} forests/{bad_prune} bad, {dt:.0f}s")


# -- 7. forcing --


def _conditions(max_nodes=6, pool=(-1, 0, 1, 2)):
    out = []
    for t in tree_space.forests(max_nodes, pruned=False, roots=1):
        ren = {x: x[1:].replace("_", ".") for x in t.nodes}
        tt = PrunedTree(levels=tuple(tuple(ren[x] for x in lv) for lv in t.levels),
                        parent={ren[x]: ren[p] for x, p in t.parent.items()})
        top = tt.levels[-1]
        if len(top) > len(pool):
            continue
        for k in range(len(top), len(pool) + 1):
            for dom in combinations(pool, k):
                for vals in _onto(len(dom), top):
                    out.append(KurepaCondition(tt, dict(zip(dom, vals))))
    return out


def _onto(n, targets):
    from itertools import product

    for vals in product(targets, repeat=n):
        if set(vals) == set(targets):
            yield vals


def criterion_7_order():
    conds = _conditions()
    by_tree: dict = {}
    for p in conds:
        by_tree.setdefault(p.t, []).append(p)
    trees = list(by_tree)
    from kurepa.forcing import is_initial_segment

    ext = {s: [t for t in trees if is_initial_segment(s, t)] for s in trees}
    below = {p: [q for t in ext[p.t] for q in by_tree[t] if leq(q, p)] for p in conds}
    refl = all(p in below[p] for p in conds)
    anti = all(q == p for p in conds for q in below[p] if p in below[q])
    below_sets = {p: set(v) for p, v in below.items()}
    trans = all(r in below_sets[p] for p in conds for q in below[p] for r in below[q])
    ok = refl and anti and trans
    return ok, f"leq on {len(conds)} conditions: reflexive {refl}, antisymmetric {anti}, transitive {trans}"


CRIT7_REQUESTS = [HeightAtLeast(5)] + [IndexInDomain(i) for i in range(8)] + [
    Split(i, j) for i, j in combinations(range(8), 2)
]


def criterion_7_run():
    try:
        run = run_generic(CRIT7_REQUESTS, 4, seed=7)
    except WidthExceeded as e:
        return False, f"generic run stopped: {e} at {e.request}; 8 distinct chains need 8 top nodes, width is 4"
    chains = set(run.branch_map().values())
    ok = run.final.height >= 5 and len(chains) == 8
    return ok, f"height {run.final.height}, {len(chains)} distinct chains"


def criterion_7_replay():
    reqs = [HeightAtLeast(5)] + [IndexInDomain(i) for i in range(4)] + [
        Split(i, j) for i, j in combinations(range(4), 2)
    ]
    same = all(
        dumps(run_to_obj(run_generic(reqs, 4, seed))) == dumps(run_to_obj(run_generic(reqs, 4, seed)))
        for seed in range(20)
    )
    msgs = set()
    for _ in range(2):
        try:
            run_generic(CRIT7_REQUESTS, 4, seed=7)
        except WidthExceeded as e:
            msgs.add((str(e), e.request))
    return same and len(msgs) == 1, f"20 seeds replay byte-identically: {same}"


# -- 8. Cohen supports --


def _random_family(rng):
    h = {}
    for _ in range(rng.randint(0, 6)):
        h[(rng.randrange(5), rng.randrange(3))] = rng.randrange(2)
    items = sorted(h.items())
    filt = [frozenset(c) for k in range(len(items) + 1) for c in combinations(items, k)]
    conds = rng.sample(filt, rng.randint(0, min(4, len(filt))))
    return conds, filt


def criterion_8():
    rng = random.Random(8)
    bad = 0
    for _ in range(10_000):
        conds, filt = _random_family(rng)
        r = cohen_support_and_restrict(conds, filt)
        dstar = {k for g in conds for (k, _b) in g}
        d = {i for (i, _j) in dstar}
        ok = r.dstar == dstar and r.d == d
        restricted = set(r.restricted)
        ok = ok and restricted == {frozenset(x for x in g if x[0][0] in d) for g in filt}
        ok = ok and all(g - {x} in restricted for g in restricted for x in g)
        union = {}
        for g in restricted:
            for k, b in g:
                ok = ok and union.setdefault(k, b) == b
        ok = ok and all(g in restricted for g in conds if all(k[0] in d for k, _ in g))
        bad += not ok
    assert cohen({(0, 0): 1}) == frozenset({((0, 0), 1)})
    return bad == 0, f"10000 families, {bad} mismatches"


# -- 9. spectrum --


def corrupted_model():
    """A literal c = 2 model with two max nodes over one chain."""
    s = next(m for m in enumerate_models(6, 2, LITERAL) if m.max_nodes)
    b = s.max_nodes[0]
    twin = Node(b + "'", s.max_level)
    T = set(s.T) | {(u, twin.id) for u, v in s.T if v == b}
    return TauStructure(P=s.P, L=s.L, V=s.V | {twin}, T=frozenset(T), F=s.F, G=s.G, mode=LITERAL)


def criterion_9():
    t0 = time.time()
    r = spectra_report(6, 2, ext_budget=1, mode=LITERAL)
    bad = corrupted_model()
    assert "limit-unique" in check(bad, "psi", c=2).tags
    neg = spectra_report(6, 2, ext_budget=1, mode=LITERAL, inject=[bad])
    kurepa = sum(classify(m, 2).kurepa_analog for m in enumerate_models(6, 2, LITERAL))
    dt = time.time() - t0
    ok = (r.trichotomy_ok and r.kurepa_count == 0 and kurepa == 0 and bool(r.mm_sizes)
          and not neg.trichotomy_ok and dt <= 600)
    return ok, (f"{r.model_count} models, sizes {sorted(r.sizes_realized)}, mm_sizes {sorted(r.mm_sizes)} "
                f"(extension headroom 1), Kurepa analogs {kurepa}, negative control "
                f"{'flagged' if not neg.trichotomy_ok else 'MISSED'}, {dt:.0f}s")


# -- pytest entry points --


def _run(n, fn):
    ok, detail = fn()
    record(n, ok, detail)
    assert ok, detail


def test_criterion_1_checker_matches_naive_evaluator():
    _run(1, criterion_1)


def test_criteria_2_3_substructure_pairs():
    (ok2, d2), (ok3, d3) = criterion_2_and_3()
    record(2, ok2, d2)
    record(3, ok3, d3)
    assert ok2, d2
    assert ok3, d3


def test_criterion_4_amalgamation():
    _run(4, criterion_4)


def test_criterion_5_witnesses():
    _run(5, criterion_5)


def test_criterion_6_tree_ops():
    _run(6, criterion_6)


def test_criterion_7_leq_is_partial_order():
    _run(7, criterion_7_order)


def test_criterion_7_replay_is_deterministic():
    _run(7, criterion_7_replay)


@pytest.mark.xfail(strict=True, raises=AssertionError,
                   reason="8 distinct branch chains cannot fit in a top level of width 4")
def test_criterion_7_generic_run_eight_chains():
    _run(7, criterion_7_run)


def test_criterion_8_cohen():
    _run(8, criterion_8)


def test_criterion_9_spectrum():
    _run(9, criterion_9)


if __name__ == "__main__":
    for n, fn in [(1, criterion_1), (4, criterion_4), (5, criterion_5), (6, criterion_6),
                  (7, criterion_7_order), (7, criterion_7_replay), (7, criterion_7_run),
                  (8, criterion_8), (9, criterion_9)]:
        record(n, *fn())
    (a, b) = criterion_2_and_3()
    record(2, *a)
    record(3, *b)
    print("\n".join(summary_lines()))
