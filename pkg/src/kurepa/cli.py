"""Command line entry point: ``kurepa <verb> ...``.

Exit codes: 0 success (or verdict ok), 1 verdict failed or nothing
found, 2 usage, parse or precondition errors.  Documents go to the
output file (or stdout); human summaries go to stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .amalgam import amalgam_search, amalgamate, ap_failure_witness, jep_witness, joint_embed_search
from .checker import check
from .core import MODES
from .errors import KurepaError, ParseError, WidthExceeded
from .forcing import cohen, cohen_support_and_restrict, run_generic, run_to_obj, standard_requests
from .io import dump_structure, dump_tree, dumps, load_json, read_structure, read_tree, write_text
from .morphisms import embedding_report, find_proper_extension
from .spectrum import report_to_obj, spectra_report
from .treeops import count_branches, merge_shifted


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_validate(a) -> int:
    s = read_structure(a.file)
    v = check(s, a.sentence, mode=a.mode, c=a.c if a.c is not None else len(s.P), pruned=a.pruned)
    for x in v.violations:
        print(f"{x.tag}\t{','.join(x.witnesses)}\t{x.message}")
    _note("ok" if v.ok else f"{len(v.violations)} violation(s)")
    return 0 if v.ok else 1


def cmd_compare(a) -> int:
    m, n = read_structure(a.m), read_structure(a.n)
    r = embedding_report(m, n)
    for key in ("is_sub", "l_initial_segment", "levels_equal", "order_preserved", "new_branch_count"):
        val = getattr(r, key)
        print(f"{key}={str(val).lower() if isinstance(val, bool) else val}")
    return 0 if r.is_sub else 1


def cmd_extend(a) -> int:
    m = read_structure(a.file)
    e = find_proper_extension(m, a.budget)
    if e is None:
        _note(f"no proper extension within budget {a.budget}")
        return 1
    _emit(dump_structure(e), a.output)
    return 0


def cmd_amalgamate(a) -> int:
    m0, m1, m2 = (read_structure(p) for p in (a.base, a.left, a.right))
    r = amalgamate(m0, m1, m2)
    _emit(dump_structure(r.n), a.output)
    _note(f"identified {len(r.identified_pairs)} branch pair(s)")
    return 0


def cmd_witness(a) -> int:
    outdir = Path(a.output)
    outdir.mkdir(parents=True, exist_ok=True)
    if a.kind == "jep":
        m, n = jep_witness(a.size)
        budget = a.budget if a.budget is not None else m.size + n.size
        found = joint_embed_search(m, n, budget)
        files = {"m.json": m, "n.json": n}
        cert = {"kind": "jep", "size": a.size, "budget": budget,
                "sizes": [m.size, n.size], "joint_extension_found": found is not None}
    else:
        m0, m1, m2 = ap_failure_witness()
        budget = a.budget if a.budget is not None else 10
        found = amalgam_search(m0, m1, m2, budget)
        control = amalgam_search(m0, m1, m1, budget)
        files = {"m0.json": m0, "m1.json": m1, "m2.json": m2}
        cert = {"kind": "ap", "budget": budget, "sizes": [m0.size, m1.size, m2.size],
                "amalgam_found": found is not None, "control_amalgamates": control is not None}
    for name, s in files.items():
        write_text(outdir / name, dump_structure(s))
    write_text(outdir / "certificate.json", dumps(cert))
    return 1 if found is not None else 0


def cmd_merge(a) -> int:
    trees = [read_tree(p) for p in a.trees]
    _emit(dump_tree(merge_shifted(trees)), a.output)
    return 0


def cmd_branches(a) -> int:
    print(count_branches(read_tree(a.file)))
    return 0


def cmd_force(a) -> int:
    try:
        run = run_generic(standard_requests(a.height, a.branches), a.width, a.seed)
    except WidthExceeded as e:
        _note(f"width exceeded: {e} (request {e.request})")
        return 1
    _emit(dumps(run_to_obj(run)), a.output)
    return 0


def _read_cohen(path: str) -> list[frozenset]:
    text = Path(path).read_text(encoding="utf-8")
    obj = load_json(text, path)
    if not isinstance(obj, list):
        raise ParseError(path, 1, text[:16], "expected a list of conditions")
    out = []
    for g in obj:
        if not isinstance(g, list) or not all(
            isinstance(t, list) and len(t) == 3 and all(isinstance(u, int) for u in t) for t in g
        ):
            token = dumps(g).strip()[:40]
            line = text.count("\n", 0, max(text.find(token.split("\n")[0]), 0)) + 1
            raise ParseError(path, line, token, "a condition is a list of [coordinate, slot, bit] triples")
        out.append(cohen(((i, j), b) for i, j, b in g))
    return out


def _cohen_obj(g: frozenset) -> list:
    return [[i, j, b] for (i, j), b in sorted(g)]


def cmd_cohen_restrict(a) -> int:
    r = cohen_support_and_restrict(_read_cohen(a.conds), _read_cohen(a.filter))
    obj = {
        "dstar": [list(k) for k in sorted(r.dstar)],
        "d": sorted(r.d),
        "restricted": sorted(_cohen_obj(g) for g in r.restricted),
    }
    _emit(dumps(obj), a.output)
    return 0


def cmd_spectrum(a) -> int:
    r = spectra_report(a.max_size, a.c, a.budget, a.mode)
    _emit(dumps(report_to_obj(r)), a.output)
    _note(f"{r.model_count} model(s); trichotomy {'ok' if r.trichotomy_ok else 'FAILED'}")
    return 0 if r.trichotomy_ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kurepa", description="Finite tau-structures, trees and forcing conditions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a structure against a sentence")
    p.add_argument("file")
    p.add_argument("--sentence", default="sigma-prime", choices=["sigma", "sigma-prime", "sigma_prime", "psi"])
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--c", type=int, help="declared |P| for psi (default: |P| of the file)")
    p.add_argument("--pruned", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="substructure report for m inside n")
    p.add_argument("m")
    p.add_argument("n")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("extend", help="search for a proper extension")
    p.add_argument("file")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("amalgamate", help="amalgamate two long-L extensions over a base")
    p.add_argument("--base", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_amalgamate)

    p = sub.add_parser("witness", help="write a JEP or AP failure witness and its certificate")
    p.add_argument("--kind", choices=["jep", "ap"], required=True)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--budget", type=int)
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("merge", help="shifted merge of trees")
    p.add_argument("trees", nargs="+")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("branches", help="count maximal branches of a tree")
    p.add_argument("file")
    p.set_defaults(func=cmd_branches)

    p = sub.add_parser("force", help="run the generic condition sequence")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--branches", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("cohen-restrict", help="support and restriction of Cohen conditions")
    p.add_argument("--conds", required=True)
    p.add_argument("--filter", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_cohen_restrict)

    p = sub.add_parser("spectrum", help="small-model spectrum report")
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--budget", type=int, default=1, help="extension headroom for maximality")
    p.add_argument("--mode", choices=MODES, default="literal")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        _note(f"{e.path}:{e.line}: {e.reason} (at {e.token})")
        return 2
    except (KurepaError, ValueError, OSError) as e:
        _note(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
