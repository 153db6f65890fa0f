"""JSON documents for structures and trees.

Output is canonical: keys sorted, lists in a fixed order, two-space
indentation and a trailing newline, so equal values give equal bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .core import KINDS, MODES, LevelElem, Node, TauStructure, node_key
from .errors import ParseError


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _pairs_by_key(triples) -> dict[str, list[list[str]]]:
    out: dict[str, list[list[str]]] = {}
    for a, u, v in sorted(triples):
        out.setdefault(a, []).append([u, v])
    return out


def structure_to_obj(s: TauStructure) -> dict[str, Any]:
    L = []
    for e in s.L:
        d = {"id": e.id, "kind": e.kind}
        if e.succ_of is not None:
            d["succ_of"] = e.succ_of
        L.append(d)
    V = []
    for v in sorted(s.V, key=node_key):
        d = {"id": v.id, "level": v.level}
        if v.label is not None:
            d["label"] = v.label
        V.append(d)
    obj: dict[str, Any] = {
        "P": sorted(s.P),
        "L": L,
        "V": V,
        "T": [list(t) for t in sorted(s.T)],
        "F": _pairs_by_key(s.F),
        "G": _pairs_by_key(s.G),
        "mode": s.mode,
    }
    if s.prec is not None:
        obj["prec"] = list(s.prec)
    if s.H is not None:
        obj["H"] = _pairs_by_key(s.H)
    return obj


def dump_structure(s: TauStructure) -> str:
    return dumps(structure_to_obj(s))


class _Locator:
    """Maps an offending value back to a line of the source text."""

    def __init__(self, text: str, path: str):
        self.text = text
        self.path = path

    def fail(self, value: Any, reason: str) -> ParseError:
        token = json.dumps(value, ensure_ascii=False) if not isinstance(value, str) else json.dumps(value)
        idx = self.text.find(token)
        if idx < 0 and isinstance(value, str):
            idx = self.text.find(value)
        line = self.text.count("\n", 0, idx) + 1 if idx >= 0 else 1
        return ParseError(self.path, line, token[:40], reason)


def load_json(text: str, path: str = "<string>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        token = text[e.pos:e.pos + 16].split("\n")[0] or "<eof>"
        raise ParseError(path, e.lineno, token, e.msg) from None


def _str_list(loc: _Locator, obj: Any, what: str) -> list[str]:
    if not isinstance(obj, list) or not all(isinstance(x, str) for x in obj):
        raise loc.fail(obj, f"{what} must be a list of strings")
    return obj


def _triples(loc: _Locator, obj: Any, what: str) -> set[tuple[str, str, str]]:
    if not isinstance(obj, dict):
        raise loc.fail(obj, f"{what} must map ids to pair lists")
    out = set()
    for a, pairs in obj.items():
        if not isinstance(pairs, list):
            raise loc.fail(pairs, f"{what}[{a}] must be a pair list")
        for pr in pairs:
            if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(u, str) for u in pr)):
                raise loc.fail(pr, f"{what}[{a}] entries must be [id, id] pairs")
            out.add((a, pr[0], pr[1]))
    return out


def structure_from_obj(obj: Any, *, text: str = "", path: str = "<string>") -> TauStructure:
    loc = _Locator(text, path)
    if not isinstance(obj, dict):
        raise loc.fail(obj, "structure document must be an object")
    allowed = {"P", "L", "V", "T", "F", "G", "prec", "H", "mode"}
    for k in sorted(obj):
        if k not in allowed:
            raise loc.fail(k, f"unknown key {k!r}")
    for k in ("P", "L", "V", "T", "F", "G"):
        if k not in obj:
            raise ParseError(path, 1, "{", f"missing key {k!r}")
    P = _str_list(loc, obj["P"], "P")
    L = []
    for e in obj["L"] if isinstance(obj["L"], list) else [obj["L"]]:
        if not isinstance(e, dict) or not isinstance(e.get("id"), str):
            raise loc.fail(e, "L entries need a string 'id'")
        kind = e.get("kind")
        if kind not in KINDS:
            raise loc.fail(kind, f"unknown level kind {kind!r}")
        succ_of = e.get("succ_of")
        if succ_of is not None and not isinstance(succ_of, str):
            raise loc.fail(succ_of, "succ_of must be an id")
        extra = set(e) - {"id", "kind", "succ_of"}
        if extra:
            raise loc.fail(sorted(extra)[0], "unknown key in L entry")
        L.append(LevelElem(e["id"], kind, succ_of))
    V = []
    if not isinstance(obj["V"], list):
        raise loc.fail(obj["V"], "V must be a list")
    for v in obj["V"]:
        if not isinstance(v, dict) or not isinstance(v.get("id"), str) or not isinstance(v.get("level"), str):
            raise loc.fail(v, "V entries need string 'id' and 'level'")
        label = v.get("label")
        if label is not None and (not isinstance(label, int) or isinstance(label, bool) or label < 0):
            raise loc.fail(label, "label must be a natural number")
        extra = set(v) - {"id", "level", "label"}
        if extra:
            raise loc.fail(sorted(extra)[0], "unknown key in V entry")
        V.append(Node(v["id"], v["level"], label))
    T = set()
    if not isinstance(obj["T"], list):
        raise loc.fail(obj["T"], "T must be a pair list")
    for pr in obj["T"]:
        if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(u, str) for u in pr)):
            raise loc.fail(pr, "T entries must be [id, id] pairs")
        T.add((pr[0], pr[1]))
    F = _triples(loc, obj["F"], "F")
    G = _triples(loc, obj["G"], "G")
    prec = None
    if obj.get("prec") is not None:
        prec = tuple(_str_list(loc, obj["prec"], "prec"))
    H = None
    if obj.get("H") is not None:
        H = _triples(loc, obj["H"], "H")
    mode = obj.get("mode", "literal")
    if mode not in MODES:
        raise loc.fail(mode, f"unknown mode {mode!r}")
    return TauStructure(P=frozenset(P), L=tuple(L), V=frozenset(V), T=frozenset(T),
                        F=frozenset(F), G=frozenset(G), prec=prec, H=H, mode=mode)


def parse_structure(text: str, path: str = "<string>") -> TauStructure:
    return structure_from_obj(load_json(text, path), text=text, path=path)


def read_structure(path: str | Path) -> TauStructure:
    p = Path(path)
    return parse_structure(p.read_text(encoding="utf-8"), str(p))


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


# -- trees --


def tree_to_obj(t) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "levels": [list(lv) for lv in t.levels],
        "parent": [[x, p] for x, p in sorted(t.parent.items())],
    }
    if t.branch_labels is not None:
        obj["branch_labels"] = [[x, list(ls)] for x, ls in sorted(t.branch_labels.items())]
    return obj


def dump_tree(t) -> str:
    return dumps(tree_to_obj(t))


def tree_from_obj(obj: Any, *, text: str = "", path: str = "<string>"):
    from .treeops import PrunedTree

    loc = _Locator(text, path)
    if not isinstance(obj, dict) or "levels" not in obj:
        raise loc.fail(obj if not isinstance(obj, dict) else "{", "tree document needs 'levels'")
    for k in sorted(obj):
        if k not in ("levels", "parent", "branch_labels"):
            raise loc.fail(k, f"unknown key {k!r}")
    if not isinstance(obj["levels"], list):
        raise loc.fail(obj["levels"], "levels must be a list of lists")
    levels = tuple(tuple(_str_list(loc, lv, "level")) for lv in obj["levels"])
    parent = {}
    for pr in obj.get("parent", []):
        if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(u, str) for u in pr)):
            raise loc.fail(pr, "parent entries must be [child, parent] pairs")
        parent[pr[0]] = pr[1]
    labels = None
    if "branch_labels" in obj:
        labels = {}
        for pr in obj["branch_labels"]:
            if not (isinstance(pr, list) and len(pr) == 2 and isinstance(pr[0], str) and isinstance(pr[1], list)):
                raise loc.fail(pr, "branch_labels entries must be [leaf, [labels]]")
            labels[pr[0]] = tuple(pr[1])
    return PrunedTree(levels=levels, parent=parent, branch_labels=labels)


def parse_tree(text: str, path: str = "<string>"):
    return tree_from_obj(load_json(text, path), text=text, path=path)


def read_tree(path: str | Path):
    p = Path(path)
    return parse_tree(p.read_text(encoding="utf-8"), str(p))
