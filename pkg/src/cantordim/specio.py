"""JSON formats for sets, gauges, covers and witnesses.

All rationals travel as strings ("3/4"); every reader raises SpecFormatError
with a location so the CLI can point at bad input.  Writers are canonical
(sorted keys, fixed separators) so identical inputs give byte-identical
files.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .covers import Cover
from .errors import SpecFormatError
from .hfun import (DEFAULT_N_MAX, DEFAULT_PRECISION_BITS, DyadicHFn,
                   power_hfn, power_log_hfn, table_hfn)
from .ideals import (BlockPartition, EventualPoint, ShelahMWitness,
                     ShelahNWitness, TPrimeWitness)
from .treeset import (BlockConstraintSet, CISet, CylinderUnionSet,
                      ExplicitSet, FullCube, ProductSet, SumSet, TreeSet,
                      UnionSet)
from .words import ISpec


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def rational(text, where: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"bad rational {text!r}: {exc}", where) from None


def rational_str(x: Fraction) -> str:
    return str(Fraction(x))


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise SpecFormatError(f"missing field {key!r}", where)
    return d[key]


# ---------------------------------------------------------------------------
# Index sets and tree sets


def parse_ispec(d: dict, where: str = "I") -> ISpec:
    if not isinstance(d, dict):
        raise SpecFormatError("I-spec must be an object", where)
    if "period" in d:
        return ISpec(d.get("preperiod", ""), ("periodic", _need(d, "period", where)))
    if "powers" in d:
        p = d["powers"]
        return ISpec(d.get("prefix", ""),
                     ("powers", int(_need(p, "c", where)), int(_need(p, "q", where))))
    if "blocks" in d:
        b = d["blocks"]
        return ISpec(d.get("prefix", ""),
                     ("blocks", int(_need(b, "c", where)), int(_need(b, "d", where)),
                      int(_need(b, "q", where))))
    raise SpecFormatError("I-spec needs 'period', 'powers' or 'blocks'", where)


def parse_set(d: dict, where: str = "set") -> TreeSet:
    if not isinstance(d, dict):
        raise SpecFormatError("set spec must be an object", where)
    kind = _need(d, "kind", where)
    if kind == "full_cube":
        return FullCube()
    if kind == "ci":
        return CISet(parse_ispec(_need(d, "I", where), f"{where}.I"))
    if kind == "block_constraint":
        return BlockConstraintSet(_need(d, "boundaries", where),
                                  _need(d, "blocks", where))
    if kind == "explicit":
        return ExplicitSet(_need(d, "words", where), d.get("tail", "zeros"))
    if kind == "cylinder_union":
        return CylinderUnionSet(_need(d, "cylinders", where))
    if kind == "sumset":
        return SumSet(parse_set(_need(d, "a", where), f"{where}.a"),
                      parse_set(_need(d, "b", where), f"{where}.b"))
    if kind == "product":
        return ProductSet(parse_set(_need(d, "a", where), f"{where}.a"),
                          parse_set(_need(d, "b", where), f"{where}.b"))
    if kind == "union":
        return UnionSet([parse_set(m, f"{where}.members[{i}]")
                         for i, m in enumerate(_need(d, "members", where))])
    raise SpecFormatError(f"unknown set kind {kind!r}", where)


def set_to_dict(e: TreeSet) -> dict:
    return e.spec_dict()


# ---------------------------------------------------------------------------
# Gauges


def parse_hfn(d: dict, where: str = "hfn") -> DyadicHFn:
    if not isinstance(d, dict):
        raise SpecFormatError("gauge spec must be an object", where)
    precision = int(d.get("precision_bits", DEFAULT_PRECISION_BITS))
    n_max = int(d.get("n_max", DEFAULT_N_MAX))
    if "symbolic" in d:
        sym = d["symbolic"]
        s = rational(_need(sym, "s", where), f"{where}.symbolic.s")
        t = int(str(sym.get("t", "0")).split("/")[0])
        if t == 0:
            return power_hfn(s, n_max, precision)
        return power_log_hfn(s, t, n_max, precision)
    if "table" in d:
        vals = [rational(v, f"{where}.table[{i}]") for i, v in enumerate(d["table"])]
        return table_hfn(vals, precision)
    raise SpecFormatError("gauge needs 'symbolic' or 'table'", where)


def hfn_to_dict(h: DyadicHFn) -> dict:
    if h.symbolic is not None:
        return {"symbolic": {"s": rational_str(h.symbolic.s), "t": str(h.symbolic.t)},
                "precision_bits": h.precision}
    if all(h.is_exact_at(n) for n in range(h.n_max + 1)):
        return {"table": [rational_str(v) for v in h.lo]}
    return {"table_lo": [rational_str(v) for v in h.lo],
            "table_hi": [rational_str(v) for v in h.hi]}


# ---------------------------------------------------------------------------
# Covers


def parse_cover(obj, where: str = "cover") -> Cover:
    if isinstance(obj, dict):
        items = _need(obj, "elements", where)
        eps = obj.get("eps")
    else:
        items, eps = obj, None
    if not isinstance(items, list):
        raise SpecFormatError("cover elements must form a list", where)
    words = []
    group_of = []
    for i, item in enumerate(items):
        words.append(_need(item, "cyl", f"{where}[{i}]"))
        group_of.append(item.get("group"))
    groups = None
    if any(g is not None for g in group_of):
        if any(g is None for g in group_of):
            raise SpecFormatError("either every element or none carries a group", where)
        groups = []
        pos = 0
        for j in sorted(set(group_of)):
            members = [i for i, g in enumerate(group_of) if g == j]
            if members != list(range(pos, pos + len(members))):
                raise SpecFormatError(f"group {j} is not a consecutive run", where)
            groups.append((pos, pos + len(members)))
            pos += len(members)
        groups = tuple(groups)
    eps_t = tuple(rational(x, f"{where}.eps") for x in eps) if eps else None
    return Cover(tuple(words), groups, eps_t)


def cover_to_obj(cover: Cover):
    items = []
    for i, w in enumerate(cover.elements):
        item = {"cyl": w}
        if cover.groups is not None:
            for j, (a, b) in enumerate(cover.groups):
                if a <= i < b:
                    item["group"] = j
                    break
        items.append(item)
    if cover.eps is None:
        return items
    return {"elements": items,
            "eps": [rational_str(x) for x in cover.eps[:len(cover.elements)]]}


# ---------------------------------------------------------------------------
# Witnesses


def parse_witness(d: dict, where: str = "witness"):
    if not isinstance(d, dict):
        raise SpecFormatError("witness must be an object", where)
    kind = d.get("kind")
    if kind is None:
        if "y" in d:
            kind = "shelahm"
        elif "I" in d and "H" in d:
            kind = "tprime"
        elif "H" in d:
            kind = "shelahn"
        elif "F" in d:
            kind = "block_family"
        else:
            raise SpecFormatError("cannot infer witness kind", where)
    f = BlockPartition(tuple(int(v) for v in _need(d, "f", where)))
    if kind == "block_family":
        from .ideals import BlockFamily
        return BlockFamily(f, tuple(tuple(fam) for fam in _need(d, "F", where)))
    if kind == "shelahm":
        g = BlockPartition(tuple(int(v) for v in _need(d, "g", where)))
        y = _need(d, "y", where)
        return ShelahMWitness(f, g, EventualPoint(y.get("preperiod", ""),
                                                  _need(y, "period", f"{where}.y")))
    if kind == "shelahn":
        fams = tuple(tuple(fam) for fam in _need(d, "H", where))
        return ShelahNWitness(f, fams)
    if kind == "tprime":
        idx = tuple(int(v) for v in _need(d, "I", where))
        raw = _need(d, "H", where)
        if isinstance(raw, dict):
            fams = {int(k): tuple(v) for k, v in raw.items()}
        else:
            fams = {n: tuple(fam) for n, fam in zip(idx, raw)}
        g = d.get("g")
        g_fn = (lambda n: n) if g is None else (tuple(int(v) for v in g))
        return TPrimeWitness(f, g_fn, idx, fams)
    raise SpecFormatError(f"unknown witness kind {kind!r}", where)


def witness_to_dict(w) -> dict:
    from .ideals import BlockFamily
    if isinstance(w, BlockFamily):
        return {"kind": "block_family", "f": list(w.partition.table),
                "F": [list(fam) for fam in w.families]}
    if isinstance(w, ShelahMWitness):
        return {"kind": "shelahm", "f": list(w.f.table), "g": list(w.g.table),
                "y": {"preperiod": w.y.preperiod, "period": w.y.period}}
    if isinstance(w, ShelahNWitness):
        return {"kind": "shelahn", "f": list(w.f.table),
                "H": [list(fam) for fam in w.families]}
    if isinstance(w, TPrimeWitness):
        return {"kind": "tprime", "f": list(w.f.table),
                "I": list(w.index_set),
                "H": {str(n): list(w.families[n]) for n in w.index_set}}
    raise SpecFormatError(f"unknown witness object {type(w).__name__}")


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"invalid JSON in {path}: {exc}",
                              f"{path}:{exc.lineno}:{exc.colno}") from None
