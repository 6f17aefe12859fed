"""Serialization of analysis results as JSON documents and as text.

The text form is produced from the JSON document, never from the analysis
objects directly, and :func:`parse_text` reads it back, so both formats
carry the same information.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from typing import Any, Dict, List, Optional

from .graphs import term_atoms
from .inference import ClassTable, SummaryTable, stats_of
from .transform import sorted_constraints

Doc = Dict[str, Any]


def _names(rs) -> List[str]:
    return sorted(str(r) for r in rs)


def build_document(T: SummaryTable, ct: ClassTable, emit: str = "types",
                   include_stats: bool = False) -> Doc:
    """The JSON-ready result document; every array is sorted."""
    doc: Doc = {"regions": _names(ct.universe.regions)}
    if emit in ("types", "all"):
        doc["fieldTable"] = sorted(
            ({"class": c, "region": str(r), "field": f, "regions": _names(v)}
             for (c, r, f), v in ct.F.items() if v),
            key=lambda d: (d["class"], d["region"], d["field"]))
        doc["methodTable"] = sorted(
            ({"class": c, "region": str(r), "method": m, "argRegions": [str(s) for s in args],
              "regions": _names(v)}
             for (c, r, m, args), v in ct.M.items()),
            key=lambda d: (d["class"], d["method"], d["region"], d["argRegions"]))
    if emit in ("summaries", "all"):
        rows = []
        for (c, m), (sigma, u) in T.entries.items():
            rows.append({
                "class": c,
                "method": m,
                "params": list(T.params[(c, m)]),
                "assignments": [{"var": x, "term": term_atoms(sigma.assigns[x])}
                                for x in sorted(sigma.assigns)],
                "constraints": [{"key": str(k), "term": term_atoms(v)}
                                for k, v in sorted_constraints(sigma)],
                "returnTerm": term_atoms(u),
            })
        doc["summaries"] = sorted(rows, key=lambda d: (d["class"], d["method"]))
    if include_stats:
        doc["stats"] = stats_of(T, ct)
    return doc


def dump_json(doc: Doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("regionfj").joinpath("schema.json").read_text("utf-8"))


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------

_BOLD, _RESET = "\x1b[1m", "\x1b[0m"

STAT_KEYS = ("methodTableRounds", "methodTableBound", "classTableRounds", "classTableBound",
             "contexts")
METHOD_STAT_KEYS = ("bodyVisits", "productiveIterations", "contexts", "callSites")


def _set(xs: List[str]) -> str:
    return "{" + ", ".join(xs) + "}"


def _term(xs: List[str]) -> str:
    return " ∨ ".join(xs) if xs else "⊥"


def render_text(doc: Doc, color: bool = False) -> str:
    head = (lambda s: f"{_BOLD}{s}{_RESET}") if color else (lambda s: s)
    out = [f"{head('regions')}: {', '.join(doc['regions'])}"]
    if "fieldTable" in doc:
        out.append(head("field table") + ":")
        for e in doc["fieldTable"]:
            out.append(f"  F({e['class']}, {e['region']}, {e['field']}) = {_set(e['regions'])}")
        out.append(head("method table") + ":")
        for e in doc["methodTable"]:
            args = ", ".join(e["argRegions"])
            out.append(f"  M({e['class']}, {e['region']}, {e['method']}, ({args})) = "
                       f"{_set(e['regions'])}")
    if "summaries" in doc:
        out.append(head("summaries") + ":")
        for s in doc["summaries"]:
            out.append(f"  {s['class']}.{s['method']}({', '.join(s['params'])})")
            for a in s["assignments"]:
                out.append(f"    {a['var']} :↦ {_term(a['term'])}")
            for k in s["constraints"]:
                out.append(f"    {k['key']} :≥ {_term(k['term'])}")
            out.append(f"    returns {_term(s['returnTerm'])}")
    if "stats" in doc:
        st = doc["stats"]
        out.append(head("stats") + ":")
        for k in STAT_KEYS:
            out.append(f"  {k}: {st[k]}")
        for m in st["methods"]:
            fields = " ".join(f"{k}={m[k]}" for k in METHOD_STAT_KEYS)
            out.append(f"  method {m['class']}.{m['method']}: {fields}")
    return "\n".join(out) + "\n"


_ANSI = re.compile(r"\x1b\[[0-9;]*m")
_F = re.compile(r"  F\((\w+), ([^,]+), (\w+)\) = \{(.*)\}$")
_M = re.compile(r"  M\((\w+), ([^,]+), (\w+), \((.*)\)\) = \{(.*)\}$")
_S = re.compile(r"  (\w+)\.(\w+)\((.*)\)$")


def _split(s: str, sep: str = ", ") -> List[str]:
    return s.split(sep) if s else []


def _atoms(s: str) -> List[str]:
    return [] if s == "⊥" else s.split(" ∨ ")


def parse_text(text: str) -> Doc:
    """Read :func:`render_text` output back into a document."""
    lines = _ANSI.sub("", text).splitlines()
    doc: Doc = {"regions": _split(lines[0].partition(": ")[2])}
    section: Optional[str] = None
    for line in lines[1:]:
        if not line.startswith(" "):
            section = line.rstrip(":")
            key = {"field table": "fieldTable", "method table": "methodTable",
                   "summaries": "summaries", "stats": "stats"}[section]
            doc[key] = {"methods": []} if key == "stats" else []
            continue
        if section == "field table":
            c, r, f, rs = _F.match(line).groups()
            doc["fieldTable"].append({"class": c, "region": r, "field": f, "regions": _split(rs)})
        elif section == "method table":
            c, r, m, args, rs = _M.match(line).groups()
            doc["methodTable"].append({"class": c, "region": r, "method": m,
                                       "argRegions": _split(args), "regions": _split(rs)})
        elif section == "summaries":
            if not line.startswith("    "):
                c, m, ps = _S.match(line).groups()
                doc["summaries"].append({"class": c, "method": m, "params": _split(ps),
                                         "assignments": [], "constraints": [], "returnTerm": []})
                continue
            cur = doc["summaries"][-1]
            body = line.strip()
            if body.startswith("returns "):
                cur["returnTerm"] = _atoms(body[len("returns "):])
            elif " :↦ " in body:
                x, _, t = body.partition(" :↦ ")
                cur["assignments"].append({"var": x, "term": _atoms(t)})
            else:
                k, _, t = body.partition(" :≥ ")
                cur["constraints"].append({"key": k, "term": _atoms(t)})
        elif section == "stats":
            body = line.strip()
            if body.startswith("method "):
                name, _, rest = body[len("method "):].partition(": ")
                c, m = name.split(".")
                entry: Dict[str, Any] = {"class": c, "method": m}
                for kv in rest.split():
                    k, v = kv.split("=")
                    entry[k] = int(v)
                doc["stats"]["methods"].append(entry)
            else:
                k, v = body.split(": ")
                doc["stats"][k] = int(v)
    return doc
