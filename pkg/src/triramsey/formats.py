"""Plain-text and JSON interchange formats.

Graph files:          header "graph <n> <m>", then m lines "e <u> <v>".
Triple-system files:  header "tsys <n> <t>", then t lines "t <a> <b> <c>".
Coloring files:       one line per triple "c <a> <b> <c> <R|B>", sorted.
Partite families and system instances travel as JSON documents that embed
the text formats.  All parsers reject duplicates and out-of-range ids.
"""

from __future__ import annotations

import json

from .core import (
    BLUE,
    RED,
    Graph,
    PartiteFamily,
    TriangleColoring,
    TripleSystem,
)

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed input file."""


def _tokens(text: str) -> list[list[str]]:
    return [line.split() for line in text.splitlines() if line.strip()]


# ---------------------------------------------------------------------------
# graphs


def dump_graph(g: Graph) -> str:
    lines = [f"graph {g.n} {g.edge_count}"]
    lines += [f"e {u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    rows = _tokens(text)
    if not rows or rows[0][:1] != ["graph"] or len(rows[0]) != 3:
        raise FormatError("expected header 'graph <n> <m>'")
    try:
        n, m = int(rows[0][1]), int(rows[0][2])
    except ValueError as exc:
        raise FormatError("non-integer header fields") from exc
    if n < 0 or m < 0:
        raise FormatError("negative counts in header")
    if len(rows) - 1 != m:
        raise FormatError(f"header promises {m} edges, file has {len(rows) - 1}")
    seen = set()
    edges = []
    for row in rows[1:]:
        if len(row) != 3 or row[0] != "e":
            raise FormatError(f"bad edge line: {' '.join(row)}")
        u, v = int(row[1]), int(row[2])
        if u == v:
            raise FormatError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) out of range")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# triple systems


def dump_triples(ts: TripleSystem) -> str:
    lines = [f"tsys {ts.n} {len(ts.triples)}"]
    lines += [f"t {a} {b} {c}" for a, b, c in ts.sorted_triples()]
    return "\n".join(lines) + "\n"


def parse_triples(text: str) -> TripleSystem:
    rows = _tokens(text)
    if not rows or rows[0][:1] != ["tsys"] or len(rows[0]) != 3:
        raise FormatError("expected header 'tsys <n> <t>'")
    try:
        n, t = int(rows[0][1]), int(rows[0][2])
    except ValueError as exc:
        raise FormatError("non-integer header fields") from exc
    if len(rows) - 1 != t:
        raise FormatError(f"header promises {t} triples, file has {len(rows) - 1}")
    seen = set()
    triples = []
    for row in rows[1:]:
        if len(row) != 4 or row[0] != "t":
            raise FormatError(f"bad triple line: {' '.join(row)}")
        trip = tuple(sorted(int(x) for x in row[1:]))
        if len(set(trip)) != 3:
            raise FormatError(f"triple {trip} has repeated vertices")
        if trip[0] < 0 or trip[2] >= n:
            raise FormatError(f"triple {trip} out of range")
        if trip in seen:
            raise FormatError(f"duplicate triple {trip}")
        seen.add(trip)
        triples.append(trip)
    return TripleSystem(n, triples)


# ---------------------------------------------------------------------------
# colorings

_COLOR_CODE = {RED: "R", BLUE: "B"}
_CODE_COLOR = {"R": RED, "B": BLUE}


def dump_coloring(coloring: TriangleColoring) -> str:
    lines = [
        f"c {a} {b} {c} {_COLOR_CODE[col]}" for (a, b, c), col in coloring.items()
    ]
    return "\n".join(lines) + "\n"


def parse_coloring(text: str, domain: TripleSystem) -> TriangleColoring:
    rows = _tokens(text)
    mapping = {}
    for row in rows:
        if len(row) != 5 or row[0] != "c":
            raise FormatError(f"bad coloring line: {' '.join(row)}")
        trip = tuple(sorted(int(x) for x in row[1:4]))
        if len(set(trip)) != 3:
            raise FormatError(f"triple {trip} has repeated vertices")
        if trip[0] < 0 or trip[2] >= domain.n:
            raise FormatError(f"triple {trip} out of range")
        if row[4] not in _CODE_COLOR:
            raise FormatError(f"unknown color code {row[4]!r}")
        if trip in mapping:
            raise FormatError(f"duplicate coloring line for {trip}")
        mapping[trip] = _CODE_COLOR[row[4]]
    try:
        return TriangleColoring(domain, mapping)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# partite families and system instances (JSON)


def family_to_json(fam: PartiteFamily) -> dict:
    return {
        "format": "partite-family",
        "format_version": FORMAT_VERSION,
        "blocks": [list(b) for b in fam.blocks],
        "r": fam.r,
        "edges": [list(e) for e in fam.sorted_edges()],
    }


def family_from_json(doc: dict) -> PartiteFamily:
    if doc.get("format") != "partite-family":
        raise FormatError("not a partite-family document")
    try:
        return PartiteFamily(doc["blocks"], doc["r"], doc["edges"])
    except (KeyError, ValueError) as exc:
        raise FormatError(str(exc)) from exc


def instance_to_json(inst) -> dict:
    """Serialize an embed.SystemInstance; imported lazily to avoid a cycle."""
    return {
        "format": "system-instance",
        "format_version": FORMAT_VERSION,
        "pattern": dump_graph(inst.pattern),
        "pattern_triples": dump_triples(inst.pattern_triples),
        "host": family_to_json(inst.host),
        "host_triples": [list(t) for t in inst.host_triples.sorted_triples()],
    }


def instance_from_json(doc: dict):
    from .embed import SystemInstance

    if doc.get("format") != "system-instance":
        raise FormatError("not a system-instance document")
    host = family_from_json(doc["host"])
    pattern = parse_graph(doc["pattern"])
    pattern_triples = parse_triples(doc["pattern_triples"])
    host_triples = TripleSystem(host.universe, doc["host_triples"])
    return SystemInstance(pattern, pattern_triples, host, host_triples)


def dumps(doc: dict) -> str:
    """Canonical JSON rendering used for all artifacts (stable key order)."""
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
