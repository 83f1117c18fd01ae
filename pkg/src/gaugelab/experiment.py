"""Line-oriented experiment files: a structure group, a base graph with
named vertices and edges, inertias, a refinement program, and numeric
options.  The grammar is deliberately small and every unknown key is a
parse error.

Example::

    [group]
    kind = cyclic
    n = 2

    [graph]
    vertex a
    vertex b
    vertex c
    edge e1 a b
    edge e2 b c
    edge e3 c a

    [inertia]
    e1 = 1.0
    e2 = 1.0
    e3 = 1.0

    [refine]
    subdivide e1
    subdivide e2 0.25 0.75
    add_edge e4 a c inertia=0.5
    add_vertex_edge d e5 b out inertia=2.0

    [options]
    seed = 0
    tol = 1e-10

Each line under ``[refine]`` is one elementary step and one tower level.
``subdivide E`` names the new vertex ``E.v`` and the pieces ``E.1``/``E.2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import ParseError
from .graph import AddEdge, AddVertexEdge, OrientedGraph, SubdivideEdge, make_graph
from .group import (
    FiniteGroup,
    LaplacianSpec,
    StructureGroup,
    U1Truncated,
    make_cyclic,
    make_dihedral,
    make_quaternion,
)
from .hamiltonian import InertiaAssignment
from .tower import RefinementStep, TowerOptions

_SECTIONS = ("group", "graph", "inertia", "refine", "options")
_GROUP_KINDS = ("cyclic", "dihedral", "quaternion", "u1")
_OPTION_KEYS = ("seed", "tol", "dense_budget", "max_dim", "operator_budget",
                "kernel_samples", "degeneracy_tol")


@dataclass
class Experiment:
    """A parsed experiment, with name tables for every vertex and edge that
    exists at any level (refinement steps mint new names)."""

    group: StructureGroup
    graph: OrientedGraph
    inertias: InertiaAssignment
    program: List[RefinementStep]
    options: TowerOptions
    laplacian_spec: Optional[LaplacianSpec] = None
    vertex_names: Dict[str, int] = field(default_factory=dict)
    edge_names: Dict[str, int] = field(default_factory=dict)

    def vertex_label(self, vid: int) -> str:
        for name, v in self.vertex_names.items():
            if v == vid:
                return name
        return str(vid)

    def edge_label(self, eid: int) -> str:
        for name, e in self.edge_names.items():
            if e == eid:
                return name
        return str(eid)


def _fail(line_no: int, message: str) -> ParseError:
    return ParseError(message, line=line_no)


def parse_experiment(text: str) -> Experiment:
    sections: Dict[str, List[Tuple[int, str]]] = {}
    current: Optional[str] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise _fail(line_no, "unknown section [%s]" % name)
            if name in sections:
                raise _fail(line_no, "duplicate section [%s]" % name)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise _fail(line_no, "content before any section header")
        sections[current].append((line_no, line))

    for required in ("group", "graph"):
        if required not in sections:
            raise ParseError("missing required section [%s]" % required)

    group, spec = _parse_group(sections["group"])
    graph, vertex_names, edge_names = _parse_graph(sections["graph"])
    inertias = _parse_inertias(sections.get("inertia", []), graph, edge_names)
    program = _parse_refine(sections.get("refine", []), graph,
                            vertex_names, edge_names)
    options = _parse_options(sections.get("options", []))
    return Experiment(group, graph, inertias, program, options, spec,
                      vertex_names, edge_names)


def _parse_kv(lines: List[Tuple[int, str]]) -> Dict[str, Tuple[int, str]]:
    out: Dict[str, Tuple[int, str]] = {}
    for line_no, line in lines:
        if "=" not in line:
            raise _fail(line_no, "expected 'key = value', got %r" % line)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise _fail(line_no, "duplicate key %r" % key)
        out[key.lower()] = (line_no, value)
    return out


def _parse_group(lines: List[Tuple[int, str]]):
    kv = _parse_kv(lines)
    if "kind" not in kv:
        raise ParseError("[group] needs a 'kind' entry")
    line_no, kind = kv.pop("kind")
    kind = kind.lower()
    if kind not in _GROUP_KINDS:
        raise _fail(line_no, "unknown group kind %r (expected one of %s)"
                    % (kind, ", ".join(_GROUP_KINDS)))
    spec = None
    if kind == "u1":
        if "cutoff" not in kv:
            raise ParseError("u1 groups need a 'cutoff' entry")
        line_no, raw = kv.pop("cutoff")
        group: StructureGroup = U1Truncated(_parse_int(line_no, raw, minimum=0))
    elif kind == "quaternion":
        group = make_quaternion()
    else:
        if "n" not in kv:
            raise ParseError("%s groups need an 'n' entry" % kind)
        line_no, raw = kv.pop("n")
        n = _parse_int(line_no, raw, minimum=1)
        group = make_cyclic(n) if kind == "cyclic" else make_dihedral(n)
    if "generators" in kv:
        line_no, raw = kv.pop("generators")
        if kind == "u1":
            raise _fail(line_no, "u1 groups take no generating set")
        try:
            gens = tuple(int(tok) for tok in raw.split())
        except ValueError:
            raise _fail(line_no, "generators must be integer element indices")
        spec = LaplacianSpec(gens)
    for key, (line_no, _) in kv.items():
        raise _fail(line_no, "unknown [group] key %r" % key)
    return group, spec


def _parse_int(line_no: int, raw: str, minimum: Optional[int] = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise _fail(line_no, "expected an integer, got %r" % raw)
    if minimum is not None and value < minimum:
        raise _fail(line_no, "expected an integer >= %d, got %d" % (minimum, value))
    return value


def _parse_float(line_no: int, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise _fail(line_no, "expected a number, got %r" % raw)


def _parse_graph(lines: List[Tuple[int, str]]):
    vertex_names: Dict[str, int] = {}
    edge_specs: List[Tuple[int, str, str, str]] = []
    for line_no, line in lines:
        tokens = line.split()
        if tokens[0] == "vertex":
            if len(tokens) != 2:
                raise _fail(line_no, "usage: vertex NAME")
            name = tokens[1]
            if name in vertex_names:
                raise _fail(line_no, "duplicate vertex %r" % name)
            vertex_names[name] = len(vertex_names)
        elif tokens[0] == "edge":
            if len(tokens) != 4:
                raise _fail(line_no, "usage: edge NAME SOURCE TARGET")
            edge_specs.append((line_no, tokens[1], tokens[2], tokens[3]))
        else:
            raise _fail(line_no, "unknown [graph] directive %r" % tokens[0])

    edge_names: Dict[str, int] = {}
    triples = []
    for line_no, name, src, dst in edge_specs:
        if name in edge_names:
            raise _fail(line_no, "duplicate edge %r" % name)
        for endpoint in (src, dst):
            if endpoint not in vertex_names:
                raise _fail(line_no, "unknown vertex %r" % endpoint)
        edge_names[name] = len(edge_names)
        triples.append((edge_names[name], vertex_names[src], vertex_names[dst]))
    try:
        graph = make_graph(sorted(vertex_names.values()), triples)
    except Exception as exc:
        raise ParseError("invalid base graph: %s" % exc)
    return graph, vertex_names, edge_names


def _parse_inertias(lines: List[Tuple[int, str]], graph: OrientedGraph,
                    edge_names: Dict[str, int]) -> InertiaAssignment:
    values = {eid: 1.0 for eid in graph.edge_ids}
    kv = _parse_kv(lines)
    for key, (line_no, raw) in kv.items():
        if key not in edge_names:
            raise _fail(line_no, "unknown edge %r in [inertia]" % key)
        inertia = _parse_float(line_no, raw)
        if not inertia > 0:
            raise _fail(line_no, "inertia for %r must be positive" % key)
        values[edge_names[key]] = inertia
    return InertiaAssignment(values)


def _parse_refine(lines: List[Tuple[int, str]], graph: OrientedGraph,
                  vertex_names: Dict[str, int],
                  edge_names: Dict[str, int]) -> List[RefinementStep]:
    """Each line becomes one elementary step; names for minted vertices and
    edges are registered so later lines can reference them."""
    program: List[RefinementStep] = []
    next_vertex = max(vertex_names.values(), default=-1) + 1
    next_edge = max(edge_names.values(), default=-1) + 1
    live_edges = dict(edge_names)

    def mint_vertex(line_no: int, name: str) -> int:
        nonlocal next_vertex
        if name in vertex_names:
            raise _fail(line_no, "vertex %r already exists" % name)
        vertex_names[name] = next_vertex
        next_vertex += 1
        return vertex_names[name]

    def mint_edge(line_no: int, name: str) -> int:
        nonlocal next_edge
        if name in edge_names:
            raise _fail(line_no, "edge %r already exists" % name)
        edge_names[name] = next_edge
        live_edges[name] = next_edge
        next_edge += 1
        return edge_names[name]

    def parse_inertia_token(line_no: int, token: str) -> float:
        if not token.startswith("inertia="):
            raise _fail(line_no, "expected inertia=VALUE, got %r" % token)
        value = _parse_float(line_no, token[len("inertia="):])
        if not value > 0:
            raise _fail(line_no, "inertia must be positive")
        return value

    for line_no, line in lines:
        tokens = line.split()
        op = tokens[0]
        if op == "subdivide":
            if len(tokens) not in (2, 4):
                raise _fail(line_no, "usage: subdivide EDGE [FRAC1 FRAC2]")
            name = tokens[1]
            if name not in live_edges:
                raise _fail(line_no, "unknown or already subdivided edge %r" % name)
            eid = live_edges.pop(name)
            fractions = None
            if len(tokens) == 4:
                fractions = (_parse_float(line_no, tokens[2]),
                             _parse_float(line_no, tokens[3]))
            vid = mint_vertex(line_no, name + ".v")
            first = mint_edge(line_no, name + ".1")
            second = mint_edge(line_no, name + ".2")
            program.append(RefinementStep(
                SubdivideEdge(edge=eid, vertex=vid, first=first, second=second),
                fractions=fractions))
        elif op == "add_edge":
            if len(tokens) != 5:
                raise _fail(line_no, "usage: add_edge NAME SOURCE TARGET inertia=VALUE")
            _, name, src, dst, itok = tokens
            for endpoint in (src, dst):
                if endpoint not in vertex_names:
                    raise _fail(line_no, "unknown vertex %r" % endpoint)
            inertia = parse_inertia_token(line_no, itok)
            eid = mint_edge(line_no, name)
            program.append(RefinementStep(
                AddEdge(edge=eid, source=vertex_names[src], target=vertex_names[dst]),
                new_inertia=inertia))
        elif op == "add_vertex_edge":
            if len(tokens) != 6:
                raise _fail(line_no,
                            "usage: add_vertex_edge VNAME ENAME ANCHOR in|out inertia=VALUE")
            _, vname, ename, anchor, direction, itok = tokens
            if anchor not in vertex_names:
                raise _fail(line_no, "unknown vertex %r" % anchor)
            if direction not in ("in", "out"):
                raise _fail(line_no, "direction must be 'in' or 'out'")
            inertia = parse_inertia_token(line_no, itok)
            anchor_id = vertex_names[anchor]
            vid = mint_vertex(line_no, vname)
            eid = mint_edge(line_no, ename)
            src, dst = (anchor_id, vid) if direction == "out" else (vid, anchor_id)
            program.append(RefinementStep(
                AddVertexEdge(vertex=vid, edge=eid, source=src, target=dst),
                new_inertia=inertia))
        else:
            raise _fail(line_no, "unknown [refine] directive %r" % op)
    return program


def _parse_options(lines: List[Tuple[int, str]]) -> TowerOptions:
    kv = _parse_kv(lines)
    kwargs = {}
    for key, (line_no, raw) in kv.items():
        if key not in _OPTION_KEYS:
            raise _fail(line_no, "unknown [options] key %r" % key)
        if key in ("tol", "degeneracy_tol"):
            kwargs[key] = _parse_float(line_no, raw)
        else:
            kwargs[key] = _parse_int(line_no, raw, minimum=0)
    opts = TowerOptions()
    tol = kwargs.pop("tol", None)
    if tol is not None:
        opts = TowerOptions(tol_isometry=min(tol, opts.tol_isometry),
                            tol_diagram=tol, tol_algebra=min(tol, opts.tol_algebra))
    for key, value in kwargs.items():
        opts = _replace_option(opts, key, value)
    return opts


def _replace_option(opts: TowerOptions, key: str, value) -> TowerOptions:
    from dataclasses import replace
    return replace(opts, **{key: value})


# ---------------------------------------------------------------------------
# Deterministic output helpers


def format_float(x: float) -> str:
    """Shortest round-trip decimal form, stable across runs."""
    return format(float(x), ".17g") if x != int(x) else "%d.0" % int(x)


def dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2,
                      separators=(",", ": ")) + "\n"


def rows_to_csv(header: List[str], rows: List[List[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"
