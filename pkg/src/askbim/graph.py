"""Schema graph: entities and defined types as nodes, attributes and
inheritance as edges, with path finding between mapped entities.

Path finding treats the graph as undirected but keeps the original
direction of every hop so plans can translate hops back into attribute
traversals. Within a run of consecutive inheritance hops the vertical
direction may not reverse: climbing to a supertype and immediately
descending into a sibling type would be a cast no instance satisfies.
"""

import itertools
import re
from dataclasses import dataclass, field
from heapq import heappop, heappush
from xml.sax.saxutils import escape

from .errors import GraphError, NoPathError, UnreachableAnchorError

SUPERTYPE = "SUPERTYPE"
SUBTYPE = "SUBTYPE"


@dataclass
class SchemaNode:
    name: str
    kind: str  # entity | defined_type | select_type
    scalar_attributes: list = field(default_factory=list)  # [(name, type)]


@dataclass(frozen=True)
class SchemaEdge:
    source: str
    target: str
    label: str
    kind: str  # attr | sel | inh
    weight: float = 1.0


@dataclass(frozen=True)
class Hop:
    """One traversal step; `direction` is 'fwd' when walking the edge as
    stored and 'rev' when walking it backwards."""

    source: str
    target: str
    label: str
    kind: str
    direction: str

    def vertical(self):
        if self.kind != "inh":
            return None
        return "up" if self.label == SUPERTYPE else "down"


@dataclass
class RetrievalPath:
    hops: list
    cost: float
    anchors: list

    def nodes(self):
        if not self.hops:
            return list(self.anchors[:1])
        return [self.hops[0].source] + [h.target for h in self.hops]

    def labels(self):
        return [h.label for h in self.hops]


@dataclass
class PathTreeNode:
    name: str
    hop: object = None  # Hop from parent, None at root
    children: list = field(default_factory=list)

    def count_nodes(self):
        return 1 + sum(c.count_nodes() for c in self.children)

    def count_edges(self):
        return len(self.children) + sum(c.count_edges() for c in self.children)

    def all_hops(self):
        out = []
        for child in self.children:
            out.append(child.hop)
            out.extend(child.all_hops())
        return out


@dataclass
class PathTree:
    root: PathTreeNode
    anchors: list
    paths: dict  # anchor name -> RetrievalPath


class SchemaGraph:
    def __init__(self):
        self.nodes = {}
        self.edges = []
        self._adjacency = None

    def add_node(self, name, kind="entity", scalar_attributes=()):
        if name in self.nodes:
            raise GraphError(f"duplicate node {name}")
        self.nodes[name] = SchemaNode(name, kind, list(scalar_attributes))

    def add_edge(self, source, target, label, kind="attr", weight=1.0):
        if source not in self.nodes or target not in self.nodes:
            raise GraphError(f"edge {source}->{target}: unknown endpoint")
        self.edges.append(SchemaEdge(source, target, label, kind, weight))
        self._adjacency = None

    def adjacency(self):
        """node -> [(Hop, weight)]; inheritance edges only walk forward
        because the mirrored pair covers the other direction."""
        if self._adjacency is None:
            adj = {name: [] for name in self.nodes}
            for e in self.edges:
                adj[e.source].append((Hop(e.source, e.target, e.label, e.kind, "fwd"),
                                      e.weight))
                if e.kind != "inh":
                    adj[e.target].append((Hop(e.target, e.source, e.label, e.kind, "rev"),
                                          e.weight))
            for hops in adj.values():
                hops.sort(key=lambda pair: (pair[0].label, pair[0].target,
                                            pair[0].direction))
            self._adjacency = adj
        return self._adjacency


def _mode_after(hop):
    vertical = hop.vertical()
    return vertical if vertical else "attr"


def _step_allowed(mode, hop):
    vertical = hop.vertical()
    if vertical is None:
        return True
    return mode == "attr" or mode == vertical


def _stored_edge(hop):
    """Identity of the underlying stored edge regardless of walk direction."""
    if hop.direction == "fwd":
        return (hop.source, hop.target, hop.label, hop.kind)
    return (hop.target, hop.source, hop.label, hop.kind)


def _single_source(graph, start):
    """Dijkstra over (node, mode, last edge) states, ties broken by the
    lexicographically smallest label sequence.

    A hop may not immediately re-walk the edge it arrived by: bouncing in
    and out of a node over one stored edge is never a usable retrieval
    step. Returns {state: (cost, labels, parent_state, hop)}.
    """
    adjacency = graph.adjacency()
    counter = itertools.count()
    start_state = (start, "attr", None)
    best = {}
    heap = [(0.0, (), next(counter), start_state, None, None)]
    while heap:
        cost, labels, _, state, parent, hop = heappop(heap)
        if state in best:
            continue
        best[state] = (cost, labels, parent, hop)
        node, mode, last_edge = state
        for nxt_hop, weight in adjacency[node]:
            if not _step_allowed(mode, nxt_hop):
                continue
            edge_key = _stored_edge(nxt_hop)
            if edge_key == last_edge:
                continue
            nxt_state = (nxt_hop.target, _mode_after(nxt_hop), edge_key)
            if nxt_state in best:
                continue
            heappush(heap, (cost + weight, labels + (nxt_hop.label,),
                            next(counter), nxt_state, state, nxt_hop))
    return best


def _best_state_for(best, node):
    candidates = [(cost, labels, state)
                  for state, (cost, labels, _, _) in best.items()
                  if state[0] == node]
    if not candidates:
        return None
    return min(candidates)[2]


def _extract(best, state):
    hops = []
    while True:
        _, _, parent, hop = best[state]
        if hop is None:
            break
        hops.append(hop)
        state = parent
    hops.reverse()
    return hops


def shortest_path(graph, source, target):
    """Minimal-weight valid path; ties broken by smallest label sequence."""
    for name in (source, target):
        if name not in graph.nodes:
            raise GraphError(f"unknown node {name!r}")
    if source == target:
        return RetrievalPath(hops=[], cost=0.0, anchors=[source])
    best = _single_source(graph, source)
    state = _best_state_for(best, target)
    if state is None:
        raise NoPathError(f"no path between {source} and {target}")
    cost = best[state][0]
    return RetrievalPath(hops=_extract(best, state), cost=cost,
                         anchors=[source, target])


def connect_entities(graph, anchors):
    """Tree of shortest paths from the first anchor to every other anchor.

    The first anchor is the primary keyword's entity. Paths sharing a hop
    prefix are merged; a schema node reached along two different prefixes
    appears once per occurrence, so the result is always a tree.
    """
    if len(anchors) < 2:
        raise GraphError("need at least two anchors")
    for name in anchors:
        if name not in graph.nodes:
            raise GraphError(f"unknown node {name!r}")
    root_name = anchors[0]
    unique = list(dict.fromkeys(anchors))
    best = _single_source(graph, root_name)
    root = PathTreeNode(root_name)
    paths = {root_name: RetrievalPath([], 0.0, [root_name])}
    for anchor in unique[1:]:
        state = _best_state_for(best, anchor)
        if state is None:
            raise UnreachableAnchorError(
                f"anchor {anchor} is unreachable from {root_name}")
        hops = _extract(best, state)
        paths[anchor] = RetrievalPath(hops, best[state][0], [root_name, anchor])
        node = root
        for hop in hops:
            for child in node.children:
                if child.hop == hop:
                    node = child
                    break
            else:
                child = PathTreeNode(hop.target, hop)
                node.children.append(child)
                node = child
    return PathTree(root=root, anchors=unique, paths=paths)


# --- building from a parsed schema ---------------------------------------

def build_graph(schema):
    """Entities, defined types and selects become nodes; attributes whose
    target is not scalar-valued become labeled edges; SUBTYPE OF yields a
    mirrored SUPERTYPE/SUBTYPE pair; selects fan out one edge per member."""
    graph = SchemaGraph()
    for name, entity in schema.entities.items():
        scalars = [(a.name, a.target) for a in entity.attributes
                   if schema.is_scalar_target(a.target)]
        graph.add_node(name, "entity", scalars)
    for name in schema.defined_types:
        graph.add_node(name, "defined_type")
    for name in schema.select_types:
        graph.add_node(name, "select_type")
    for name, entity in schema.entities.items():
        if entity.supertype:
            graph.add_edge(name, entity.supertype, SUPERTYPE, "inh")
            graph.add_edge(entity.supertype, name, SUBTYPE, "inh")
        for attr in entity.attributes:
            if schema.is_scalar_target(attr.target):
                continue
            if not schema.has(attr.target):
                raise GraphError(f"{name}.{attr.name}: undeclared type {attr.target}")
            graph.add_edge(name, attr.target, attr.name, "attr")
    for name, select in schema.select_types.items():
        for member in select.members:
            if schema.has(member):
                graph.add_edge(name, member, member, "sel")
    return graph


# --- xgml ----------------------------------------------------------------

def export_xgml(graph):
    """Deterministic xgml text; export -> import -> export is a fixpoint."""
    names = sorted(graph.nodes)
    ids = {name: i for i, name in enumerate(names)}
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<section name="xgml">',
             '  <attribute key="Creator" type="String">askbim</attribute>',
             '  <section name="graph">',
             '    <attribute key="directed" type="int">1</attribute>']
    for name in names:
        node = graph.nodes[name]
        scalars = ",".join(f"{n}:{t}" for n, t in node.scalar_attributes)
        lines.append('    <section name="node">')
        lines.append(f'      <attribute key="id" type="int">{ids[name]}</attribute>')
        lines.append(f'      <attribute key="label" type="String">{escape(name)}</attribute>')
        lines.append(f'      <attribute key="kind" type="String">{escape(node.kind)}</attribute>')
        if scalars:
            lines.append(
                f'      <attribute key="scalars" type="String">{escape(scalars)}</attribute>')
        lines.append('    </section>')
    for edge in sorted(graph.edges,
                       key=lambda e: (ids[e.source], ids[e.target], e.label, e.kind)):
        lines.append('    <section name="edge">')
        lines.append(
            f'      <attribute key="source" type="int">{ids[edge.source]}</attribute>')
        lines.append(
            f'      <attribute key="target" type="int">{ids[edge.target]}</attribute>')
        lines.append(
            f'      <attribute key="label" type="String">{escape(edge.label)}</attribute>')
        lines.append(f'      <attribute key="kind" type="String">{escape(edge.kind)}</attribute>')
        if edge.weight != 1.0:
            lines.append(
                f'      <attribute key="weight" type="double">{edge.weight!r}</attribute>')
        lines.append('    </section>')
    lines.append('  </section>')
    lines.append('</section>')
    return "\n".join(lines) + "\n"


def import_xgml(text):
    """Rebuild a SchemaGraph from exported xgml."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(text)
    if root.tag != "section" or root.get("name") != "xgml":
        raise GraphError("not an xgml document")
    graph_sec = None
    for sec in root.findall("section"):
        if sec.get("name") == "graph":
            graph_sec = sec
    if graph_sec is None:
        raise GraphError("xgml document has no graph section")
    graph = SchemaGraph()
    by_id = {}
    for sec in graph_sec.findall("section"):
        attrs = {a.get("key"): (a.text or "") for a in sec.findall("attribute")}
        if sec.get("name") == "node":
            scalars = []
            if attrs.get("scalars"):
                scalars = [tuple(pair.split(":", 1))
                           for pair in attrs["scalars"].split(",")]
            graph.add_node(attrs["label"], attrs.get("kind", "entity"), scalars)
            by_id[int(attrs["id"])] = attrs["label"]
        elif sec.get("name") == "edge":
            graph.add_edge(by_id[int(attrs["source"])], by_id[int(attrs["target"])],
                           attrs["label"], attrs.get("kind", "attr"),
                           float(attrs.get("weight", 1.0)))
    return graph


def validate_xgml(text):
    """Cheap grammar check: well-formed XML of section/attribute elements."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(text)
    for element in root.iter():
        if element.tag not in ("section", "attribute"):
            raise GraphError(f"unexpected element {element.tag!r} in xgml")
        if element.tag == "section" and not element.get("name"):
            raise GraphError("section without name")
        if element.tag == "attribute" and not element.get("key"):
            raise GraphError("attribute without key")
    return True
