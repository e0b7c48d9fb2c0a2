"""Build the schema graph and find retrieval paths between entities.

Entities and defined types are nodes; attributes and inheritance are edges.
Path finding treats the graph as undirected but remembers each hop's
original direction so plans can turn hops back into attribute traversals.
"""

from pathlib import Path

from askbim import build_graph, connect_entities, export_xgml, parse_express, \
    shortest_path

DATA = Path(__file__).parent.parent / "src" / "askbim" / "data"

schema = parse_express((DATA / "ifc_subset.exp").read_text())
graph = build_graph(schema)
print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")

for src, dst in [("IfcBuildingStorey", "IfcBeam"),
                 ("IfcSpace", "IfcTask"),
                 ("IfcColumn", "IfcMaterial")]:
    path = shortest_path(graph, src, dst)
    print(f"\n{src} -> {dst}  (cost {path.cost:g})")
    for hop in path.hops:
        arrow = "->" if hop.direction == "fwd" else "<-"
        print(f"  {hop.source:<38} {arrow} {hop.label}")

tree = connect_entities(graph, ["IfcBuildingStorey", "IfcBeam",
                                "IfcElementQuantity"])
print("\nconnected storey/beam/quantity; relationship entities on the tree:")
for hop in tree.root.all_hops():
    for name in (hop.source, hop.target):
        if name.startswith("IfcRel"):
            print("  ", name)
            break

out = Path("/tmp/askbim_schema.xgml")
out.write_text(export_xgml(graph))
print(f"\nwrote {out} ({out.stat().st_size} bytes of xgml)")
