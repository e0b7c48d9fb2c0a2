"""One representation plan per data format, rendered as text."""

from askbim.planner import ResultRow, ResultSet
from askbim.representation import classify_shape, plan_for, render_text


def show(title, result):
    fmt = classify_shape(result)
    plan = plan_for(result, title=title)
    print("=" * 64)
    print(f"data format {fmt!r} -> plan kind {plan.kind!r}")
    print(render_text(plan))


show("height of beam B-201",
     ResultSet(rows=[ResultRow(group=(), value=0.45, keys=["#9"], unit="m")],
               shape="single_value", group_fields=[]))

show("volume per storey",
     ResultSet(rows=[ResultRow(group=("second",), value=4.0, keys=[], unit="m3"),
                     ResultRow(group=("third",), value=1.8, keys=[], unit="m3")],
               shape="array", group_fields=["storey"]))

show("quantities by kind and storey",
     ResultSet(rows=[ResultRow(group=("volume", "second"), value=4.0, keys=[], unit="m3"),
                     ResultRow(group=("weight", "second"), value=350.0, keys=[], unit="kg"),
                     ResultRow(group=("weight", "third"), value=800.0, keys=[], unit="kg")],
               shape="tree", group_fields=["kind", "storey"]))

show("construction of the west wing",
     ResultSet(rows=[
         ResultRow(group=(), value="groundworks", keys=["#1"],
                   extra={"start": "2024-03-04", "finish": "2024-04-12",
                          "status": "finished", "successors": ["#2"],
                          "milestone": False}),
         ResultRow(group=(), value="handover", keys=["#2"],
                   extra={"start": "2024-08-05", "finish": "2024-08-05",
                          "status": "planned", "successors": [],
                          "milestone": True})],
         shape="net", group_fields=[]))

show("beam shapes by material",
     ResultSet(rows=[ResultRow(group=("steel",), value="B-203", keys=["#11"],
                               extra={"blobs": {"EncodedData": "blob-a"}}),
                     ResultRow(group=("concrete",), value="B-201", keys=["#9"],
                               extra={"blobs": {"EncodedData": "blob-b"}})],
               shape="geometric", group_fields=["material"]))
