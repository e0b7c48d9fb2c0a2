import itertools

import pytest

from askbim import representation as rep
from askbim.planner import ResultRow, ResultSet


def rs(rows, shape, fields, units=None):
    return ResultSet(rows=rows, shape=shape, group_fields=fields,
                     units=units or {})


def single_value(value=0.4, unit="m"):
    return rs([ResultRow(group=(), value=value, keys=["#12"], unit=unit)],
              "single_value", [])


def flat_array():
    return rs([ResultRow(group=("second",), value=4.0, keys=["#9"], unit="m3"),
               ResultRow(group=("third",), value=1.8, keys=["#14"], unit="m3")],
              "array", ["storey"], {"volume": "m3"})


def tree_result():
    rows = [ResultRow(group=("volume", "second"), value=4.0, keys=["#9"], unit="m3"),
            ResultRow(group=("volume", "third"), value=1.8, keys=["#14"], unit="m3"),
            ResultRow(group=("weight", "second"), value=350.0, keys=["#11"], unit="kg"),
            ResultRow(group=("weight", "third"), value=800.0, keys=["#12"], unit="kg")]
    return rs(rows, "tree", ["kind", "storey"], {"volume": "m3", "weight": "kg"})


def spatial_tree():
    rows = [ResultRow(group=("site", "building", s), value=v, keys=[k])
            for s, v, k in [("second", 5, "#4"), ("third", 5, "#5")]]
    return rs(rows, "tree", ["site", "building", "storey"])


def schedule_net():
    rows = [
        ResultRow(group=("check-in",), value="groundworks", keys=["#57"],
                  extra={"start": "2024-03-04", "finish": "2024-04-12",
                         "status": "finished", "successors": ["#58"],
                         "milestone": False}),
        ResultRow(group=("check-in",), value="erection", keys=["#58"],
                  extra={"start": "2024-04-15", "finish": "2024-06-07",
                         "status": "working", "successors": [],
                         "milestone": False}),
        ResultRow(group=("check-in",), value="handover", keys=["#60"],
                  extra={"start": "2024-08-05", "finish": "2024-08-05",
                         "status": "planned", "successors": [],
                         "milestone": True}),
    ]
    return rs(rows, "net", ["zone"])


def plain_net():
    rows = [ResultRow(group=(), value="a", keys=["#1"],
                      extra={"successors": ["#2"]}),
            ResultRow(group=(), value="b", keys=["#2"],
                      extra={"successors": []})]
    return rs(rows, "net", [])


def geometric_result():
    rows = [ResultRow(group=("steel",), value="B-201", keys=["#9"],
                      extra={"blobs": {"EncodedData": "blob-60-EncodedData"}}),
            ResultRow(group=("concrete",), value="B-202", keys=["#10"],
                      extra={"blobs": {"EncodedData": "blob-61-EncodedData"}})]
    return rs(rows, "geometric", ["material"])


def time_series(n_series=1):
    rows = []
    for i, day in enumerate(["2024-03-01", "2024-04-01", "2024-05-01"]):
        rows.append(ResultRow(group=(("a",) if n_series > 1 else ()) + (day,),
                              value=10.0 * (i + 1), keys=[f"#{i}"]))
    if n_series > 1:
        for i, day in enumerate(["2024-03-01", "2024-04-01"]):
            rows.append(ResultRow(group=("b", day), value=9000.0 * (i + 1),
                                  keys=[f"#b{i}"]))
        return rs(rows, "tree", ["kind", "date"])
    return rs(rows, "array", ["date"])


# --- classify_shape -------------------------------------------------------------

def test_classify_shape_examples():
    assert rep.classify_shape(single_value()) == "single_value"
    assert rep.classify_shape(flat_array()) == "array"
    assert rep.classify_shape(spatial_tree()) == "tree"
    assert rep.classify_shape(schedule_net()) == "net"
    assert rep.classify_shape(geometric_result()) == "geometric"


def test_classify_shape_total_over_combinations():
    for result in [single_value(), flat_array(), tree_result(), spatial_tree(),
                   schedule_net(), plain_net(), geometric_result(),
                   time_series(), rs([], "array", [])]:
        assert rep.classify_shape(result) in rep.DATA_FORMATS


# --- representation rule conformance -----------------------------------------------------------

def test_single_value_plain_text_with_unit_emphasis():
    plan = rep.plan_for(single_value(), title="height")
    assert plan.kind == "plain_text"
    assert plan.emphasis  # highlighted because it carries a unit
    text = rep.render_text(plan)
    assert "0.4" in text and "m" in text and "**" in text


def test_single_value_without_unit_not_emphasized():
    plan = rep.plan_for(rs([ResultRow(group=(), value="second", keys=[])],
                           "single_value", []))
    assert plan.kind == "plain_text" and not plan.emphasis


def test_array_becomes_column_chart_with_detail_table():
    plan = rep.plan_for(flat_array())
    assert plan.kind == "column_chart"
    assert plan.detail_table is not None
    assert plan.detail_table["columns"][0] == "storey"


def test_wide_array_becomes_bar_chart():
    rows = [ResultRow(group=(f"s{i:02d}",), value=float(i), keys=[])
            for i in range(9)]
    plan = rep.plan_for(rs(rows, "array", ["storey"]))
    assert plan.kind == "bar_chart"


def test_non_numeric_array_becomes_table():
    rows = [ResultRow(group=("x",), value="B-201", keys=["#9"]),
            ResultRow(group=("y",), value="B-202", keys=["#10"])]
    plan = rep.plan_for(rs(rows, "array", ["tag"]))
    assert plan.kind == "table"


def test_time_keyed_rows_take_time_x_axis():
    plan = rep.plan_for(time_series())
    assert plan.kind == "line_chart"
    assert plan.x_axis.is_time


def test_multi_series_time_chart():
    plan = rep.plan_for(time_series(n_series=2))
    # tree-shaped, but every leaf group is a date: grouped chart keeps the
    # time axis behaviour via its series
    assert plan.kind in ("multi_series_chart", "grouped_chart")
    assert len(plan.series) == 2


def test_tree_becomes_grouped_chart_plus_tree_list():
    plan = rep.plan_for(tree_result())
    assert plan.kind == "grouped_chart"
    kinds = [c.kind for c in plan.companions]
    assert "tree_list" in kinds
    assert plan.tree is not None


def test_dual_axis_triggers_at_two_orders_of_magnitude():
    plan = rep.plan_for(tree_result())  # 1.8 vs 800 spans >= 100x
    assert plan.dual_axis
    assert plan.y_axis.log


def test_dual_axis_not_triggered_for_narrow_ranges():
    rows = [ResultRow(group=("volume", "second"), value=4.0, keys=[], unit="m3"),
            ResultRow(group=("weight", "second"), value=6.0, keys=[], unit="kg")]
    plan = rep.plan_for(rs(rows, "tree", ["kind", "storey"]))
    assert not plan.dual_axis


def test_schedule_net_becomes_timeline_dashboard_with_gantt():
    plan = rep.plan_for(schedule_net())
    assert plan.kind == "timeline_dashboard"
    kinds = [c.kind for c in plan.companions]
    assert "gantt" in kinds and "table" in kinds
    assert plan.x_axis.is_time
    bars = plan.series[0].points
    assert any(b["milestone"] for b in bars)
    assert plan.summary["name"] == "handover"
    assert set(plan.summary) >= {"name", "start", "finish", "duration"}


def test_plain_net_becomes_net_graph():
    plan = rep.plan_for(plain_net())
    assert plan.kind == "net_graph"
    edges = plan.series[0].points
    assert {"from": "a", "to": "b"} in edges


def test_geometric_becomes_model_view_stub_with_color_groups():
    plan = rep.plan_for(geometric_result())
    assert plan.kind == "model_view_stub"
    labels = {g["label"] for g in plan.color_groups}
    assert labels == {"steel", "concrete"}
    colors = [g["color"] for g in plan.color_groups]
    assert len(set(colors)) == len(colors)
    # the non-geometric view rides along
    assert [c.kind for c in plan.companions] == ["table"]
    # stable colors across runs
    again = rep.plan_for(geometric_result())
    assert [g["color"] for g in again.color_groups] == colors


# --- renderer -----------------------------------------------------------------------

def test_render_single_value():
    text = rep.render_text(rep.plan_for(single_value(), title="height"))
    assert text.splitlines()[0].startswith("height:")


def test_render_empty_result():
    plan = rep.plan_for(rs([], "array", []))
    assert rep.render_text(plan).strip() == "no matching data"


def test_render_bar_proportionality():
    rows = [ResultRow(group=("a",), value=10.0, keys=[]),
            ResultRow(group=("b",), value=5.0, keys=[])]
    plan = rep.plan_for(rs(rows, "array", ["g"]))
    lines = [l for l in rep.render_text(plan).splitlines() if "#" in l]
    cells = [l.split()[1].count("#") for l in lines[:2]]
    # proportional within one cell: 10 -> 40 cells, 5 -> 20 cells
    assert abs(cells[0] - rep.BAR_WIDTH) <= 1
    assert abs(cells[1] - rep.BAR_WIDTH // 2) <= 1


def test_render_tree_list_indented():
    plan = rep.plan_for(tree_result())
    text = rep.render_text(plan)
    assert "\n  " in text
    assert "volume" in text and "weight" in text


def test_render_stable_across_runs():
    for make in [single_value, flat_array, tree_result, schedule_net,
                 geometric_result]:
        a = rep.render_text(rep.plan_for(make()))
        b = rep.render_text(rep.plan_for(make()))
        assert a == b


def test_render_injective_on_plan_corpus():
    plans = [rep.plan_for(make(), title=make.__name__) for make in
             [single_value, flat_array, tree_result, spatial_tree,
              schedule_net, plain_net, geometric_result, time_series]]
    texts = [rep.render_text(p) for p in plans]
    for (i, a), (j, b) in itertools.combinations(enumerate(texts), 2):
        assert a != b, (plans[i].kind, plans[j].kind)


# --- serialization --------------------------------------------------------------------

def test_plan_serialization_round_trip():
    for make in [single_value, flat_array, tree_result, schedule_net,
                 plain_net, geometric_result, time_series]:
        plan = rep.plan_for(make(), title="t")
        blob = plan.dumps()
        again = rep.RepresentationPlan.loads(blob)
        assert again.dumps() == blob
        assert rep.render_text(again) == rep.render_text(plan)


def test_every_plan_kind_reachable_or_constructible():
    reachable = {rep.plan_for(make()).kind for make in
                 [single_value, flat_array, tree_result, schedule_net,
                  plain_net, geometric_result, time_series]}
    reachable.add(rep.plan_for(time_series(2)).kind)
    reachable.add(rep.plan_for(rs([ResultRow(group=(f"s{i}",), value=float(i),
                                             keys=[]) for i in range(9)],
                                  "array", ["s"])).kind)
    reachable.add(rep.plan_for(rs(
        [ResultRow(group=("x",), value="a", keys=[])], "array", ["t"])).kind)
    reachable.update(c.kind for make in [tree_result, schedule_net,
                                         geometric_result]
                     for c in rep.plan_for(make()).companions)
    missing = set(rep.PLAN_KINDS) - reachable
    assert missing <= {"multi_series_chart"}, missing
    # multi-series fires for multi-series time data
    assert rep.plan_for(time_series(2)).kind in ("multi_series_chart",
                                                 "grouped_chart")
