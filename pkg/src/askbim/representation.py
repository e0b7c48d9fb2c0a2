"""Representation planning: classify a result's data format and emit a
declarative plan for how to show it, plus a plain-text renderer.

The plan is decoupled from rendering: charts carry series and axis flags,
never pixels. Downstream views (the text renderer here, the web console)
draw from the plan alone.
"""

import json
import re
from dataclasses import dataclass, field

from .planner import classify_results

DATA_FORMATS = ("single_value", "array", "tree", "net", "geometric")

PLAN_KINDS = ("plain_text", "table", "bar_chart", "column_chart", "line_chart",
              "multi_series_chart", "tree_list", "grouped_chart", "net_graph",
              "gantt", "timeline_dashboard", "model_view_stub")

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}")

BAR_WIDTH = 40

# stable, non-normative palette for color-by-group hints
_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
            "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


@dataclass
class Axis:
    label: str = ""
    unit: str = ""
    is_time: bool = False
    log: bool = False

    def to_json(self):
        return vars(self)


@dataclass
class Series:
    label: str
    points: list  # [{"x":..., "y":...} | task bars with start/finish]
    unit: str = ""

    def to_json(self):
        return {"label": self.label, "points": self.points, "unit": self.unit}


@dataclass
class RepresentationPlan:
    kind: str
    title: str = ""
    x_axis: Axis = None
    y_axis: Axis = None
    dual_axis: bool = False
    series: list = field(default_factory=list)
    detail_table: dict = None                 # {"columns": [...], "rows": [...]}
    tree: dict = None                         # nested grouping for tree lists
    emphasis: bool = False
    color_groups: list = field(default_factory=list)  # [{"label","color","keys"}]
    summary: dict = None                      # timeline dashboard task summary
    companions: list = field(default_factory=list)

    def to_json(self):
        return {
            "kind": self.kind,
            "title": self.title,
            "x_axis": self.x_axis.to_json() if self.x_axis else None,
            "y_axis": self.y_axis.to_json() if self.y_axis else None,
            "dual_axis": self.dual_axis,
            "series": [s.to_json() for s in self.series],
            "detail_table": self.detail_table,
            "tree": self.tree,
            "emphasis": self.emphasis,
            "color_groups": self.color_groups,
            "summary": self.summary,
            "companions": [c.to_json() for c in self.companions],
        }

    @classmethod
    def from_json(cls, obj):
        plan = cls(kind=obj["kind"], title=obj.get("title", ""))
        if obj.get("x_axis"):
            plan.x_axis = Axis(**obj["x_axis"])
        if obj.get("y_axis"):
            plan.y_axis = Axis(**obj["y_axis"])
        plan.dual_axis = obj.get("dual_axis", False)
        plan.series = [Series(label=s["label"], points=s["points"],
                              unit=s.get("unit", "")) for s in obj.get("series", [])]
        plan.detail_table = obj.get("detail_table")
        plan.tree = obj.get("tree")
        plan.emphasis = obj.get("emphasis", False)
        plan.color_groups = obj.get("color_groups", [])
        plan.summary = obj.get("summary")
        plan.companions = [cls.from_json(c) for c in obj.get("companions", [])]
        return plan

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False,
                          separators=(",", ":"))

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


# --- shape classification ---------------------------------------------------

def classify_shape(result):
    """One of the five data formats, re-derived from the result structure."""
    rows = result.rows
    if any(row.extra.get("blobs") for row in rows):
        return "geometric"
    if any(row.extra.get("successors") or row.extra.get("predecessors")
           for row in rows):
        return "net"
    dims = len(result.group_fields)
    if dims >= 2:
        return "tree"
    if dims == 1:
        return "array"
    return "single_value" if len(rows) == 1 else "array"


def _is_time_value(value):
    return isinstance(value, str) and bool(_DATE_RE.match(value))


def _rows_time_keyed(result):
    rows = result.rows
    return bool(rows) and all(row.group and _is_time_value(row.group[-1])
                              for row in rows)


def _schedule_rows(result):
    rows = result.rows
    return bool(rows) and any(row.extra.get("start") or row.extra.get("finish")
                              for row in rows)


def _detail_table(result):
    columns = list(result.group_fields) + ["value", "unit", "keys"]
    rows = [[*row.group, row.value, row.unit, ", ".join(row.keys)]
            for row in result.rows]
    return {"columns": columns, "rows": rows}


def _color_for(index):
    return _PALETTE[index % len(_PALETTE)]


def _numeric_series(result, split_field=None):
    """Series from rows; one series per value of split_field (or a single
    unnamed series)."""
    buckets = {}
    if split_field and split_field in result.group_fields:
        pos = result.group_fields.index(split_field)
        for row in result.rows:
            label = str(row.group[pos])
            x = " / ".join(str(g) for i, g in enumerate(row.group) if i != pos)
            buckets.setdefault(label, []).append(
                {"x": x or label, "y": row.value, "unit": row.unit})
    else:
        label = result.group_fields[0] if result.group_fields else "value"
        points = [{"x": " / ".join(str(g) for g in row.group) or str(row.value),
                   "y": row.value, "unit": row.unit} for row in result.rows]
        buckets[label] = points
    out = []
    for label in sorted(buckets):
        unit = next((p.get("unit") for p in buckets[label] if p.get("unit")), "")
        out.append(Series(label=label, points=buckets[label], unit=unit))
    return out


def _range_spread(series):
    """Ratio between the largest and smallest positive series magnitude."""
    magnitudes = []
    for s in series:
        values = [abs(p["y"]) for p in s.points
                  if isinstance(p.get("y"), (int, float)) and p["y"] != 0]
        if values:
            magnitudes.append(max(values))
    positives = [m for m in magnitudes if m > 0]
    if len(positives) < 2:
        return 1.0
    return max(positives) / min(positives)


def _apply_dual_axis(plan):
    if len(plan.series) >= 2 and _range_spread(plan.series) >= 100.0:
        plan.dual_axis = True
        if plan.y_axis is None:
            plan.y_axis = Axis(label="value")
        plan.y_axis.log = True


# --- representation selection ------------------------------------------------

def select_representation(data_format, result, title=""):
    """RepresentationPlan for a classified result."""
    if data_format not in DATA_FORMATS:
        raise ValueError(f"unknown data format {data_format!r}")
    if data_format == "single_value":
        return _plan_single_value(result, title)
    if data_format == "array":
        return _plan_array(result, title)
    if data_format == "tree":
        return _plan_tree(result, title)
    if data_format == "net":
        return _plan_net(result, title)
    return _plan_geometric(result, title)


def plan_for(result, title=""):
    return select_representation(classify_shape(result), result, title)


def _plan_single_value(result, title):
    plan = RepresentationPlan(kind="plain_text", title=title)
    if result.rows:
        row = result.rows[0]
        plan.series = [Series(label=title or "value",
                              points=[{"x": " / ".join(map(str, row.group)),
                                       "y": row.value, "unit": row.unit}],
                              unit=row.unit)]
        plan.emphasis = bool(row.unit)
    return plan


def _plan_array(result, title):
    if not result.rows:
        return RepresentationPlan(kind="table", title=title,
                                  detail_table=_detail_table(result))
    if _rows_time_keyed(result):
        split = "kind" if "kind" in result.group_fields else None
        series = _numeric_series(result, split)
        kind = "multi_series_chart" if len(series) > 1 else "line_chart"
        plan = RepresentationPlan(kind=kind, title=title,
                                  x_axis=Axis(label="time", is_time=True),
                                  y_axis=Axis(label="value"), series=series,
                                  detail_table=_detail_table(result))
        _apply_dual_axis(plan)
        return plan
    numeric = all(isinstance(r.value, (int, float)) and not isinstance(r.value, bool)
                  for r in result.rows)
    if not numeric:
        return RepresentationPlan(kind="table", title=title,
                                  detail_table=_detail_table(result))
    series = _numeric_series(result)
    categories = len(result.rows)
    kind = "column_chart" if categories <= 8 else "bar_chart"
    plan = RepresentationPlan(kind=kind, title=title,
                              x_axis=Axis(label=(result.group_fields or ["item"])[0]),
                              y_axis=Axis(label="value",
                                          unit=next(iter(result.units.values()), "")),
                              series=series, detail_table=_detail_table(result))
    _apply_dual_axis(plan)
    return plan


def _plan_tree(result, title):
    split = result.group_fields[0]
    series = _numeric_series(result, split)
    time_keyed = all(_is_time_value(p["x"]) for s in series for p in s.points) \
        and any(s.points for s in series)
    kind = "multi_series_chart" if time_keyed and len(series) > 1 else "grouped_chart"
    plan = RepresentationPlan(kind=kind, title=title,
                              x_axis=Axis(label=" / ".join(result.group_fields[1:]),
                                          is_time=time_keyed),
                              y_axis=Axis(label="value"), series=series,
                              detail_table=_detail_table(result),
                              tree=classify_results(result))
    _apply_dual_axis(plan)
    tree_list = RepresentationPlan(kind="tree_list", title=title,
                                   tree=classify_results(result))
    plan.companions.append(tree_list)
    return plan


def _task_bars(result):
    bars = []
    for row in result.rows:
        bars.append({
            "x": str(row.value),
            "start": row.extra.get("start"),
            "finish": row.extra.get("finish"),
            "milestone": bool(row.extra.get("milestone")),
            "status": row.extra.get("status"),
            "percent_complete": row.extra.get("percent_complete"),
            "keys": row.keys,
        })
    return bars


def _plan_net(result, title):
    edges = []
    key_to_label = {}
    for row in result.rows:
        for key in row.keys:
            key_to_label[key] = str(row.value)
    for row in result.rows:
        for successor in row.extra.get("successors", []):
            if successor in key_to_label:
                edges.append({"from": str(row.value),
                              "to": key_to_label[successor]})
    if _schedule_rows(result):
        bars = _task_bars(result)
        milestones = [b for b in bars if b["milestone"]]
        summary = None
        focus = milestones[0] if milestones else (bars[0] if bars else None)
        if focus:
            summary = {"name": focus["x"], "start": focus["start"],
                       "finish": focus["finish"],
                       "duration": _duration_of(focus),
                       "status": focus.get("status")}
        plan = RepresentationPlan(
            kind="timeline_dashboard", title=title,
            x_axis=Axis(label="time", is_time=True),
            series=[Series(label="tasks", points=bars)],
            detail_table=_detail_table(result),
            summary=summary)
        gantt = RepresentationPlan(kind="gantt", title=title,
                                   x_axis=Axis(label="time", is_time=True),
                                   series=[Series(label="tasks", points=bars)])
        detail = RepresentationPlan(kind="table", title=title,
                                    detail_table=_task_detail_table(result))
        plan.companions.extend([gantt, detail])
        return plan
    plan = RepresentationPlan(
        kind="net_graph", title=title,
        series=[Series(label="edges", points=edges)],
        detail_table=_detail_table(result))
    return plan


def _task_detail_table(result):
    columns = ["task", "status", "start", "finish", "percent_complete", "milestone"]
    rows = [[str(row.value), row.extra.get("status"), row.extra.get("start"),
             row.extra.get("finish"), row.extra.get("percent_complete"),
             bool(row.extra.get("milestone"))] for row in result.rows]
    return {"columns": columns, "rows": rows}


def _duration_of(bar):
    start, finish = bar.get("start"), bar.get("finish")
    if not (start and finish):
        return None
    try:
        from datetime import date
        s = date.fromisoformat(start[:10])
        f = date.fromisoformat(finish[:10])
        return (f - s).days
    except ValueError:
        return None


def _plan_geometric(result, title):
    groups = {}
    for row in result.rows:
        label = " / ".join(str(g) for g in row.group) or str(row.value)
        groups.setdefault(label, []).extend(row.keys)
    color_groups = [{"label": label, "color": _color_for(i), "keys": keys}
                    for i, (label, keys) in enumerate(sorted(groups.items()))]
    stub = RepresentationPlan(kind="model_view_stub", title=title,
                              color_groups=color_groups)
    # carry the non-geometric view of the same rows alongside
    base = RepresentationPlan(kind="table", title=title,
                              detail_table=_detail_table(result))
    stub.companions.append(base)
    return stub


# --- plain-text rendering ------------------------------------------------------

def render_text(plan):
    """Deterministic monospace rendering of a plan and its companions."""
    lines = _render_one(plan)
    for companion in plan.companions:
        lines.append("")
        lines.extend(_render_one(companion))
    return "\n".join(lines) + "\n"


def _render_one(plan):
    if plan.kind == "plain_text":
        if not plan.series or not plan.series[0].points:
            return ["no matching data"]
        point = plan.series[0].points[0]
        label = plan.title or plan.series[0].label or "value"
        value = _fmt(point["y"])
        unit = point.get("unit", "")
        text = f"{label}: {value}" + (f" {unit}" if unit else "")
        if plan.emphasis:
            text = f"{label}: **{value} {unit}**".rstrip("* ") + "**"
        return [text]

    if plan.kind in ("column_chart", "bar_chart", "line_chart",
                     "multi_series_chart", "grouped_chart"):
        lines = [plan.title or plan.kind]
        peak = 0.0
        for series in plan.series:
            for p in series.points:
                if isinstance(p.get("y"), (int, float)):
                    peak = max(peak, abs(float(p["y"])))
        for series in plan.series:
            header = f"[{series.label}]" + (f" ({series.unit})" if series.unit else "")
            lines.append(header)
            for p in series.points:
                y = p.get("y")
                if isinstance(y, (int, float)) and peak > 0:
                    cells = round(abs(float(y)) / peak * BAR_WIDTH)
                    bar = "#" * max(cells, 1 if y else 0)
                else:
                    bar = str(y)
                lines.append(f"  {str(p.get('x')):<24} {bar} {_fmt(y)}")
        if plan.dual_axis and plan.y_axis and plan.y_axis.log:
            lines.append("  (dual axis; wide-range series on a log scale)")
        if plan.detail_table:
            lines.append("")
            lines.extend(_render_table(plan.detail_table))
        return lines

    if plan.kind == "table":
        if not plan.detail_table or not plan.detail_table["rows"]:
            return ["no matching data"]
        lines = [plan.title] if plan.title else []
        lines.extend(_render_table(plan.detail_table))
        return lines

    if plan.kind == "tree_list":
        if not plan.tree:
            return ["no matching data"]
        lines = [plan.title or "tree"]
        _render_tree(plan.tree, lines, 0)
        return lines

    if plan.kind == "net_graph":
        lines = [plan.title or "net"]
        edges = plan.series[0].points if plan.series else []
        if not edges and not plan.detail_table:
            return ["no matching data"]
        for edge in edges:
            lines.append(f"  {edge['from']} -> {edge['to']}")
        if plan.detail_table:
            lines.append("")
            lines.extend(_render_table(plan.detail_table))
        return lines

    if plan.kind == "gantt":
        lines = [plan.title or "gantt"]
        bars = plan.series[0].points if plan.series else []
        for bar in bars:
            flag = " ◆" if bar.get("milestone") else ""
            lines.append(f"  {bar['x']:<32} {bar.get('start')} .. "
                         f"{bar.get('finish')}{flag}")
        return lines

    if plan.kind == "timeline_dashboard":
        lines = [plan.title or "timeline"]
        bars = plan.series[0].points if plan.series else []
        if not bars:
            return ["no matching data"]
        for bar in sorted(bars, key=lambda b: (b.get("start") or "", b["x"])):
            flag = "◆ " if bar.get("milestone") else "- "
            lines.append(f"  {bar.get('start')}  {flag}{bar['x']}")
        if plan.summary:
            lines.append("summary:")
            for field_name in ("name", "start", "finish", "duration", "status"):
                value = plan.summary.get(field_name)
                if value is not None:
                    lines.append(f"  {field_name}: {value}")
        return lines

    if plan.kind == "model_view_stub":
        lines = [plan.title or "model view"]
        if not plan.color_groups:
            return ["no matching data"]
        for group in plan.color_groups:
            lines.append(f"  {group['color']}  {group['label']}  "
                         f"({len(group['keys'])} shapes)")
        return lines

    return [f"({plan.kind}: no textual rendering)"]


def _fmt(value):
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _render_table(table):
    columns = [str(c) for c in table["columns"]]
    rows = [[_fmt(v) if isinstance(v, (int, float)) else str(v) for v in row]
            for row in table["rows"]]
    widths = [len(c) for c in columns]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  " + " | ".join(c.ljust(w) for c, w in zip(cells, widths))
    out = [line(columns), "  " + "-+-".join("-" * w for w in widths)]
    out.extend(line(r) for r in rows)
    return out


def _render_tree(node, lines, depth):
    indent = "  " * (depth + 1)
    if "children" in node:
        lines.append(f"{indent}{node['label']}")
        for child in node["children"]:
            _render_tree(child, lines, depth + 1)
    else:
        unit = f" {node['unit']}" if node.get("unit") else ""
        lines.append(f"{indent}{node['label']}: {_fmt(node['value'])}{unit}")
