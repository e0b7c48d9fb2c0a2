/** Pure rendering: a RepresentationPlan in, an HTML string out.
 *
 * Charts are drawn as inline SVG from the plan's series and axis flags;
 * nothing is recomputed from raw results. Every plan kind the service can
 * emit has a renderer here, and companions render beneath their parent.
 */

import type {
  DetailTable, RepresentationPlan, Series, SeriesPoint, TreeNode,
} from "./types.js";

const CHART_W = 560;
const CHART_H = 240;
const MARGIN = { top: 16, right: 16, bottom: 48, left: 56 };
const PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                 "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

export function escapeHtml(text: unknown): string {
  return String(text ?? "")
    .replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;").replace(/'/g, "&#39;");
}

function fmt(value: unknown): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value)
      : value.toPrecision(6).replace(/\.?0+$/, "");
  }
  return String(value ?? "");
}

/** Render a plan and its companions into one HTML fragment. */
export function renderPlan(plan: RepresentationPlan): string {
  const parts = [renderOne(plan)];
  for (const companion of plan.companions ?? []) {
    parts.push(renderPlan(companion));
  }
  return parts.join("\n");
}

function renderOne(plan: RepresentationPlan): string {
  switch (plan.kind) {
    case "plain_text": return renderPlainText(plan);
    case "table": return renderTablePanel(plan);
    case "column_chart":
    case "bar_chart": return renderBarish(plan);
    case "line_chart":
    case "multi_series_chart":
    case "grouped_chart": return renderLinesOrGroups(plan);
    case "tree_list": return renderTreeList(plan);
    case "net_graph": return renderNetGraph(plan);
    case "gantt": return renderGantt(plan);
    case "timeline_dashboard": return renderTimelineDashboard(plan);
    case "model_view_stub": return renderModelViewStub(plan);
    default: {
      const kind = (plan as RepresentationPlan).kind;
      return panel(kind, `<p class="muted">no renderer for ${escapeHtml(kind)}</p>`);
    }
  }
}

function panel(kind: string, body: string, title = ""): string {
  const heading = title ? `<h3>${escapeHtml(title)}</h3>` : "";
  return `<section class="panel panel-${kind}" data-kind="${kind}">` +
    `${heading}${body}</section>`;
}

// ---- plain text -----------------------------------------------------------

function renderPlainText(plan: RepresentationPlan): string {
  const point = plan.series[0]?.points[0];
  if (!point) {
    return panel("plain_text", `<p class="muted">no matching data</p>`, plan.title);
  }
  const unit = point.unit ? ` <span class="unit">${escapeHtml(point.unit)}</span>` : "";
  const cls = plan.emphasis ? "value emphasized" : "value";
  return panel("plain_text",
    `<p class="${cls}">${escapeHtml(fmt(point.y))}${unit}</p>`, plan.title);
}

// ---- tables ------------------------------------------------------------------

export function renderDetailTable(table: DetailTable | null): string {
  if (!table || table.rows.length === 0) {
    return `<p class="muted">no matching data</p>`;
  }
  const head = table.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const rows = table.rows.map((row) =>
    `<tr>${row.map((cell) => `<td>${escapeHtml(fmt(cell))}</td>`).join("")}</tr>`,
  ).join("");
  return `<table class="detail"><thead><tr>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

function renderTablePanel(plan: RepresentationPlan): string {
  return panel("table", renderDetailTable(plan.detail_table), plan.title);
}

function collapsibleDetail(table: DetailTable | null): string {
  if (!table || table.rows.length === 0) return "";
  return `<details class="detail-wrap"><summary>detail table</summary>` +
    renderDetailTable(table) + `</details>`;
}

// ---- charts --------------------------------------------------------------------

interface Scaled { x: number; width: number }

function numericPoints(series: Series[]): SeriesPoint[] {
  return series.flatMap((s) => s.points.filter(
    (p) => typeof p.y === "number" && Number.isFinite(p.y)));
}

function yScale(plan: RepresentationPlan, values: number[]):
    (v: number) => number {
  const log = !!plan.y_axis?.log;
  const positive = values.filter((v) => v > 0);
  const max = Math.max(...values, 1e-9);
  const min = log && positive.length ? Math.min(...positive) : 0;
  const span = CHART_H - MARGIN.top - MARGIN.bottom;
  if (log && positive.length) {
    const lo = Math.log10(min) - 0.05;
    const hi = Math.log10(max) + 0.05;
    return (v) => {
      const t = v <= 0 ? 0 : (Math.log10(v) - lo) / Math.max(hi - lo, 1e-9);
      return CHART_H - MARGIN.bottom - t * span;
    };
  }
  return (v) => CHART_H - MARGIN.bottom - (v / max) * span;
}

function xBands(labels: string[]): Map<string, Scaled> {
  const span = CHART_W - MARGIN.left - MARGIN.right;
  const width = span / Math.max(labels.length, 1);
  const out = new Map<string, Scaled>();
  labels.forEach((label, i) => {
    out.set(label, { x: MARGIN.left + i * width, width });
  });
  return out;
}

function axisLines(plan: RepresentationPlan): string {
  const x0 = MARGIN.left;
  const y0 = CHART_H - MARGIN.bottom;
  const xLabel = plan.x_axis?.label ?? "";
  const yLabel = [plan.y_axis?.label, plan.y_axis?.unit]
    .filter(Boolean).join(", ");
  const flags = [
    plan.x_axis?.is_time ? "time axis" : "",
    plan.dual_axis ? "dual axis" : "",
    plan.y_axis?.log ? "log scale" : "",
  ].filter(Boolean).join(" · ");
  return `<line x1="${x0}" y1="${y0}" x2="${CHART_W - MARGIN.right}" y2="${y0}"
      class="axis"/>` +
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" class="axis"/>` +
    `<text x="${CHART_W / 2}" y="${CHART_H - 6}" class="axis-label">` +
    `${escapeHtml(xLabel)}</text>` +
    `<text x="12" y="${MARGIN.top - 4}" class="axis-label">` +
    `${escapeHtml(yLabel)}</text>` +
    (flags ? `<text x="${CHART_W - MARGIN.right}" y="${MARGIN.top - 4}"
      text-anchor="end" class="axis-flags">${escapeHtml(flags)}</text>` : "");
}

function legend(series: Series[]): string {
  if (series.length <= 1) return "";
  const items = series.map((s, i) =>
    `<span class="legend-item"><span class="swatch" style="background:` +
    `${PALETTE[i % PALETTE.length]}"></span>${escapeHtml(s.label)}` +
    (s.unit ? ` (${escapeHtml(s.unit)})` : "") + `</span>`).join(" ");
  return `<div class="legend">${items}</div>`;
}

function renderBarish(plan: RepresentationPlan): string {
  const points = numericPoints(plan.series);
  if (points.length === 0) {
    return panel(plan.kind, `<p class="muted">no matching data</p>`, plan.title);
  }
  const labels = points.map((p) => String(p.x));
  const bands = xBands(labels);
  const scale = yScale(plan, points.map((p) => p.y as number));
  const baseline = CHART_H - MARGIN.bottom;
  const bars = points.map((p, i) => {
    const band = bands.get(String(p.x))!;
    const top = scale(p.y as number);
    const pad = band.width * 0.15;
    return `<rect x="${(band.x + pad).toFixed(1)}" y="${top.toFixed(1)}"
        width="${(band.width - 2 * pad).toFixed(1)}"
        height="${Math.max(baseline - top, 1).toFixed(1)}"
        fill="${PALETTE[i % PALETTE.length]}">` +
      `<title>${escapeHtml(p.x)}: ${escapeHtml(fmt(p.y))}` +
      `${p.unit ? " " + escapeHtml(p.unit) : ""}</title></rect>` +
      `<text x="${(band.x + band.width / 2).toFixed(1)}" y="${baseline + 14}"
        text-anchor="middle" class="tick">${escapeHtml(trim(String(p.x)))}</text>` +
      `<text x="${(band.x + band.width / 2).toFixed(1)}" y="${(top - 4).toFixed(1)}"
        text-anchor="middle" class="bar-value">${escapeHtml(fmt(p.y))}</text>`;
  }).join("");
  const svg = `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" role="img">` +
    axisLines(plan) + bars + `</svg>`;
  return panel(plan.kind, svg + collapsibleDetail(plan.detail_table), plan.title);
}

function renderLinesOrGroups(plan: RepresentationPlan): string {
  const all = numericPoints(plan.series);
  if (all.length === 0) {
    return panel(plan.kind, `<p class="muted">no matching data</p>`, plan.title);
  }
  const labels = [...new Set(plan.series.flatMap(
    (s) => s.points.map((p) => String(p.x))))].sort();
  const bands = xBands(labels);
  const scale = yScale(plan, all.map((p) => p.y as number));
  const baseline = CHART_H - MARGIN.bottom;
  const asLines = plan.kind === "line_chart" ||
    (plan.kind === "multi_series_chart" && !!plan.x_axis?.is_time);
  const groups = plan.series.map((series, si) => {
    const color = PALETTE[si % PALETTE.length];
    const pts = series.points.filter((p) => typeof p.y === "number");
    if (asLines) {
      const coords = pts.map((p) => {
        const band = bands.get(String(p.x))!;
        return `${(band.x + band.width / 2).toFixed(1)},` +
          `${scale(p.y as number).toFixed(1)}`;
      });
      const dots = pts.map((p) => {
        const band = bands.get(String(p.x))!;
        return `<circle cx="${(band.x + band.width / 2).toFixed(1)}"
            cy="${scale(p.y as number).toFixed(1)}" r="3" fill="${color}">` +
          `<title>${escapeHtml(series.label)} ${escapeHtml(p.x)}: ` +
          `${escapeHtml(fmt(p.y))}</title></circle>`;
      }).join("");
      return `<polyline points="${coords.join(" ")}" fill="none"
          stroke="${color}" stroke-width="2"/>` + dots;
    }
    const slice = 1 / Math.max(plan.series.length, 1);
    return pts.map((p) => {
      const band = bands.get(String(p.x))!;
      const width = band.width * slice;
      const x = band.x + width * si + width * 0.1;
      const top = scale(p.y as number);
      return `<rect x="${x.toFixed(1)}" y="${top.toFixed(1)}"
          width="${(width * 0.8).toFixed(1)}"
          height="${Math.max(baseline - top, 1).toFixed(1)}" fill="${color}">` +
        `<title>${escapeHtml(series.label)} / ${escapeHtml(p.x)}: ` +
        `${escapeHtml(fmt(p.y))}${p.unit ? " " + escapeHtml(p.unit) : ""}` +
        `</title></rect>`;
    }).join("");
  }).join("");
  const ticks = labels.map((label) => {
    const band = bands.get(label)!;
    return `<text x="${(band.x + band.width / 2).toFixed(1)}" y="${baseline + 14}"
        text-anchor="middle" class="tick">${escapeHtml(trim(label))}</text>`;
  }).join("");
  const svg = `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" role="img">` +
    axisLines(plan) + groups + ticks + `</svg>`;
  return panel(plan.kind, legend(plan.series) + svg +
    collapsibleDetail(plan.detail_table), plan.title);
}

function trim(label: string, max = 14): string {
  return label.length > max ? label.slice(0, max - 1) + "…" : label;
}

// ---- tree list -------------------------------------------------------------------

function renderTreeNode(node: TreeNode): string {
  if (node.children && node.children.length > 0) {
    const children = node.children.map(renderTreeNode).join("");
    return `<li><span class="tree-label">${escapeHtml(node.label)}</span>` +
      `<ul>${children}</ul></li>`;
  }
  const unit = node.unit ? ` ${escapeHtml(node.unit)}` : "";
  const value = node.value !== undefined
    ? `: <span class="tree-value">${escapeHtml(fmt(node.value))}${unit}</span>`
    : "";
  return `<li><span class="tree-label">${escapeHtml(node.label)}</span>` +
    `${value}</li>`;
}

function renderTreeList(plan: RepresentationPlan): string {
  if (!plan.tree) {
    return panel("tree_list", `<p class="muted">no matching data</p>`, plan.title);
  }
  const children = (plan.tree.children ?? []).map(renderTreeNode).join("");
  if (!children) {
    return panel("tree_list", `<p class="muted">no matching data</p>`, plan.title);
  }
  return panel("tree_list", `<ul class="tree">${children}</ul>`, plan.title);
}

// ---- nets, gantt, timeline ----------------------------------------------------------

function renderNetGraph(plan: RepresentationPlan): string {
  const edges = plan.series[0]?.points ?? [];
  const nodes = [...new Set(edges.flatMap((e) => [e.from ?? "", e.to ?? ""]))]
    .filter(Boolean);
  if (nodes.length === 0) {
    return panel("net_graph",
      renderDetailTable(plan.detail_table), plan.title);
  }
  const radius = 90;
  const cx = CHART_W / 2;
  const cy = 130;
  const spot = new Map<string, { x: number; y: number }>();
  nodes.forEach((name, i) => {
    const angle = (2 * Math.PI * i) / nodes.length - Math.PI / 2;
    spot.set(name, { x: cx + radius * Math.cos(angle),
                     y: cy + radius * Math.sin(angle) });
  });
  const lines = edges.map((e) => {
    const a = spot.get(e.from ?? "");
    const b = spot.get(e.to ?? "");
    if (!a || !b) return "";
    return `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}"
        x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" class="net-edge"
        marker-end="url(#arrow)"/>`;
  }).join("");
  const dots = nodes.map((name) => {
    const p = spot.get(name)!;
    return `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="6"
        class="net-node"/>` +
      `<text x="${p.x.toFixed(1)}" y="${(p.y - 10).toFixed(1)}"
        text-anchor="middle" class="tick">${escapeHtml(trim(name, 22))}</text>`;
  }).join("");
  const svg = `<svg viewBox="0 0 ${CHART_W} 260" role="img">
    <defs><marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4"
      markerWidth="6" markerHeight="6" orient="auto">
      <path d="M0,0 L8,4 L0,8 z" class="net-arrow"/></marker></defs>
    ${lines}${dots}</svg>`;
  return panel("net_graph", svg + collapsibleDetail(plan.detail_table),
    plan.title);
}

interface TimeSpan { min: number; max: number }

function timeSpan(points: SeriesPoint[]): TimeSpan | null {
  const stamps = points.flatMap((p) =>
    [p.start, p.finish].filter((d): d is string => !!d)
      .map((d) => Date.parse(d)));
  if (stamps.length === 0) return null;
  const min = Math.min(...stamps);
  const max = Math.max(...stamps, min + 1);
  return { min, max };
}

function renderGantt(plan: RepresentationPlan): string {
  const bars = plan.series[0]?.points ?? [];
  const span = timeSpan(bars);
  if (!span || bars.length === 0) {
    return panel("gantt", `<p class="muted">no schedule data</p>`, plan.title);
  }
  const rowH = 26;
  const height = MARGIN.top + bars.length * rowH + 24;
  const left = 180;
  const width = CHART_W - left - MARGIN.right;
  const xOf = (stamp: number) =>
    left + ((stamp - span.min) / (span.max - span.min)) * width;
  const rows = bars.map((bar, i) => {
    const y = MARGIN.top + i * rowH;
    const start = bar.start ? Date.parse(bar.start) : span.min;
    const finish = bar.finish ? Date.parse(bar.finish) : start;
    const x0 = xOf(start);
    const x1 = Math.max(xOf(finish), x0 + 2);
    const label = `<text x="${left - 8}" y="${y + 14}" text-anchor="end"
        class="tick">${escapeHtml(trim(String(bar.x), 26))}</text>`;
    if (bar.milestone) {
      const cx = x0;
      const cyM = y + 10;
      return label + `<path d="M${cx} ${cyM - 7} L${cx + 7} ${cyM}
          L${cx} ${cyM + 7} L${cx - 7} ${cyM} Z" class="milestone">` +
        `<title>${escapeHtml(bar.x)} (milestone) ${escapeHtml(bar.start)}` +
        `</title></path>`;
    }
    const done = typeof bar.percent_complete === "number"
      ? Math.max(0, Math.min(1, bar.percent_complete / 100)) : 0;
    return label +
      `<rect x="${x0.toFixed(1)}" y="${y + 3}" width="${(x1 - x0).toFixed(1)}"
        height="14" class="gantt-bar">` +
      `<title>${escapeHtml(bar.x)}: ${escapeHtml(bar.start)} .. ` +
      `${escapeHtml(bar.finish)}</title></rect>` +
      (done > 0 ? `<rect x="${x0.toFixed(1)}" y="${y + 3}"
        width="${((x1 - x0) * done).toFixed(1)}" height="14"
        class="gantt-done"/>` : "");
  }).join("");
  const svg = `<svg viewBox="0 0 ${CHART_W} ${height}" role="img">${rows}</svg>`;
  return panel("gantt", svg, plan.title);
}

function renderTimelineDashboard(plan: RepresentationPlan): string {
  const bars = (plan.series[0]?.points ?? []).slice()
    .sort((a, b) => String(a.start ?? "").localeCompare(String(b.start ?? "")));
  if (bars.length === 0) {
    return panel("timeline_dashboard", `<p class="muted">no matching data</p>`,
      plan.title);
  }
  // panel 1: the timeline with milestone flags
  const flags = bars.map((bar) => {
    const cls = bar.milestone ? "flag milestone-flag" : "flag";
    const marker = bar.milestone ? "◆" : "•";
    return `<li class="${cls}"><span class="flag-date">` +
      `${escapeHtml(bar.start ?? "")}</span> <span class="flag-marker">` +
      `${marker}</span> ${escapeHtml(String(bar.x))}` +
      (bar.status ? ` <span class="muted">(${escapeHtml(bar.status)})</span>` : "") +
      `</li>`;
  }).join("");
  const timeline = `<ol class="timeline">${flags}</ol>`;
  // panel 2: snapshot placeholder (color legend instead of an image)
  const snapshot = `<div class="snapshot"><p class="muted">model snapshot ` +
    `placeholder</p></div>`;
  // panel 3: summary of the highlighted task
  const s = plan.summary;
  const summary = s
    ? `<dl class="summary">` +
      `<dt>name</dt><dd>${escapeHtml(s.name)}</dd>` +
      `<dt>start</dt><dd>${escapeHtml(s.start ?? "")}</dd>` +
      `<dt>finish</dt><dd>${escapeHtml(s.finish ?? "")}</dd>` +
      `<dt>duration</dt><dd>${escapeHtml(fmt(s.duration ?? ""))} days</dd>` +
      (s.status ? `<dt>status</dt><dd>${escapeHtml(s.status)}</dd>` : "") +
      `</dl>`
    : `<p class="muted">no summary</p>`;
  const body = `<div class="dashboard">` +
    `<div class="dash-panel">${timeline}</div>` +
    `<div class="dash-panel">${snapshot}</div>` +
    `<div class="dash-panel">${summary}</div></div>`;
  return panel("timeline_dashboard", body, plan.title);
}

function renderModelViewStub(plan: RepresentationPlan): string {
  if (plan.color_groups.length === 0) {
    return panel("model_view_stub", `<p class="muted">no matching data</p>`,
      plan.title);
  }
  const rows = plan.color_groups.map((group) =>
    `<li><span class="swatch" style="background:${escapeHtml(group.color)}">` +
    `</span> ${escapeHtml(group.label)} ` +
    `<span class="muted">(${group.keys.length} shapes)</span></li>`).join("");
  const note = `<p class="muted">3D view not rendered; shapes in a group ` +
    `share one color.</p>`;
  return panel("model_view_stub", `<ul class="legend-list">${rows}</ul>${note}`,
    plan.title);
}
