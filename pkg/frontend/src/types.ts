/** Wire types for the askbim HTTP API. The console never recomputes
 * results: everything it shows is read from these payloads. */

export interface Axis {
  label: string;
  unit: string;
  is_time: boolean;
  log: boolean;
}

export interface SeriesPoint {
  x?: string | number;
  y?: number | string;
  unit?: string;
  // gantt / timeline bars
  start?: string | null;
  finish?: string | null;
  milestone?: boolean;
  status?: string | null;
  percent_complete?: number | null;
  keys?: string[];
  // net edges
  from?: string;
  to?: string;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
  unit: string;
}

export interface DetailTable {
  columns: string[];
  rows: (string | number | boolean | null)[][];
}

export interface TreeNode {
  label: string;
  dimension?: string;
  children?: TreeNode[];
  value?: number | string;
  unit?: string;
  keys?: string[];
}

export interface ColorGroup {
  label: string;
  color: string;
  keys: string[];
}

export interface TaskSummary {
  name: string;
  start?: string | null;
  finish?: string | null;
  duration?: number | null;
  status?: string | null;
}

export type PlanKind =
  | "plain_text" | "table" | "bar_chart" | "column_chart" | "line_chart"
  | "multi_series_chart" | "tree_list" | "grouped_chart" | "net_graph"
  | "gantt" | "timeline_dashboard" | "model_view_stub";

export interface RepresentationPlan {
  kind: PlanKind;
  title: string;
  x_axis: Axis | null;
  y_axis: Axis | null;
  dual_axis: boolean;
  series: Series[];
  detail_table: DetailTable | null;
  tree: TreeNode | null;
  emphasis: boolean;
  color_groups: ColorGroup[];
  summary: TaskSummary | null;
  companions: RepresentationPlan[];
}

export interface ResultRow {
  group: (string | number)[];
  value: number | string;
  keys: string[];
  unit: string;
  extra: Record<string, unknown>;
}

export interface ResultSet {
  rows: ResultRow[];
  shape: "single_value" | "array" | "tree" | "net" | "geometric";
  group_fields: string[];
  units: Record<string, string>;
  provenance: {
    accesses: number;
    by_collection: Record<string, number>;
    events: [string, string][];
    hops: { hop: string; pair_accesses: number; prejoined: boolean }[];
    prejoined: string[];
    anchors: string[];
    hop_labels: string[];
  };
}

export interface KeywordsView {
  keywords: { word: string; surface: string; position: number[] }[];
  constraints: { target: string; word: string; connective: string | null;
                 source: string }[];
  order: string[];
  links: [string, string][];
  phrase_connectives: [string, string, string][];
  ignored: [string, string][];
}

export interface PlanView {
  anchors: string[];
  hop_labels: string[];
  set_op: string;
  grouping: string[];
  aggregation: string;
  notes: string[];
  [key: string]: unknown;
}

export interface QueryResponse {
  id: string;
  query: string;
  keywords: KeywordsView;
  plan: PlanView;
  result: ResultSet | Record<string, never>;
  representation: RepresentationPlan | Record<string, never>;
  timings: Record<string, number>;
  warnings: string[];
}

export interface ServiceError {
  error: string;
  stage?: string;
  suggestions?: string[];
}

export function hasResult(r: QueryResponse): r is QueryResponse & {
  result: ResultSet; representation: RepresentationPlan;
} {
  return !!r.representation && "kind" in r.representation;
}
