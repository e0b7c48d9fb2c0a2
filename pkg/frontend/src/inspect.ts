/** Plan inspection view: keywords, constraints, bindings, path hops and
 * access counts, read straight from a QueryResponse payload. */

import { escapeHtml } from "./render.js";
import type { QueryResponse } from "./types.js";

export function renderInspection(response: QueryResponse): string {
  const ks = response.keywords;
  const keywords = ks.keywords.map((k) => {
    const constraints = ks.constraints
      .filter((c) => c.target === k.word)
      .map((c) => c.word + (c.connective ? ` (${c.connective})` : ""));
    const suffix = constraints.length
      ? ` <span class="muted">&larr; ${escapeHtml(constraints.join(", "))}</span>`
      : "";
    return `<li><strong>${escapeHtml(k.word)}</strong>${suffix}</li>`;
  }).join("");

  const order = ks.order.map((w) => escapeHtml(w)).join(" &rarr; ");
  const anchors = (response.plan.anchors ?? [])
    .map((a) => `<li>${escapeHtml(a)}</li>`).join("");
  const hops = (response.plan.hop_labels ?? [])
    .map((h) => `<li><code>${escapeHtml(h)}</code></li>`).join("");

  let accessBlock = "";
  if ("provenance" in response.result && response.result.provenance) {
    const prov = response.result.provenance;
    const byColl = Object.entries(prov.by_collection ?? {})
      .map(([name, n]) => `<li>${escapeHtml(name)}: ${n}</li>`).join("");
    const hopRows = (prov.hops ?? []).map((h) =>
      `<li>${escapeHtml(h.hop)}: ${h.pair_accesses} access` +
      `${h.pair_accesses === 1 ? "" : "es"}` +
      `${h.prejoined ? " (pre-joined)" : ""}</li>`).join("");
    accessBlock =
      `<h4>collection accesses (${prov.accesses})</h4><ul>${byColl}</ul>` +
      (hopRows ? `<h4>hops</h4><ul>${hopRows}</ul>` : "");
  }

  const warnings = response.warnings.length
    ? `<h4>warnings</h4><ul>${response.warnings
        .map((w) => `<li>${escapeHtml(w)}</li>`).join("")}</ul>`
    : "";

  return `<div class="inspection">
    <h4>keywords</h4><ul>${keywords}</ul>
    <h4>application order</h4><p>${order}</p>
    <h4>anchors</h4><ul>${anchors}</ul>
    <h4>retrieval hops</h4><ul>${hops || "<li class='muted'>none</li>"}</ul>
    ${accessBlock}${warnings}
  </div>`;
}
