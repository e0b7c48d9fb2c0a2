/** Plan inspection shows anchors, hop labels and access counts exactly as
 * the service reported them (pinned by the recorded golden). */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { renderInspection } from "../src/inspect.js";
import type { QueryResponse } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function load(name: string): QueryResponse {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8"));
}

const golden = JSON.parse(
  readFileSync(join(FIXTURES, "flagship_golden.json"), "utf-8")) as {
  anchors: string[]; hop_labels: string[]; accesses: number; order: string[];
};

describe("plan inspection", () => {
  const response = load("grouped_chart");
  const html = renderInspection(response);

  it("shows every anchor from the service golden", () => {
    for (const anchor of golden.anchors) {
      expect(html).toContain(anchor);
    }
  });

  it("shows every hop label from the service golden", () => {
    for (const hop of golden.hop_labels) {
      const escaped = hop.replace(/&/g, "&amp;")
        .replace(/</g, "&lt;").replace(/>/g, "&gt;");
      expect(html).toContain(escaped);
    }
  });

  it("shows the access count and application order", () => {
    expect(html).toContain(`collection accesses (${golden.accesses})`);
    expect(html).toContain(golden.order.join(" &rarr; "));
  });

  it("lists constraints next to their keyword", () => {
    expect(html).toContain("storey");
    expect(html).toContain("second");
    expect(html).toContain("third");
  });

  it("renders a degenerate single-keyword plan", () => {
    const single = load("plain_text");
    const output = renderInspection(single);
    expect(output).toContain("keywords");
    expect(output.length).toBeGreaterThan(0);
  });
});
