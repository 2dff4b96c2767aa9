import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";

const HEADER = "round,mean_regret,half_width_95";

function tempCsv(dir: string, name: string, rows = "1,0.0,0.0\n20,1.5,0.2\n"): string {
  const path = join(dir, name);
  writeFileSync(path, `${HEADER}\n${rows}`);
  return path;
}

describe("umabsim-plot CLI", () => {
  let dir: string;
  let out: ReturnType<typeof vi.spyOn>;
  let err: ReturnType<typeof vi.spyOn>;

  beforeEach(() => {
    dir = mkdtempSync(join(tmpdir(), "umabsim-cli-"));
    out = vi.spyOn(console, "log").mockImplementation(() => {});
    err = vi.spyOn(console, "error").mockImplementation(() => {});
  });

  afterEach(() => {
    out.mockRestore();
    err.mockRestore();
  });

  const stderrText = () => err.mock.calls.map((c) => c.join(" ")).join("\n");

  it("renders labeled inputs to the requested SVG", () => {
    const a = tempCsv(dir, "a.csv");
    const b = tempCsv(dir, "b.csv", "1,0.1,0.0\n20,2.5,0.3\n");
    const fig = join(dir, "fig.svg");
    const code = main(["plot", "--out", fig, `${a}:UTS`, `${b}:TS`]);
    expect(code).toBe(0);
    expect(existsSync(fig)).toBe(true);
    expect(out).toHaveBeenCalledWith(fig);
  });

  it("defaults labels to the file stem", () => {
    const a = tempCsv(dir, "line17__uts.csv");
    const fig = join(dir, "fig.svg");
    expect(main(["plot", "--out", fig, a])).toBe(0);
    expect(existsSync(fig)).toBe(true);
  });

  it("accepts --log-x, --title, and dimensions", () => {
    const a = tempCsv(dir, "a.csv");
    const fig = join(dir, "fig.svg");
    const code = main([
      "plot", "--out", fig, "--log-x", "--title", "demo",
      "--width", "640", "--height", "400", `${a}:A`,
    ]);
    expect(code).toBe(0);
  });

  it("fails with usage on a missing --out", () => {
    expect(main(["plot", "a.csv"])).toBe(2);
    expect(stderrText()).toContain("--out");
  });

  it("fails with usage when no inputs are given", () => {
    expect(main(["plot", "--out", join(dir, "f.svg")])).toBe(2);
    expect(stderrText()).toContain("no input CSVs");
  });

  it("fails with usage on an unknown command", () => {
    expect(main(["draw", "--out", "f.svg", "a.csv"])).toBe(2);
    expect(stderrText()).toContain("draw");
  });

  it("rejects a non-integer width", () => {
    const a = tempCsv(dir, "a.csv");
    expect(main(["plot", "--out", join(dir, "f.svg"), "--width", "wide", a])).toBe(2);
    expect(stderrText()).toContain("--width");
  });

  it("names a missing input file", () => {
    const missing = join(dir, "gone.csv");
    expect(main(["plot", "--out", join(dir, "f.svg"), `${missing}:X`])).toBe(1);
    expect(stderrText()).toContain(missing);
  });

  it("names the column broken in a malformed input", () => {
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, `${HEADER}\n1,not-a-number,0\n`);
    expect(main(["plot", "--out", join(dir, "f.svg"), bad])).toBe(1);
    expect(stderrText()).toContain("bad.csv");
    expect(stderrText()).toContain("mean_regret");
  });

  it("rejects raster output paths", () => {
    const a = tempCsv(dir, "a.csv");
    expect(main(["plot", "--out", join(dir, "f.png"), a])).toBe(1);
    expect(stderrText()).toContain(".svg");
  });

  it("prints usage on --help", () => {
    expect(main(["--help"])).toBe(0);
    expect(out.mock.calls.flat().join("\n")).toContain("usage:");
  });
});
