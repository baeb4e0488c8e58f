import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  BINDING_LAYOUT,
  TILE,
  loadShaderSources,
  validateShaderSource,
  workgroupGrid,
} from "../src/shaders.js";

const sources = loadShaderSources();

describe("shader assets", () => {
  it("declares 16x16 workgroups in both kernels", () => {
    for (const source of [sources.naive, sources.tiled]) {
      expect(source).toContain("@compute @workgroup_size(16, 16, 1)");
      expect(source).toContain("fn main(");
    }
  });

  it("uses the stable binding layout", () => {
    for (const source of [sources.naive, sources.tiled]) {
      for (const { binding, declaration } of BINDING_LAYOUT) {
        expect(source).toContain(`@binding(${binding})`);
        expect(source).toContain(declaration);
      }
    }
  });

  it("naive kernel guards out-of-range invocations and has no barriers", () => {
    expect(sources.naive).toContain("row >= n || col >= n");
    expect(sources.naive).not.toContain("workgroupBarrier");
  });

  it("tiled kernel stages two 16x16 tiles with two barriers per phase", () => {
    const barriers = sources.tiled.split("workgroupBarrier();").length - 1;
    expect(barriers).toBe(2);
    const tiles = sources.tiled.split("var<workgroup>").length - 1;
    expect(tiles).toBe(2);
    expect(sources.tiled).toContain(`array<f32, ${TILE * TILE}>`);
  });

  it("tiled kernel keeps loads contiguous per 16-wide row segment", () => {
    // adjacent lid.x invocations must read adjacent addresses
    expect(sources.tiled).toContain("a[row * n + a_col]");
    expect(sources.tiled).toContain("b[b_row * n + col]");
  });
});

describe("validation", () => {
  it("rejects a kernel missing its barriers", () => {
    const broken = sources.tiled.replace(/workgroupBarrier\(\);/g, "");
    expect(() => validateShaderSource(broken, "tiled")).toThrow(/barrier/);
  });

  it("rejects a kernel with a renamed entry point", () => {
    const broken = sources.naive.replace("fn main(", "fn run(");
    expect(() => validateShaderSource(broken, "naive")).toThrow(/entry/);
  });

  it("rejects a kernel with a rearranged binding layout", () => {
    const broken = sources.naive.replace(
      "var<storage, read> a",
      "var<storage, read_write> a",
    );
    expect(() => validateShaderSource(broken, "naive")).toThrow(/binding 0/);
  });
});

describe("grid math", () => {
  it("covers the output with ceil(n/16) workgroups per axis", () => {
    expect([1, 15, 16, 17, 256, 1000].map(workgroupGrid)).toEqual(
      [1, 1, 1, 2, 16, 63],
    );
  });
});

describe("drift against the benchmark lab's shader assets", () => {
  const labShaderDir = fileURLToPath(
    new URL("../../src/gemmlab/shaders/", import.meta.url),
  );

  it.each(["matmul_naive.wgsl", "matmul_tiled.wgsl"])(
    "%s is byte-identical to the lab copy",
    (name) => {
      const here = fileURLToPath(
        new URL(`../src/shaders/${name}`, import.meta.url),
      );
      expect(readFileSync(here, "utf-8")).toBe(
        readFileSync(`${labShaderDir}${name}`, "utf-8"),
      );
    },
  );
});
