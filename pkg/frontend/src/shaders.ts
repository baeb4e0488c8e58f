/**
 * WGSL kernel sources and their structural contract.
 *
 * The two compute kernels live in `src/shaders/*.wgsl` with a stable
 * binding layout shared with every other consumer of these shaders:
 *
 *   binding 0  A       storage, read-only   n*n f32, row-major
 *   binding 1  B       storage, read-only   n*n f32, row-major
 *   binding 2  C       storage, read-write  n*n f32, row-major
 *   binding 3  params  uniform              { n : u32 }
 *
 * Both kernels use 16x16 workgroups and are dispatched on a
 * ceil(n/16) x ceil(n/16) grid.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

export const TILE = 16;

export type KernelVariantName = "naive" | "tiled";

export interface ShaderSources {
  naive: string;
  tiled: string;
}

export const BINDING_LAYOUT = [
  { binding: 0, declaration: "var<storage, read> a" },
  { binding: 1, declaration: "var<storage, read> b" },
  { binding: 2, declaration: "var<storage, read_write> c" },
  { binding: 3, declaration: "var<uniform> params" },
] as const;

const WORKGROUP_ATTRIBUTE = `@compute @workgroup_size(${TILE}, ${TILE}, 1)`;

/** Cheap host-side validation run before handing sources to the GPU. */
export function validateShaderSource(
  source: string,
  variant: KernelVariantName,
): void {
  const problems: string[] = [];
  if (!source.includes(WORKGROUP_ATTRIBUTE)) {
    problems.push(`missing ${WORKGROUP_ATTRIBUTE}`);
  }
  if (!source.includes("fn main(")) {
    problems.push("missing entry point 'main'");
  }
  for (const { binding, declaration } of BINDING_LAYOUT) {
    if (!source.includes(`@binding(${binding})`) ||
        !source.includes(declaration)) {
      problems.push(`binding ${binding} must declare '${declaration}'`);
    }
  }
  const barriers = source.split("workgroupBarrier()").length - 1;
  if (variant === "tiled" && barriers !== 2) {
    problems.push(`tiled kernel needs exactly 2 barriers, found ${barriers}`);
  }
  if (variant === "naive" && barriers !== 0) {
    problems.push(`naive kernel must not use barriers, found ${barriers}`);
  }
  if (problems.length > 0) {
    throw new Error(
      `invalid ${variant} kernel source: ${problems.join("; ")}`,
    );
  }
}

/** Load the bundled kernel sources from disk (node environments). */
export function loadShaderSources(): ShaderSources {
  const dir = fileURLToPath(new URL("./shaders/", import.meta.url));
  const naive = readFileSync(`${dir}matmul_naive.wgsl`, "utf-8");
  const tiled = readFileSync(`${dir}matmul_tiled.wgsl`, "utf-8");
  validateShaderSource(naive, "naive");
  validateShaderSource(tiled, "tiled");
  return { naive, tiled };
}

/** Workgroups per axis for an n x n output. */
export function workgroupGrid(n: number): number {
  return Math.ceil(n / TILE);
}
