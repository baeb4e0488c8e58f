/**
 * CPU simulation of the tiled kernel's SPMD execution.
 *
 * Mirrors the WGSL control flow one workgroup at a time: per 16-element
 * phase, all 256 invocations first populate the two workgroup tiles
 * (zero-filling out-of-range loads), then — after the barrier — accumulate
 * 16 multiply-adds from tile memory, then hit the second barrier before the
 * next load.  The two barriers are modeled by running the load step of
 * every invocation to completion before any accumulation step.  Arithmetic
 * uses explicit float32 rounding, so the simulation is an exact model of
 * the kernel's accumulation order.
 */

import { TILE } from "./shaders.js";

export function simulateTiledKernel(a: Float32Array, b: Float32Array,
                                    n: number): Float32Array {
  if (a.length !== n * n || b.length !== n * n) {
    throw new RangeError(
      `buffers must hold ${n * n} elements, got ${a.length} and ${b.length}`,
    );
  }
  const groups = Math.ceil(n / TILE);
  const phases = Math.ceil(n / TILE);
  const c = new Float32Array(n * n);
  const aTile = new Float32Array(TILE * TILE);
  const bTile = new Float32Array(TILE * TILE);
  const sums = new Float32Array(TILE * TILE);

  for (let wy = 0; wy < groups; wy++) {
    for (let wx = 0; wx < groups; wx++) {
      sums.fill(0);
      for (let p = 0; p < phases; p++) {
        // load step: every invocation writes one element of each tile
        for (let ly = 0; ly < TILE; ly++) {
          for (let lx = 0; lx < TILE; lx++) {
            const row = wy * TILE + ly;
            const aCol = p * TILE + lx;
            aTile[ly * TILE + lx] =
              row < n && aCol < n ? a[row * n + aCol] : 0;
            const bRow = p * TILE + ly;
            const col = wx * TILE + lx;
            bTile[ly * TILE + lx] =
              bRow < n && col < n ? b[bRow * n + col] : 0;
          }
        }
        // barrier, then accumulate step from tile memory
        for (let ly = 0; ly < TILE; ly++) {
          for (let lx = 0; lx < TILE; lx++) {
            let sum = sums[ly * TILE + lx];
            for (let k = 0; k < TILE; k++) {
              sum = Math.fround(
                sum + Math.fround(aTile[ly * TILE + k] * bTile[k * TILE + lx]),
              );
            }
            sums[ly * TILE + lx] = sum;
          }
        }
        // second barrier before the next phase overwrites the tiles
      }
      for (let ly = 0; ly < TILE; ly++) {
        for (let lx = 0; lx < TILE; lx++) {
          const row = wy * TILE + ly;
          const col = wx * TILE + lx;
          if (row < n && col < n) {
            c[row * n + col] = sums[ly * TILE + lx];
          }
        }
      }
    }
  }
  return c;
}
