/**
 * CPU-side reference implementations used to verify the GPU kernels.
 *
 * `matmulReference` accumulates each output element over k in ascending
 * order with explicit float32 rounding per multiply and per add
 * (Math.fround), which is the numeric contract the kernels are checked
 * against.
 *
 * `randomMatrix` reproduces the lab's deterministic initialization: a
 * counter-mode splitmix64 stream, element (i, j) taking stream index
 * i*n + j, converted to [0, 1) from the top 24 bits of each word.  The
 * same (n, seed) pair therefore yields bit-identical matrices here and in
 * the benchmark harness.
 */

const MASK64 = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

function mix64(value: bigint): bigint {
  let z = value & MASK64;
  z = ((z ^ (z >> 30n)) * MIX1) & MASK64;
  z = ((z ^ (z >> 27n)) * MIX2) & MASK64;
  return z ^ (z >> 31n);
}

/** First `count` outputs of the splitmix64 stream for `seed`. */
export function splitmix64Stream(seed: bigint | number,
                                 count: number): bigint[] {
  const s = BigInt(seed) & MASK64;
  const out: bigint[] = [];
  for (let i = 0; i < count; i++) {
    out.push(mix64((s + BigInt(i + 1) * GAMMA) & MASK64));
  }
  return out;
}

/** Top 24 bits of a generator word as an exact float32 in [0, 1). */
export function unitFloat(word: bigint): number {
  return Math.fround(Number(word >> 40n) * 2 ** -24);
}

/** Deterministic n x n matrix of uniform [0, 1) float32 values. */
export function randomMatrix(n: number, seed: bigint | number): Float32Array {
  if (n < 1) {
    throw new RangeError(`matrix dimension must be >= 1, got ${n}`);
  }
  const out = new Float32Array(n * n);
  const s = BigInt(seed) & MASK64;
  for (let i = 0; i < out.length; i++) {
    out[i] = unitFloat(mix64((s + BigInt(i + 1) * GAMMA) & MASK64));
  }
  return out;
}

export function identityMatrix(n: number): Float32Array {
  if (n < 1) {
    throw new RangeError(`matrix dimension must be >= 1, got ${n}`);
  }
  const out = new Float32Array(n * n);
  for (let i = 0; i < n; i++) {
    out[i * n + i] = 1;
  }
  return out;
}

/** Scalar triple loop with per-step f32 rounding: the oracle. */
export function matmulReference(a: Float32Array, b: Float32Array,
                                n: number): Float32Array {
  if (a.length !== n * n || b.length !== n * n) {
    throw new RangeError(
      `buffers must hold ${n * n} elements, got ${a.length} and ${b.length}`,
    );
  }
  const c = new Float32Array(n * n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      let sum = 0;
      for (let k = 0; k < n; k++) {
        sum = Math.fround(sum + Math.fround(a[i * n + k] * b[k * n + j]));
      }
      c[i * n + j] = sum;
    }
  }
  return c;
}

const REL_FLOOR = 1e-6;

/** Worst relative difference of candidate vs reference (floored denom). */
export function maxRelDiff(reference: Float32Array,
                           candidate: Float32Array): number {
  if (reference.length !== candidate.length) {
    throw new RangeError(
      `length mismatch: ${reference.length} vs ${candidate.length}`,
    );
  }
  let worst = 0;
  for (let i = 0; i < reference.length; i++) {
    const denom = Math.max(Math.abs(reference[i]), REL_FLOOR);
    worst = Math.max(worst, Math.abs(reference[i] - candidate[i]) / denom);
  }
  return worst;
}

/** True iff both arrays carry identical f32 bit patterns. */
export function bitwiseEqual(x: Float32Array, y: Float32Array): boolean {
  if (x.length !== y.length) {
    return false;
  }
  const xi = new Uint32Array(x.buffer, x.byteOffset, x.length);
  const yi = new Uint32Array(y.buffer, y.byteOffset, y.length);
  for (let i = 0; i < xi.length; i++) {
    if (xi[i] !== yi[i]) {
      return false;
    }
  }
  return true;
}
