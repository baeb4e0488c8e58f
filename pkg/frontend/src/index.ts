export {
  BINDING_LAYOUT,
  TILE,
  loadShaderSources,
  validateShaderSource,
  workgroupGrid,
} from "./shaders.js";
export type { KernelVariantName, ShaderSources } from "./shaders.js";
export {
  bitwiseEqual,
  identityMatrix,
  matmulReference,
  maxRelDiff,
  randomMatrix,
  splitmix64Stream,
  unitFloat,
} from "./reference.js";
export { simulateTiledKernel } from "./simulate.js";
export { MatmulGpuContext, probeDevice } from "./gpu.js";
export type {
  GpuDeviceSummary,
  GpuMatmulResult,
  GpuMatmulTiming,
  TimingScopeName,
} from "./gpu.js";
