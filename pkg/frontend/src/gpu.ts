/**
 * WebGPU host for the matmul kernels: device acquisition, pipeline
 * compilation/validation at startup, buffer management, dispatch, and
 * per-phase timing.
 *
 * Timing scopes mirror the benchmark harness:
 *  - "transfers-kernel": one wall interval from the host-to-device writes to
 *    readback completion (the readback is the only synchronization point).
 *  - "alloc-transfers-kernel": the window additionally opens before device
 *    buffer allocation.
 *  - "kernel-only": queue drained after the uploads, window covers the
 *    dispatch until the queue idles again; readback happens afterwards.
 *
 * kernelMs comes from timestamp queries when the device supports them,
 * otherwise it is null under the transfer scopes and equals the measured
 * window under "kernel-only".
 */

import {
  KernelVariantName,
  ShaderSources,
  TILE,
  validateShaderSource,
  workgroupGrid,
} from "./shaders.js";

export type TimingScopeName =
  | "transfers-kernel"
  | "alloc-transfers-kernel"
  | "kernel-only";

export interface GpuMatmulTiming {
  allocMs: number;
  h2dMs: number;
  d2hMs: number;
  totalMs: number;
  kernelMs: number | null;
}

export interface GpuDeviceSummary {
  available: boolean;
  name: string;
  maxBufferBytes: number;
  maxWorkgroupInvocations: number;
}

export interface GpuMatmulResult {
  result: Float32Array;
  timing: GpuMatmulTiming;
}

function webgpu(): GPU | undefined {
  return (globalThis as { navigator?: { gpu?: GPU } }).navigator?.gpu;
}

/** Describe the best available adapter; absence is a value, not an error. */
export async function probeDevice(): Promise<GpuDeviceSummary> {
  try {
    const gpu = webgpu();
    if (gpu === undefined) {
      return unavailable();
    }
    const adapter = await gpu.requestAdapter({
      powerPreference: "high-performance",
    });
    if (adapter === null) {
      return unavailable();
    }
    const info = adapter.info;
    return {
      available: true,
      name: info?.device || info?.description || info?.vendor || "GPU",
      maxBufferBytes: adapter.limits.maxBufferSize,
      maxWorkgroupInvocations: adapter.limits.maxComputeInvocationsPerWorkgroup,
    };
  } catch {
    return unavailable();
  }
}

function unavailable(): GpuDeviceSummary {
  return {
    available: false,
    name: "",
    maxBufferBytes: 0,
    maxWorkgroupInvocations: 0,
  };
}

export class MatmulGpuContext {
  private constructor(
    readonly device: GPUDevice,
    private readonly pipelines: Record<KernelVariantName, GPUComputePipeline>,
    private readonly hasTimestamps: boolean,
  ) {}

  /**
   * Compile and validate both kernels up front.  Pass an existing device,
   * or let the context acquire one (throws when WebGPU is unavailable).
   */
  static async create(
    sources: ShaderSources,
    device?: GPUDevice,
  ): Promise<MatmulGpuContext> {
    validateShaderSource(sources.naive, "naive");
    validateShaderSource(sources.tiled, "tiled");
    let hasTimestamps = false;
    if (device === undefined) {
      const gpu = webgpu();
      if (gpu === undefined) {
        throw new Error("WebGPU is not available in this environment");
      }
      const adapter = await gpu.requestAdapter({
        powerPreference: "high-performance",
      });
      if (adapter === null) {
        throw new Error("no WebGPU adapter found");
      }
      hasTimestamps = adapter.features.has("timestamp-query");
      device = await adapter.requestDevice({
        requiredFeatures: hasTimestamps ? ["timestamp-query"] : [],
      });
    } else {
      hasTimestamps = device.features.has("timestamp-query");
    }
    const pipelines = {} as Record<KernelVariantName, GPUComputePipeline>;
    for (const [variant, code] of Object.entries(sources) as Array<
      [KernelVariantName, string]
    >) {
      const module = device.createShaderModule({ code });
      pipelines[variant] = await device.createComputePipelineAsync({
        layout: "auto",
        compute: { module, entryPoint: "main" },
      });
    }
    return new MatmulGpuContext(device, pipelines, hasTimestamps);
  }

  destroy(): void {
    this.device.destroy();
  }

  async matmul(
    a: Float32Array,
    b: Float32Array,
    n: number,
    variant: KernelVariantName = "tiled",
    scope: TimingScopeName = "transfers-kernel",
  ): Promise<GpuMatmulResult> {
    if (a.length !== n * n || b.length !== n * n) {
      throw new RangeError(
        `buffers must hold ${n * n} elements, got ${a.length} and ${b.length}`,
      );
    }
    const device = this.device;
    const bytes = n * n * 4;

    const tAlloc0 = performance.now();
    const aBuf = device.createBuffer({
      size: bytes,
      usage: GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_DST,
    });
    const bBuf = device.createBuffer({
      size: bytes,
      usage: GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_DST,
    });
    const cBuf = device.createBuffer({
      size: bytes,
      usage: GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_SRC,
    });
    const paramsBuf = device.createBuffer({
      size: 16,
      usage: GPUBufferUsage.UNIFORM | GPUBufferUsage.COPY_DST,
    });
    const staging = device.createBuffer({
      size: bytes,
      usage: GPUBufferUsage.MAP_READ | GPUBufferUsage.COPY_DST,
    });
    const tAlloc1 = performance.now();

    let querySet: GPUQuerySet | null = null;
    let queryResolve: GPUBuffer | null = null;
    let queryStaging: GPUBuffer | null = null;
    if (this.hasTimestamps) {
      querySet = device.createQuerySet({ type: "timestamp", count: 2 });
      queryResolve = device.createBuffer({
        size: 16,
        usage: GPUBufferUsage.QUERY_RESOLVE | GPUBufferUsage.COPY_SRC,
      });
      queryStaging = device.createBuffer({
        size: 16,
        usage: GPUBufferUsage.MAP_READ | GPUBufferUsage.COPY_DST,
      });
    }

    try {
      const tH2d0 = performance.now();
      device.queue.writeBuffer(paramsBuf, 0, new Uint32Array([n, 0, 0, 0]));
      device.queue.writeBuffer(aBuf, 0, a.buffer, a.byteOffset, a.byteLength);
      device.queue.writeBuffer(bBuf, 0, b.buffer, b.byteOffset, b.byteLength);
      const tH2d1 = performance.now();

      const pipeline = this.pipelines[variant];
      const bindGroup = device.createBindGroup({
        layout: pipeline.getBindGroupLayout(0),
        entries: [
          { binding: 0, resource: { buffer: aBuf } },
          { binding: 1, resource: { buffer: bBuf } },
          { binding: 2, resource: { buffer: cBuf } },
          { binding: 3, resource: { buffer: paramsBuf } },
        ],
      });

      const submitDispatch = () => {
        const encoder = device.createCommandEncoder();
        const pass = encoder.beginComputePass(
          querySet !== null
            ? {
                timestampWrites: {
                  querySet,
                  beginningOfPassWriteIndex: 0,
                  endOfPassWriteIndex: 1,
                },
              }
            : {},
        );
        pass.setPipeline(pipeline);
        pass.setBindGroup(0, bindGroup);
        const groups = workgroupGrid(n);
        pass.dispatchWorkgroups(groups, groups, 1);
        pass.end();
        if (querySet !== null && queryResolve !== null) {
          encoder.resolveQuerySet(querySet, 0, 2, queryResolve, 0);
        }
        device.queue.submit([encoder.finish()]);
      };

      const readback = async (): Promise<Float32Array> => {
        const encoder = device.createCommandEncoder();
        encoder.copyBufferToBuffer(cBuf, 0, staging, 0, bytes);
        if (queryResolve !== null && queryStaging !== null) {
          encoder.copyBufferToBuffer(queryResolve, 0, queryStaging, 0, 16);
        }
        device.queue.submit([encoder.finish()]);
        await staging.mapAsync(GPUMapMode.READ);
        const view = new Float32Array(staging.getMappedRange().slice(0));
        staging.unmap();
        return view;
      };

      let totalMs: number;
      let d2hMs: number;
      let kernelMs: number | null = null;
      let result: Float32Array;

      if (scope === "kernel-only") {
        await device.queue.onSubmittedWorkDone();
        const tK0 = performance.now();
        submitDispatch();
        await device.queue.onSubmittedWorkDone();
        const tK1 = performance.now();
        totalMs = tK1 - tK0;
        const tD0 = performance.now();
        result = await readback();
        d2hMs = performance.now() - tD0;
        kernelMs = totalMs;
      } else {
        submitDispatch();
        const tD0 = performance.now();
        result = await readback();
        const tD1 = performance.now();
        d2hMs = tD1 - tD0;
        const start = scope === "alloc-transfers-kernel" ? tAlloc0 : tH2d0;
        totalMs = tD1 - start;
      }

      if (queryStaging !== null) {
        try {
          await queryStaging.mapAsync(GPUMapMode.READ);
          const stamps = new BigUint64Array(
            queryStaging.getMappedRange().slice(0),
          );
          queryStaging.unmap();
          kernelMs = Number(stamps[1] - stamps[0]) / 1e6;
        } catch {
          // leave kernelMs as computed so far
        }
      }

      return {
        result,
        timing: {
          allocMs: tAlloc1 - tAlloc0,
          h2dMs: tH2d1 - tH2d0,
          d2hMs,
          totalMs,
          kernelMs,
        },
      };
    } finally {
      aBuf.destroy();
      bBuf.destroy();
      cBuf.destroy();
      paramsBuf.destroy();
      staging.destroy();
      querySet?.destroy();
      queryResolve?.destroy();
      queryStaging?.destroy();
    }
  }
}

export { TILE, workgroupGrid };
export type { KernelVariantName, ShaderSources };
