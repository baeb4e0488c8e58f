"""Command-line entry point.

Subcommands: ``bench`` runs a sweep and writes the canonical CSV (plus
optional figures and a JSON dump), ``verify`` checks every available backend
against the sequential oracle, ``plot`` regenerates figures from a saved
CSV, and ``devices`` prints the detected GPU.

Exit codes: 0 success, 1 verification/data failure, 2 usage error.
Diagnostics go to stderr; data goes to stdout when ``--output -``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import compare, matmul_sequential, random_matrix, bitwise_equal
from .cpu_parallel import CpuParallelConfig, matmul_parallel_cpu
from .gpu_host import (
    KernelVariant,
    TimingScope,
    matmul_gpu,
    open_device,
    probe_device,
)
from .harness import (
    Backend,
    BenchmarkPlan,
    ConfigError,
    GPU_VERIFY_REL_TOL,
    STATUS_FAILED,
    STATUS_SKIPPED,
    compute_speedups,
    run_plan,
)
from .report import (
    CsvFormatError,
    EmptyTableError,
    InsufficientDataError,
    build_report_bundle,
    emit_figures,
    parse_csv,
    results_to_json,
)

log = logging.getLogger("gemmlab")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_BENCH_SIZES = "128:4096:x2,3072"
DEFAULT_VERIFY_SIZES = "64,128,256,257"

_BACKEND_NAMES = {b.value: b for b in Backend}


def parse_sizes(spec: str) -> tuple[int, ...]:
    """Parse a sizes flag: comma list of integers and lo:hi:xF ranges.

    ``128:4096:x2`` expands to 128, 256, ..., 4096; items are merged,
    deduplicated, and sorted ascending.
    """
    sizes: set[int] = set()
    for item in spec.split(","):
        item = item.strip()
        if not item:
            raise argparse.ArgumentTypeError(f"empty size item in {spec!r}")
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3 or not parts[2].startswith("x"):
                raise argparse.ArgumentTypeError(
                    f"range must look like 128:4096:x2, got {item!r}"
                )
            try:
                lo, hi, factor = int(parts[0]), int(parts[1]), int(parts[2][1:])
            except ValueError:
                raise argparse.ArgumentTypeError(
                    f"range must use integers, got {item!r}"
                ) from None
            if lo < 1 or hi < lo or factor < 2:
                raise argparse.ArgumentTypeError(
                    f"range needs 1 <= lo <= hi and factor >= 2, got {item!r}"
                )
            n = lo
            while n <= hi:
                sizes.add(n)
                n *= factor
        else:
            try:
                n = int(item)
            except ValueError:
                raise argparse.ArgumentTypeError(
                    f"size must be an integer, got {item!r}"
                ) from None
            if n < 1:
                raise argparse.ArgumentTypeError(f"size must be >= 1, got {n}")
            sizes.add(n)
    return tuple(sorted(sizes))


def parse_backends(spec: str) -> tuple[Backend, ...]:
    backends = []
    for item in spec.split(","):
        item = item.strip()
        if item not in _BACKEND_NAMES:
            raise argparse.ArgumentTypeError(
                f"unknown backend {item!r}; choose from "
                f"{', '.join(_BACKEND_NAMES)}"
            )
        backend = _BACKEND_NAMES[item]
        if backend in backends:
            raise argparse.ArgumentTypeError(f"duplicate backend {item!r}")
        backends.append(backend)
    if not backends:
        raise argparse.ArgumentTypeError("at least one backend required")
    return tuple(backends)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gemmlab",
        description="Dense matrix-multiplication performance laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser(
        "bench", help="run a benchmark sweep and emit the results CSV",
    )
    bench.add_argument("--sizes", type=parse_sizes,
                       default=parse_sizes(DEFAULT_BENCH_SIZES),
                       metavar="SPEC",
                       help="comma list of sizes and lo:hi:xF ranges "
                            f"(default: {DEFAULT_BENCH_SIZES})")
    bench.add_argument("--seed", type=int, default=42,
                       help="seed for input matrices; B uses seed+1 "
                            "(default: 42)")
    bench.add_argument("--reps", type=int, default=3,
                       help="timed repetitions per cell, median reported "
                            "(default: 3)")
    bench.add_argument("--warmup", type=int, default=1,
                       help="untimed warmup runs per cell (default: 1)")
    bench.add_argument("--backends", type=parse_backends,
                       default=parse_backends("seq,cpu,gpu-tiled"),
                       metavar="LIST",
                       help="comma list from: seq, cpu, gpu-naive, gpu-tiled "
                            "(default: seq,cpu,gpu-tiled)")
    bench.add_argument("--timing-scope",
                       choices=[s.value for s in TimingScope],
                       default=TimingScope.TRANSFERS_AND_KERNEL.value,
                       help="which phases the GPU total includes "
                            "(default: transfers-kernel)")
    bench.add_argument("--max-seq-size", type=int, default=None,
                       metavar="N",
                       help="skip the sequential backend above this size "
                            "(default: no cap)")
    bench.add_argument("--verify-cap", type=int, default=1024, metavar="N",
                       help="verify results against the oracle up to this "
                            "size (default: 1024)")
    bench.add_argument("--threads", type=int, default=None, metavar="T",
                       help="parallel-CPU worker threads "
                            "(default: GEMMLAB_THREADS or hardware count)")
    bench.add_argument("--output", default="-", metavar="PATH",
                       help="CSV destination, '-' for stdout (default: -)")
    bench.add_argument("--figures", default=None, metavar="DIR",
                       help="also write the three SVG figures here "
                            "(default: no figures)")
    bench.add_argument("--results", default=None, metavar="PATH",
                       help="also write a JSON results dump here "
                            "(default: no dump)")
    bench.add_argument("--table", action="store_true",
                       help="print the aligned text table to stderr "
                            "(default: off)")

    verify = sub.add_parser(
        "verify", help="check every available backend against the oracle",
    )
    verify.add_argument("--sizes", type=parse_sizes,
                        default=parse_sizes(DEFAULT_VERIFY_SIZES),
                        metavar="SPEC",
                        help="sizes to verify "
                             f"(default: {DEFAULT_VERIFY_SIZES})")
    verify.add_argument("--seed", type=int, default=42,
                        help="seed for input matrices; B uses seed+1 "
                             "(default: 42)")
    verify.add_argument("--threads", type=int, default=None, metavar="T",
                        help="parallel-CPU worker threads "
                             "(default: GEMMLAB_THREADS or hardware count)")

    plot = sub.add_parser(
        "plot", help="regenerate the figures from a saved results CSV",
    )
    plot.add_argument("--input", required=True, metavar="CSV",
                      help="results CSV produced by 'bench'")
    plot.add_argument("--out-dir", default=".", metavar="DIR",
                      help="directory for the three SVG figures "
                           "(default: current directory)")

    sub.add_parser("devices", help="print the detected GPU compute device")
    return parser


def _cmd_bench(args) -> int:
    try:
        plan = BenchmarkPlan(
            sizes=args.sizes,
            seed=args.seed,
            repetitions=args.reps,
            warmup_runs=args.warmup,
            backends=args.backends,
            timing_scope=TimingScope(args.timing_scope),
            max_sequential_size=args.max_seq_size,
            verify_cap=args.verify_cap,
            cpu=CpuParallelConfig(workers=args.threads),
        )
    except (ConfigError, ValueError) as exc:
        print(f"gemmlab bench: {exc}", file=sys.stderr)
        return EXIT_USAGE

    measurements = run_plan(plan)
    table = compute_speedups(measurements)
    bundle = build_report_bundle(table)

    if args.output == "-":
        sys.stdout.write(bundle.csv_text)
    else:
        Path(args.output).write_text(bundle.csv_text, encoding="utf-8")
        log.info("wrote %s", args.output)
    if args.table:
        sys.stderr.write(bundle.table_text)
    if args.results:
        Path(args.results).write_text(
            results_to_json(plan, measurements, table), encoding="utf-8")
        log.info("wrote %s", args.results)
    if args.figures:
        try:
            for path in emit_figures(table, args.figures):
                log.info("wrote %s", path)
        except InsufficientDataError as exc:
            print(f"gemmlab bench: {exc}", file=sys.stderr)
            return EXIT_FAILURE

    failed = [m for m in measurements if m.status == STATUS_FAILED]
    for m in measurements:
        if m.status == STATUS_SKIPPED:
            log.warning("skipped %s at n=%d: %s", m.backend.value, m.n,
                        m.detail)
    if failed:
        for m in failed:
            print(f"gemmlab bench: {m.backend.value} failed at n={m.n}: "
                  f"{m.detail}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_verify(args) -> int:
    cpu_cfg = CpuParallelConfig(workers=args.threads)
    device = open_device()
    checks: list[tuple[str, str]] = [
        (Backend.SEQUENTIAL.value, "available"),
        (Backend.PARALLEL_CPU.value, "available"),
        (Backend.GPU_NAIVE.value, "available" if device else "no device"),
        (Backend.GPU_TILED.value, "available" if device else "no device"),
    ]
    print("backend availability: " +
          ", ".join(f"{name} ({state})" for name, state in checks),
          file=sys.stderr)

    all_pass = True
    print(f"{'size':>6}  {'backend':<10}  result")
    for n in args.sizes:
        a = random_matrix(n, args.seed)
        b = random_matrix(n, args.seed + 1)
        oracle = matmul_sequential(a, b)

        rows: list[tuple[str, bool | None, str]] = []
        par = matmul_parallel_cpu(a, b, cpu_cfg)
        if bitwise_equal(par, oracle):
            rows.append((Backend.PARALLEL_CPU.value, True, "bitwise"))
        else:
            report = compare(oracle, par)
            rows.append((
                Backend.PARALLEL_CPU.value, False,
                f"max_abs_diff={report.max_abs_diff:g} at "
                f"{report.worst_index}",
            ))
        for backend, variant in (
            (Backend.GPU_NAIVE, KernelVariant.NAIVE),
            (Backend.GPU_TILED, KernelVariant.TILED),
        ):
            if device is None:
                rows.append((backend.value, None, "no GPU device"))
                continue
            result, _ = matmul_gpu(a, b, variant=variant, device=device)
            report = compare(oracle, result)
            ok = report.max_rel_diff <= GPU_VERIFY_REL_TOL
            detail = (f"max_rel_diff={report.max_rel_diff:.2e} "
                      f"(tol {GPU_VERIFY_REL_TOL:g})")
            if not ok:
                detail += (f", worst at {report.worst_index}, "
                           f"max_abs_diff={report.max_abs_diff:g}")
            rows.append((backend.value, ok, detail))

        print(f"{n:>6}  {Backend.SEQUENTIAL.value:<10}  PASS (oracle)")
        for name, ok, detail in rows:
            verdict = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
            print(f"{n:>6}  {name:<10}  {verdict} ({detail})")
            if ok is False:
                all_pass = False
    return EXIT_OK if all_pass else EXIT_FAILURE


def _cmd_plot(args) -> int:
    path = Path(args.input)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"gemmlab plot: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        table = parse_csv(text)
        paths = emit_figures(table, args.out_dir)
    except (CsvFormatError, EmptyTableError, InsufficientDataError) as exc:
        print(f"gemmlab plot: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for p in paths:
        print(p)
    return EXIT_OK


def _cmd_devices(_args) -> int:
    info = probe_device()
    if not info.available:
        print("no GPU device")
    else:
        print(f"name: {info.name}")
        print(f"dedicated memory bytes: {info.dedicated_memory_bytes}")
        print(f"max workgroup size: {info.max_workgroup_size}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "bench": _cmd_bench,
        "verify": _cmd_verify,
        "plot": _cmd_plot,
        "devices": _cmd_devices,
    }
    try:
        return handlers[args.command](args)
    except OSError as exc:
        print(f"gemmlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
