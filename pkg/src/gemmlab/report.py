"""Report emission: canonical CSV, aligned text table, and SVG figures.

The CSV header and cell formats are fixed: sizes render as ``NxN``, times
with exactly four decimals, speedups with exactly two decimals and a
trailing ``x``, absent cells as ``NA``.  Figures are always rendered from
CSV-precision values, so plotting from an in-memory table and re-plotting
from the saved CSV produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .harness import BenchmarkPlan, Measurement, SpeedupRow, SpeedupTable
from .svgchart import render_bar_chart, render_line_chart

CSV_HEADER = (
    "Matrix_Size,Sequential_CPU_ms,Parallel_CPU_ms,Parallel_GPU_ms,"
    "Speedup_CPU_vs_Seq,Speedup_GPU_vs_CPU,Speedup_GPU_vs_Seq"
)

RESULTS_SCHEMA_VERSION = 1

FIGURE_FILENAMES = (
    "execution_time.svg",
    "speedup_vs_sequential.svg",
    "gpu_vs_cpu_speedup.svg",
)


class EmptyTableError(ValueError):
    """The speedup table has no rows to report."""


class InsufficientDataError(ValueError):
    """Figures need at least two rows."""


class CsvFormatError(ValueError):
    """A results CSV does not match the canonical format."""


@dataclasses.dataclass(frozen=True)
class ReportBundle:
    """All report artifacts for one sweep: CSV text, aligned table text,
    and the figure files written (empty when figures were not requested)."""

    csv_text: str
    table_text: str
    figure_paths: tuple[Path, ...] = ()

    def __post_init__(self):
        if not self.csv_text.startswith(CSV_HEADER + "\n"):
            raise ValueError("csv_text must begin with the canonical header")
        object.__setattr__(self, "figure_paths", tuple(self.figure_paths))


def _fmt_ms(value: float | None) -> str:
    return "NA" if value is None else f"{value:.4f}"


def _fmt_speedup(value: float | None) -> str:
    return "NA" if value is None else f"{value:.2f}x"


def emit_csv(table: SpeedupTable) -> str:
    """Canonical CSV text for a speedup table (header always included)."""
    if not table.rows:
        raise EmptyTableError("cannot emit CSV for an empty table")
    lines = [CSV_HEADER]
    for row in table.rows:
        lines.append(
            f"{row.n}x{row.n},"
            f"{_fmt_ms(row.seq_ms)},{_fmt_ms(row.par_cpu_ms)},"
            f"{_fmt_ms(row.gpu_ms)},"
            f"{_fmt_speedup(row.speedup_cpu_vs_seq)},"
            f"{_fmt_speedup(row.speedup_gpu_vs_cpu)},"
            f"{_fmt_speedup(row.speedup_gpu_vs_seq)}"
        )
    return "\n".join(lines) + "\n"


def _parse_ms(field: str, line_no: int, column: str) -> float | None:
    if field == "NA":
        return None
    try:
        return float(field)
    except ValueError:
        raise CsvFormatError(
            f"line {line_no}: {column} must be a number or NA, got {field!r}"
        ) from None


def _parse_speedup(field: str, line_no: int, column: str) -> float | None:
    if field == "NA":
        return None
    if not field.endswith("x"):
        raise CsvFormatError(
            f"line {line_no}: {column} must end with 'x', got {field!r}"
        )
    try:
        return float(field[:-1])
    except ValueError:
        raise CsvFormatError(
            f"line {line_no}: {column} must be a number with an 'x' suffix, "
            f"got {field!r}"
        ) from None


def parse_csv(text: str) -> SpeedupTable:
    """Parse canonical CSV text back into a SpeedupTable.

    Raises CsvFormatError naming the offending line; the header must be
    byte-identical to the canonical one.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise CsvFormatError("line 1: empty input, expected header "
                             f"{CSV_HEADER!r}")
    if lines[0] != CSV_HEADER:
        raise CsvFormatError(
            f"line 1: header mismatch, expected {CSV_HEADER!r}"
        )
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 7:
            raise CsvFormatError(
                f"line {line_no}: expected 7 fields, got {len(fields)}"
            )
        size = fields[0].split("x")
        if len(size) != 2 or size[0] != size[1] or not size[0].isdigit():
            raise CsvFormatError(
                f"line {line_no}: matrix size must look like '128x128', "
                f"got {fields[0]!r}"
            )
        n = int(size[0])
        if n < 1:
            raise CsvFormatError(f"line {line_no}: matrix size must be >= 1")
        rows.append(SpeedupRow(
            n=n,
            seq_ms=_parse_ms(fields[1], line_no, "Sequential_CPU_ms"),
            par_cpu_ms=_parse_ms(fields[2], line_no, "Parallel_CPU_ms"),
            gpu_ms=_parse_ms(fields[3], line_no, "Parallel_GPU_ms"),
            speedup_cpu_vs_seq=_parse_speedup(
                fields[4], line_no, "Speedup_CPU_vs_Seq"),
            speedup_gpu_vs_cpu=_parse_speedup(
                fields[5], line_no, "Speedup_GPU_vs_CPU"),
            speedup_gpu_vs_seq=_parse_speedup(
                fields[6], line_no, "Speedup_GPU_vs_Seq"),
        ))
    return SpeedupTable(rows=tuple(rows))


_TABLE_COLUMNS = (
    ("Matrix Size", lambda r: f"{r.n}x{r.n}"),
    ("Seq CPU (ms)", lambda r: _fmt_ms(r.seq_ms)),
    ("Par CPU (ms)", lambda r: _fmt_ms(r.par_cpu_ms)),
    ("GPU (ms)", lambda r: _fmt_ms(r.gpu_ms)),
    ("CPU vs Seq", lambda r: _fmt_speedup(r.speedup_cpu_vs_seq)),
    ("GPU vs CPU", lambda r: _fmt_speedup(r.speedup_gpu_vs_cpu)),
    ("GPU vs Seq", lambda r: _fmt_speedup(r.speedup_gpu_vs_seq)),
)


def render_table(table: SpeedupTable) -> str:
    """Fixed-width human-readable rendering of the same seven columns."""
    if not table.rows:
        raise EmptyTableError("cannot render an empty table")
    headers = [name for name, _ in _TABLE_COLUMNS]
    body = [[fmt(row) for _, fmt in _TABLE_COLUMNS] for row in table.rows]
    widths = [
        max(len(headers[c]), *(len(line[c]) for line in body))
        for c in range(len(headers))
    ]
    def fmt_line(cells, pad):
        first = cells[0].ljust(widths[0])
        rest = [cells[c].rjust(widths[c]) for c in range(1, len(cells))]
        return pad.join([first] + rest).rstrip()

    sep = "  ".join("-" * w for w in widths)
    lines = [fmt_line(headers, "  "), sep]
    lines.extend(fmt_line(row_cells, "  ") for row_cells in body)
    return "\n".join(lines) + "\n"


def _canonical(table: SpeedupTable) -> SpeedupTable:
    """Round-trip through the CSV format so figures use reported precision."""
    return parse_csv(emit_csv(table))


def build_figures(table: SpeedupTable) -> dict[str, str]:
    """The three report figures as SVG text, keyed by canonical filename."""
    if len(table.rows) < 2:
        raise InsufficientDataError(
            f"figures need at least 2 rows, got {len(table.rows)}"
        )
    rows = _canonical(table).rows
    labels = [str(r.n) for r in rows]

    time_series = [
        ("Sequential CPU", [r.seq_ms for r in rows]),
        ("Parallel CPU", [r.par_cpu_ms for r in rows]),
        ("GPU", [r.gpu_ms for r in rows]),
    ]
    speedup_series = [
        ("Parallel CPU vs sequential",
         [r.speedup_cpu_vs_seq for r in rows]),
        ("GPU vs sequential", [r.speedup_gpu_vs_seq for r in rows]),
    ]
    advantage_series = [
        ("GPU vs parallel CPU", [r.speedup_gpu_vs_cpu for r in rows]),
    ]
    return {
        FIGURE_FILENAMES[0]: render_line_chart(
            "Execution time vs matrix size", "Matrix size (N)",
            "Execution time (ms)", labels, time_series, log_y=True),
        FIGURE_FILENAMES[1]: render_bar_chart(
            "Speedup over the sequential baseline", "Matrix size (N)",
            "Speedup (x)", labels, speedup_series, log_y=True),
        FIGURE_FILENAMES[2]: render_line_chart(
            "GPU advantage over the parallel CPU", "Matrix size (N)",
            "Speedup (x)", labels, advantage_series, log_y=False),
    }


def emit_figures(table: SpeedupTable, out_dir) -> list[Path]:
    """Write the three SVG figures into out_dir and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for filename, svg in build_figures(table).items():
        path = out / filename
        path.write_text(svg, encoding="utf-8")
        paths.append(path)
    return paths


def build_report_bundle(table: SpeedupTable,
                        figures_dir=None) -> ReportBundle:
    """Assemble every report artifact; figures only when a directory is
    given."""
    figure_paths = emit_figures(table, figures_dir) if figures_dir else ()
    return ReportBundle(
        csv_text=emit_csv(table),
        table_text=render_table(table),
        figure_paths=tuple(figure_paths),
    )


def results_to_json(plan: BenchmarkPlan, measurements: list[Measurement],
                    table: SpeedupTable) -> str:
    """Machine-readable results dump (stable schema, versioned)."""
    doc = {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "plan": {
            "sizes": list(plan.sizes),
            "seed": plan.seed,
            "repetitions": plan.repetitions,
            "warmup_runs": plan.warmup_runs,
            "backends": [b.value for b in plan.backends],
            "timing_scope": plan.timing_scope.value,
            "max_sequential_size": plan.max_sequential_size,
            "verify_cap": plan.verify_cap,
            "cpu_workers": plan.cpu.workers,
            "cpu_chunk": plan.cpu.chunk,
            "cpu_schedule": plan.cpu.schedule,
        },
        "measurements": [
            {
                "backend": m.backend.value,
                "n": m.n,
                "status": m.status,
                "times_ms": list(m.times_ms),
                "median_ms": m.median_ms,
                "min_ms": m.min_ms,
                "verified": m.verified,
                "input_digest": m.input_digest,
                "detail": m.detail,
                "gpu_phases": (
                    dataclasses.asdict(m.gpu_phases)
                    if m.gpu_phases is not None else None
                ),
            }
            for m in measurements
        ],
        "table": [dataclasses.asdict(row) for row in table.rows],
    }
    return json.dumps(doc, indent=2) + "\n"
