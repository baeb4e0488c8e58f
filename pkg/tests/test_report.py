import json

import pytest

from gemmlab.harness import (
    Backend,
    Measurement,
    STATUS_OK,
    SpeedupRow,
    SpeedupTable,
    BenchmarkPlan,
    compute_speedups,
)
from gemmlab.report import (
    CSV_HEADER,
    CsvFormatError,
    EmptyTableError,
    FIGURE_FILENAMES,
    InsufficientDataError,
    RESULTS_SCHEMA_VERSION,
    ReportBundle,
    build_figures,
    build_report_bundle,
    emit_csv,
    emit_figures,
    parse_csv,
    render_table,
    results_to_json,
)

# Reference sweep used as a pure formatting/arithmetic fixture (timing
# columns in ms).
REFERENCE_TIMINGS = (
    (128, 2.18, 7.10, 0.26),
    (256, 20.70, 2.89, 0.40),
    (512, 264.37, 19.43, 2.10),
    (1024, 3721.52, 295.86, 13.35),
    (2048, 44691.46, 3554.41, 124.01),
    (3072, 171811.07, 11998.88, 332.69),
    (4096, 393280.52, 30332.07, 663.24),
)


def ok_cell(backend, n, median):
    return Measurement(backend=backend, n=n, status=STATUS_OK,
                       times_ms=(median,), median_ms=median, min_ms=median)


def reference_table() -> SpeedupTable:
    cells = []
    for n, seq, par, gpu in REFERENCE_TIMINGS:
        cells.append(ok_cell(Backend.SEQUENTIAL, n, seq))
        cells.append(ok_cell(Backend.PARALLEL_CPU, n, par))
        cells.append(ok_cell(Backend.GPU_TILED, n, gpu))
    return compute_speedups(cells)


class TestEmitCsv:
    def test_header_is_byte_exact(self):
        assert CSV_HEADER == (
            "Matrix_Size,Sequential_CPU_ms,Parallel_CPU_ms,Parallel_GPU_ms,"
            "Speedup_CPU_vs_Seq,Speedup_GPU_vs_CPU,Speedup_GPU_vs_Seq"
        )
        assert emit_csv(reference_table()).splitlines()[0] == CSV_HEADER

    def test_largest_reference_row_formatting(self):
        line = emit_csv(reference_table()).splitlines()[-1]
        assert line == ("4096x4096,393280.5200,30332.0700,663.2400,"
                        "12.97x,45.73x,592.97x")

    def test_equal_times_render_unit_speedup(self):
        table = compute_speedups([
            ok_cell(Backend.SEQUENTIAL, 64, 5.0),
            ok_cell(Backend.PARALLEL_CPU, 64, 5.0),
        ])
        line = emit_csv(table).splitlines()[1]
        assert line == "64x64,5.0000,5.0000,NA,1.00x,NA,NA"

    def test_skipped_gpu_renders_na(self):
        table = compute_speedups([
            ok_cell(Backend.SEQUENTIAL, 64, 4.0),
            ok_cell(Backend.PARALLEL_CPU, 64, 2.0),
        ])
        line = emit_csv(table).splitlines()[1]
        assert line.endswith(",NA,2.00x,NA,NA")

    def test_empty_table_rejected(self):
        with pytest.raises(EmptyTableError):
            emit_csv(SpeedupTable(rows=()))


class TestParseCsv:
    def test_round_trip_preserves_reported_precision(self):
        text = emit_csv(reference_table())
        assert emit_csv(parse_csv(text)) == text

    def test_na_round_trip(self):
        row = SpeedupRow(n=32, seq_ms=1.5)
        text = emit_csv(SpeedupTable(rows=(row,)))
        parsed = parse_csv(text).rows[0]
        assert parsed.seq_ms == 1.5
        assert parsed.gpu_ms is None
        assert parsed.speedup_gpu_vs_seq is None

    def test_header_mismatch_cites_expected_header(self):
        with pytest.raises(CsvFormatError) as err:
            parse_csv("Size,Stuff\n1x1,2\n")
        assert "line 1" in str(err.value)
        assert CSV_HEADER in str(err.value)

    def test_bad_row_names_line_number(self):
        text = emit_csv(reference_table()) + "oops\n"
        with pytest.raises(CsvFormatError) as err:
            parse_csv(text)
        assert "line 9" in str(err.value)

    def test_non_square_size_rejected(self):
        text = CSV_HEADER + "\n128x256,1.0000,NA,NA,NA,NA,NA\n"
        with pytest.raises(CsvFormatError) as err:
            parse_csv(text)
        assert "line 2" in str(err.value)

    def test_speedup_requires_x_suffix(self):
        text = CSV_HEADER + "\n16x16,1.0000,1.0000,NA,1.00,NA,NA\n"
        with pytest.raises(CsvFormatError) as err:
            parse_csv(text)
        assert "'x'" in str(err.value)

    def test_empty_input_rejected(self):
        with pytest.raises(CsvFormatError):
            parse_csv("")


class TestRenderTable:
    def test_contains_all_columns_and_rows(self):
        text = render_table(reference_table())
        lines = text.splitlines()
        assert lines[0].startswith("Matrix Size")
        assert "GPU vs Seq" in lines[0]
        assert len(lines) == 2 + len(REFERENCE_TIMINGS)
        assert "4096x4096" in lines[-1]
        assert "592.97x" in lines[-1]

    def test_columns_align(self):
        text = render_table(reference_table())
        lines = text.splitlines()
        sep_width = len(lines[1])
        assert all(len(line) <= sep_width for line in lines)

    def test_empty_table_rejected(self):
        with pytest.raises(EmptyTableError):
            render_table(SpeedupTable(rows=()))


class TestFigures:
    def test_three_deterministic_figures(self, tmp_path):
        table = reference_table()
        first = emit_figures(table, tmp_path / "a")
        second = emit_figures(table, tmp_path / "b")
        assert [p.name for p in first] == list(FIGURE_FILENAMES)
        for p1, p2 in zip(first, second):
            assert p1.read_bytes() == p2.read_bytes()

    def test_figures_match_after_csv_round_trip(self):
        table = reference_table()
        rebuilt = parse_csv(emit_csv(table))
        assert build_figures(table) == build_figures(rebuilt)

    def test_single_row_is_insufficient(self):
        table = SpeedupTable(rows=(SpeedupRow(n=8, seq_ms=1.0),))
        with pytest.raises(InsufficientDataError):
            build_figures(table)

    def test_sub_unit_speedup_bar_renders_below_one_gridline(self):
        figures = build_figures(reference_table())
        svg = figures[FIGURE_FILENAMES[1]]
        assert ">1<" in svg  # the 1.0 decade gridline label
        assert "nan" not in svg and "inf" not in svg
        assert svg.count("<rect") > 3  # background + legend + bars

    def test_overlapping_series_no_crash(self):
        rows = (
            SpeedupRow(n=16, seq_ms=2.0, par_cpu_ms=2.0,
                       speedup_cpu_vs_seq=1.0),
            SpeedupRow(n=32, seq_ms=8.0, par_cpu_ms=8.0,
                       speedup_cpu_vs_seq=1.0),
        )
        figures = build_figures(SpeedupTable(rows=rows))
        assert set(figures) == set(FIGURE_FILENAMES)

    def test_absent_gpu_series_is_omitted_from_legend(self):
        rows = (
            SpeedupRow(n=16, seq_ms=2.0, par_cpu_ms=1.0,
                       speedup_cpu_vs_seq=2.0),
            SpeedupRow(n=32, seq_ms=9.0, par_cpu_ms=3.0,
                       speedup_cpu_vs_seq=3.0),
        )
        svg = build_figures(SpeedupTable(rows=rows))[FIGURE_FILENAMES[0]]
        assert "Sequential CPU" in svg
        assert ">GPU<" not in svg

    def test_axis_labels_and_titles_present(self):
        figures = build_figures(reference_table())
        assert "Execution time vs matrix size" in figures[FIGURE_FILENAMES[0]]
        assert "Matrix size (N)" in figures[FIGURE_FILENAMES[0]]
        assert "Execution time (ms)" in figures[FIGURE_FILENAMES[0]]
        assert "Speedup over the sequential baseline" in \
            figures[FIGURE_FILENAMES[1]]
        assert "GPU advantage over the parallel CPU" in \
            figures[FIGURE_FILENAMES[2]]


class TestReportBundle:
    def test_bundle_collects_all_artifacts(self, tmp_path):
        bundle = build_report_bundle(reference_table(),
                                     figures_dir=tmp_path / "figs")
        assert bundle.csv_text.startswith(CSV_HEADER + "\n")
        assert "4096x4096" in bundle.table_text
        assert [p.name for p in bundle.figure_paths] == list(FIGURE_FILENAMES)
        assert all(p.exists() for p in bundle.figure_paths)

    def test_bundle_without_figures(self):
        bundle = build_report_bundle(reference_table())
        assert bundle.figure_paths == ()
        assert bundle.csv_text == emit_csv(reference_table())

    def test_bundle_rejects_foreign_csv(self):
        with pytest.raises(ValueError):
            ReportBundle(csv_text="Size,Other\n", table_text="")

    def test_figures_declare_svg_version(self):
        svg = build_figures(reference_table())[FIGURE_FILENAMES[0]]
        assert 'version="1.1"' in svg
        assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')


class TestResultsJson:
    def test_schema_and_content(self):
        plan = BenchmarkPlan(sizes=(16, 32),
                             backends=(Backend.SEQUENTIAL,
                                       Backend.PARALLEL_CPU),
                             repetitions=1)
        cells = [
            ok_cell(Backend.SEQUENTIAL, 16, 1.0),
            ok_cell(Backend.PARALLEL_CPU, 16, 0.5),
        ]
        table = compute_speedups(cells)
        doc = json.loads(results_to_json(plan, cells, table))
        assert doc["schema_version"] == RESULTS_SCHEMA_VERSION
        assert doc["plan"]["sizes"] == [16, 32]
        assert doc["plan"]["backends"] == ["seq", "cpu"]
        assert len(doc["measurements"]) == 2
        assert doc["measurements"][0]["backend"] == "seq"
        assert doc["table"][0]["speedup_cpu_vs_seq"] == 2.0
