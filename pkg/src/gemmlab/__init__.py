"""gemmlab: cross-backend dense matrix-multiplication performance lab."""

from .core import (
    ComparisonReport,
    InvalidDimensionError,
    Matrix,
    ShapeError,
    bitwise_equal,
    compare,
    identity_matrix,
    matmul_sequential,
    random_matrix,
    zero_matrix,
)
from .cpu_parallel import (
    CpuParallelConfig,
    InvalidConfigError,
    matmul_parallel_cpu,
)
from .gpu_host import (
    DeviceInfo,
    DeviceUnavailableError,
    GpuBackendError,
    GpuTiming,
    KernelVariant,
    OutOfDeviceMemoryError,
    TimingScope,
    matmul_gpu,
    probe_device,
)
from .harness import (
    Backend,
    BenchmarkPlan,
    ConfigError,
    Measurement,
    MeasurementCorruptError,
    SpeedupRow,
    SpeedupTable,
    compute_speedups,
    run_plan,
)
from .report import (
    CSV_HEADER,
    CsvFormatError,
    EmptyTableError,
    InsufficientDataError,
    ReportBundle,
    build_report_bundle,
    emit_csv,
    emit_figures,
    parse_csv,
    render_table,
    results_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BenchmarkPlan",
    "CSV_HEADER",
    "ComparisonReport",
    "ConfigError",
    "CpuParallelConfig",
    "CsvFormatError",
    "DeviceInfo",
    "DeviceUnavailableError",
    "EmptyTableError",
    "GpuBackendError",
    "GpuTiming",
    "InsufficientDataError",
    "InvalidConfigError",
    "InvalidDimensionError",
    "KernelVariant",
    "Matrix",
    "Measurement",
    "MeasurementCorruptError",
    "OutOfDeviceMemoryError",
    "ReportBundle",
    "ShapeError",
    "SpeedupRow",
    "SpeedupTable",
    "TimingScope",
    "bitwise_equal",
    "build_report_bundle",
    "compare",
    "compute_speedups",
    "emit_csv",
    "emit_figures",
    "identity_matrix",
    "matmul_gpu",
    "matmul_parallel_cpu",
    "matmul_sequential",
    "parse_csv",
    "probe_device",
    "random_matrix",
    "render_table",
    "results_to_json",
    "run_plan",
    "zero_matrix",
]
