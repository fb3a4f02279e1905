from .config import ConfigError, ExperimentConfig, MethodSpec, Schedule, load_config, load_preset
from .experiments import bench_products, run_approx_error, run_diagnose, run_tradeoff
from .records import (
    BenchRecord,
    DiagnosticRecord,
    ExperimentRecord,
    derive_seed,
    emit_csv,
    read_csv,
)
