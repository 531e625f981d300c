//! Synthetic benchmark: problem generation, batching into supergraph tasks,
//! runs under each scheduling policy, and reports.

mod bench;
mod config;
mod generate;
mod overlap;
mod problemfile;
mod report;

pub use bench::{
    build_tasks, count_mismatches, default_executor, run_benchmark, run_set, sequential_reference, verify_report,
    BenchError, TaskBatch,
};
pub use config::{round_half_up, BatchMode, BenchConfig, ConfigError, WorkerSpec, WORKERS_ENV};
pub use generate::{
    build_problem, generate, generate_image, generate_problems, seed_grid, GenError, SyntheticImage, SyntheticProblem,
    SyntheticSet,
};
pub use overlap::{overlap, OverlapError};
pub use problemfile::{
    decode_problems, encode_problem, read_problem_set, write_problem_set, ProblemDescriptor, ProblemEntry,
    ProblemFileError, BIN_NAME, JSON_NAME,
};
pub use report::{
    export_report, read_records, resummarize, summarize, write_records, write_summary, OverlapScore, ReportError,
    RunReport, SummaryRow, TaskRecord, RECORDS_NAME, REPORT_SCHEMA, RUN_NAME, SUMMARY_HEADER, SUMMARY_NAME,
};
