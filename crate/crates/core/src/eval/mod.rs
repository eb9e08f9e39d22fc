//! Scenario files, in-memory experiment pipelines and the CLI commands.
//!
//! A dataset directory written by [`cmd_simulate`] holds one recording per
//! (domain, device) under `recordings/`, the resolved `scenario.json`, the
//! generated `population.json`, and `manifest.json` listing every frame by
//! file, sample offset and length.

mod commands;
mod pipeline;
mod report;
mod scenario;

pub use commands::{
    cmd_evaluate, cmd_extract, cmd_report, cmd_simulate, cmd_warmup, feature_path, report_path,
    run_warmup, write_mean_eps_csv, EvaluateOptions, ExtractOptions, Manifest, ManifestEntry,
    WarmupOptions, MANIFEST_FILE, MEAN_EPS_CSV_FILE, POPULATION_FILE, SCENARIO_FILE,
    SUMMARY_CSV_FILE, SUMMARY_JSON_FILE, WARMUP_CSV_FILE, WARMUP_REPORT_FILE,
};
pub use pipeline::{extract_into, Extractor, FrameGenerator, FrameSlot};
pub use report::{
    read_json, EvalReport, RunInfo, Summary, SummaryRow, SummarySection, WarmupPoint, WarmupReport,
    MODELING_NOTE, REPORT_VERSION,
};
pub use scenario::{DomainSpec, PopulationSpec, Scenario, WarmupSpec, SCENARIO_FORMAT_VERSION};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
