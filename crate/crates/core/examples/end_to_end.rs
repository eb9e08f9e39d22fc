//! The command pipeline on disk: simulate a dataset, extract features,
//! evaluate same- and cross-domain, and merge the reports.
//!
//! The `epsfp` binary wraps the same calls:
//!
//! ```text
//! epsfp simulate --config scenarios/quick.json --out data
//! epsfp extract --dataset data --out features
//! epsfp evaluate --train features/wired.eps.f32 --test features/wired.eps.f32 \
//!     --test features/random-3m.eps.f32 --out reports
//! epsfp report --out summary reports/*.report.json
//! ```
//!
//! ```text
//! cargo run --release --example end_to_end
//! ```

use std::path::{Path, PathBuf};

use epsfp::classifier::Representation;
use epsfp::eval::{
    cmd_evaluate, cmd_extract, cmd_report, cmd_simulate, feature_path, report_path,
    EvaluateOptions, ExtractOptions, Scenario, Summary,
};

pub fn scenario() -> Scenario {
    let mut s = Scenario::quick();
    s.population.n_devices = 4;
    s.frames_per_device_per_domain = 10;
    s
}

pub fn run(dir: &Path) -> epsfp::Result<Summary> {
    let s = scenario();
    let data = dir.join("data");
    let features = dir.join("features");
    let reports = dir.join("reports");
    cmd_simulate(&s, &data)?;
    let mut report_files: Vec<PathBuf> = Vec::new();
    for repr in [Representation::Eps, Representation::RawIq] {
        let opts = ExtractOptions {
            representation: Some(repr),
            ..ExtractOptions::default()
        };
        cmd_extract(&data, &features, &opts)?;
        let train = feature_path(&features, &s.domains[0].name, repr);
        let tests: Vec<PathBuf> = s
            .domains
            .iter()
            .map(|d| feature_path(&features, &d.name, repr))
            .collect();
        let opts = EvaluateOptions::default();
        cmd_evaluate(&train, &tests, &reports, &opts)?;
        report_files.extend(
            tests
                .iter()
                .map(|t| report_path(&reports, &train, t, opts.model.kind)),
        );
    }
    let eps_files: Vec<PathBuf> = s
        .domains
        .iter()
        .map(|d| feature_path(&features, &d.name, Representation::Eps))
        .collect();
    cmd_report(&report_files, &eps_files, &dir.join("summary"))
}

fn main() -> epsfp::Result<()> {
    let dir = std::env::temp_dir().join("epsfp-end-to-end");
    let _ = std::fs::remove_dir_all(&dir);
    let summary = run(&dir)?;
    for section in &summary.sections {
        println!("[{}]", section.representation);
        for r in &section.rows {
            println!(
                "  {:>12} -> {:<12} {:.3}{}",
                r.train_domain,
                r.test_domain,
                r.mean_accuracy,
                if r.same_domain { " (5-fold)" } else { "" }
            );
        }
    }
    println!("outputs under {}", dir.display());
    Ok(())
}
