//! Train on one capture domain, test on the others, for EPS and raw-IQ rows.
//!
//! Everything runs in memory: frames are generated, extracted and classified
//! without writing a dataset.
//!
//! ```text
//! cargo run --release --example cross_domain [frames_per_device]
//! ```

use epsfp::channel::ChannelPreset;
use epsfp::classifier::{crossval, evaluate_split, FeatureMatrix, Representation};
use epsfp::eval::{DomainSpec, Extractor, FrameGenerator, Scenario};

pub fn scenario(devices: usize) -> Scenario {
    let mut s = Scenario::default();
    s.name = "cross-domain-example".into();
    s.population.n_devices = devices;
    s.domains = [
        ChannelPreset::Wireless1m,
        ChannelPreset::Wireless3m,
        ChannelPreset::Random3m,
    ]
    .iter()
    .map(|&p| DomainSpec::new(p.as_str(), p))
    .collect();
    s
}

/// Accuracy grid `[representation][train][test]`, diagonal cross-validated.
pub fn run(devices: usize, frames_per_device: usize) -> epsfp::Result<Vec<Vec<Vec<f64>>>> {
    let s = scenario(devices);
    let gen = FrameGenerator::new(&s)?;
    let extractors = [
        Extractor::for_scenario(&s, Representation::Eps),
        Extractor::for_scenario(&s, Representation::RawIq),
    ];
    let mut by_domain: Vec<Vec<FeatureMatrix>> = Vec::new();
    for d in &s.domains {
        by_domain.push(gen.domain_features(d, frames_per_device, &extractors)?);
    }
    let rng = s.root_rng().derive_label("example");
    let mut grid = Vec::new();
    for r in 0..extractors.len() {
        let mut rows = Vec::new();
        for train in &by_domain {
            let mut row = Vec::new();
            for test in &by_domain {
                let acc = if std::ptr::eq(train, test) {
                    crossval(&train[r], s.k_folds, &s.classifier, &rng)?.mean_accuracy
                } else {
                    evaluate_split(&train[r], &test[r], &s.classifier, &rng)?.accuracy()
                };
                row.push(acc);
            }
            rows.push(row);
        }
        grid.push(rows);
    }
    Ok(grid)
}

fn main() -> epsfp::Result<()> {
    let frames = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("frames per device"))
        .unwrap_or(20);
    let s = scenario(15);
    let grid = run(15, frames)?;
    for (repr, rows) in ["eps", "raw-iq"].iter().zip(&grid) {
        println!("{repr}: rows train, columns test");
        print!("{:>13}", "");
        for d in &s.domains {
            print!("{:>13}", d.name);
        }
        println!();
        for (d, row) in s.domains.iter().zip(rows) {
            print!("{:>13}", d.name);
            for acc in row {
                print!("{acc:>13.3}");
            }
            println!();
        }
    }
    Ok(())
}
