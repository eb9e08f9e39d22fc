//! Nearest-centroid, k-NN and softmax classifiers on the same EPS rows, plus a
//! model file round trip.
//!
//! ```text
//! cargo run --release --example classifiers
//! ```

use std::path::Path;

use epsfp::classifier::{
    crossval, fit_model, read_model, write_model, ModelKind, ModelSpec, Representation,
};
use epsfp::eval::{Extractor, FrameGenerator, Scenario};

/// Cross-validated accuracy per model kind, and whether the saved softmax
/// model predicts identically after reloading.
pub fn run(
    dir: &Path,
    devices: usize,
    frames: usize,
) -> epsfp::Result<(Vec<(ModelKind, f64)>, bool)> {
    let mut s = Scenario::default();
    s.population.n_devices = devices;
    let gen = FrameGenerator::new(&s)?;
    let ex = Extractor::for_scenario(&s, Representation::Eps);
    let features = gen.domain_features(&s.domains[1], frames, &[ex])?.remove(0);
    let rng = s.root_rng().derive_label("classifiers");

    let mut scores = Vec::new();
    for kind in [ModelKind::Centroid, ModelKind::Knn, ModelKind::Softmax] {
        let cv = crossval(&features, s.k_folds, &ModelSpec::of_kind(kind), &rng)?;
        scores.push((kind, cv.mean_accuracy));
    }

    let model = fit_model(&features, &ModelSpec::of_kind(ModelKind::Softmax), &rng)?;
    let path = dir.join("softmax.model");
    write_model(&path, &model)?;
    let same = read_model(&path)?.predict(&features)? == model.predict(&features)?;
    Ok((scores, same))
}

fn main() -> epsfp::Result<()> {
    let dir = std::env::temp_dir().join("epsfp-classifier-example");
    std::fs::create_dir_all(&dir).map_err(|e| epsfp::Error::InvalidInput(e.to_string()))?;
    let (scores, same) = run(&dir, 15, 20)?;
    for (kind, acc) in scores {
        println!("{:>9}: {acc:.3}", kind.as_str());
    }
    println!("reloaded model predicts identically: {same}");
    Ok(())
}
