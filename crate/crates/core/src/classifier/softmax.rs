use serde::{Deserialize, Serialize};

use super::{check_dim, FeatureMatrix, Predictions};
use crate::error::{Error, Result};
use crate::signal::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoftmaxHyper {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Mini-batch size; 0 trains on the full batch with step halving, which
    /// makes the training loss non-increasing.
    pub batch_size: usize,
    pub l2: f64,
}

impl Default for SoftmaxHyper {
    fn default() -> Self {
        SoftmaxHyper {
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 50,
            batch_size: 64,
            l2: 1e-4,
        }
    }
}

/// Multinomial logistic regression on per-feature standardized inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub classes: Vec<String>,
    /// n_classes x dim, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub hyper: SoftmaxHyper,
    /// Full-data training loss after each epoch.
    pub loss_history: Vec<f64>,
}

/// Mean cross-entropy plus (l2/2)·|W|², and its gradient.
///
/// `x` holds `y.len()` rows of `dim` features.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: &[f64],
    x: &[f64],
    y: &[usize],
    l2: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n_classes = bias.len();
    let dim = weights.len() / n_classes;
    let n = y.len().max(1) as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; n_classes];
    let mut loss = 0.0;
    let mut p = vec![0.0; n_classes];
    for (row, &label) in x.chunks_exact(dim).zip(y) {
        logits_into(weights, bias, row, &mut p);
        log_softmax_in_place(&mut p);
        loss -= p[label];
        for c in 0..n_classes {
            let g = p[c].exp() - if c == label { 1.0 } else { 0.0 };
            gb[c] += g / n;
            let gw_row = &mut gw[c * dim..(c + 1) * dim];
            for (gwv, &xv) in gw_row.iter_mut().zip(row) {
                *gwv += g * xv / n;
            }
        }
    }
    loss /= n;
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in gw.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (loss, gw, gb)
}

fn logits_into(weights: &[f64], bias: &[f64], row: &[f64], out: &mut [f64]) {
    let dim = row.len();
    for (c, o) in out.iter_mut().enumerate() {
        *o = bias[c]
            + weights[c * dim..(c + 1) * dim]
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>();
    }
}

/// Turns logits into log-probabilities.
fn log_softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    for v in z.iter_mut() {
        *v -= lse;
    }
}

fn standardizer(train: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = train.n_rows() as f64;
    let mut mean = vec![0.0; train.dim];
    for i in 0..train.n_rows() {
        for (m, &v) in mean.iter_mut().zip(train.row(i)) {
            *m += f64::from(v) / n;
        }
    }
    let mut var = vec![0.0; train.dim];
    for i in 0..train.n_rows() {
        for ((s, &v), m) in var.iter_mut().zip(train.row(i)).zip(&mean) {
            *s += (f64::from(v) - m).powi(2) / n;
        }
    }
    let scale = var
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
        .collect();
    (mean, scale)
}

fn standardize_rows(m: &FeatureMatrix, idx: &[usize], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(idx.len() * m.dim);
    for &i in idx {
        out.extend(
            m.row(i)
                .iter()
                .zip(mean)
                .zip(scale)
                .map(|((&v, mu), s)| (f64::from(v) - mu) * s),
        );
    }
    out
}

pub fn fit_softmax(
    train: &FeatureMatrix,
    hyper: &SoftmaxHyper,
    rng: &RngStream,
) -> Result<SoftmaxModel> {
    train.validate()?;
    if !(hyper.learning_rate > 0.0) || !(0.0..1.0).contains(&hyper.momentum) || hyper.l2 < 0.0 {
        return Err(Error::invalid(
            "softmax needs learning_rate > 0, momentum in [0, 1) and l2 >= 0",
        ));
    }
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::invalid("need at least 2 classes"));
    }
    let y: Vec<usize> = train
        .labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is a class"))
        .collect();
    let (mean, scale) = standardizer(train);
    let dim = train.dim;
    let k = classes.len();
    let mut w = vec![0.0; k * dim];
    let mut b = vec![0.0; k];
    let mut vw = vec![0.0; k * dim];
    let mut vb = vec![0.0; k];
    let all: Vec<usize> = (0..train.n_rows()).collect();
    let mut order = all.clone();
    let mut rng = rng.derive_label("softmax");
    let mut history = Vec::with_capacity(hyper.epochs);

    let diverged = |epoch: usize| {
        Error::Divergence(format!(
            "loss became non-finite in epoch {epoch}; try a smaller learning_rate (now {})",
            hyper.learning_rate
        ))
    };

    if hyper.batch_size == 0 {
        let x = standardize_rows(train, &all, &mean, &scale);
        let mut lr = hyper.learning_rate;
        let (mut loss, mut gw, mut gb) = loss_and_gradient(&w, &b, &x, &y, hyper.l2);
        for epoch in 0..hyper.epochs {
            if !loss.is_finite() {
                return Err(diverged(epoch));
            }
            // Accept only steps that do not raise the loss; otherwise halve the
            // step and drop the momentum. If the step underflows, stay put.
            for _ in 0..40 {
                let nvw: Vec<f64> = vw
                    .iter()
                    .zip(&gw)
                    .map(|(v, g)| hyper.momentum * v - lr * g)
                    .collect();
                let nvb: Vec<f64> = vb
                    .iter()
                    .zip(&gb)
                    .map(|(v, g)| hyper.momentum * v - lr * g)
                    .collect();
                let cw: Vec<f64> = w.iter().zip(&nvw).map(|(a, d)| a + d).collect();
                let cb: Vec<f64> = b.iter().zip(&nvb).map(|(a, d)| a + d).collect();
                let (cl, cgw, cgb) = loss_and_gradient(&cw, &cb, &x, &y, hyper.l2);
                if cl.is_finite() && cl <= loss {
                    (w, b, vw, vb) = (cw, cb, nvw, nvb);
                    (loss, gw, gb) = (cl, cgw, cgb);
                    break;
                }
                lr *= 0.5;
                vw.iter_mut().for_each(|v| *v = 0.0);
                vb.iter_mut().for_each(|v| *v = 0.0);
            }
            history.push(loss);
        }
    } else {
        for epoch in 0..hyper.epochs {
            rng.shuffle(&mut order);
            for batch in order.chunks(hyper.batch_size) {
                let x = standardize_rows(train, batch, &mean, &scale);
                let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
                let (l, gw, gb) = loss_and_gradient(&w, &b, &x, &yb, hyper.l2);
                if !l.is_finite() {
                    return Err(diverged(epoch));
                }
                for ((wv, v), g) in w.iter_mut().zip(vw.iter_mut()).zip(&gw) {
                    *v = hyper.momentum * *v - hyper.learning_rate * g;
                    *wv += *v;
                }
                for ((bv, v), g) in b.iter_mut().zip(vb.iter_mut()).zip(&gb) {
                    *v = hyper.momentum * *v - hyper.learning_rate * g;
                    *bv += *v;
                }
            }
            let loss = full_loss(train, &all, &y, &w, &b, &mean, &scale, hyper.l2);
            if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(diverged(epoch));
            }
            history.push(loss);
        }
    }
    Ok(SoftmaxModel {
        classes,
        weights: w,
        bias: b,
        feature_mean: mean,
        feature_scale: scale,
        hyper: *hyper,
        loss_history: history,
    })
}

#[allow(clippy::too_many_arguments)]
fn full_loss(
    m: &FeatureMatrix,
    idx: &[usize],
    y: &[usize],
    w: &[f64],
    b: &[f64],
    mean: &[f64],
    scale: &[f64],
    l2: f64,
) -> f64 {
    // Chunked to bound memory on large matrices.
    let mut total = 0.0;
    for (chunk, ys) in idx.chunks(256).zip(y.chunks(256)) {
        let x = standardize_rows(m, chunk, mean, scale);
        let (l, _, _) = loss_and_gradient(w, b, &x, ys, 0.0);
        total += l * chunk.len() as f64;
    }
    total / idx.len() as f64 + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

impl SoftmaxModel {
    pub fn dim(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = row
            .iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((v, m), s)| (v - m) * s)
            .collect();
        let mut p = vec![0.0; self.classes.len()];
        logits_into(&self.weights, &self.bias, &x, &mut p);
        log_softmax_in_place(&mut p);
        p.iter_mut().for_each(|v| *v = v.exp());
        p
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Predictions> {
        check_dim(self.dim(), rows)?;
        Ok(Predictions::from_scores(&self.classes, rows, |r| {
            self.probabilities(r)
        }))
    }
}
