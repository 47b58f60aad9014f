//! Hybrid learning: least squares for consequents, gradient descent for
//! premises.

use nalgebra::{DMatrix, DVector};

use super::{AnfisError, TskModel};

/// Relative singular-value cutoff of the least-squares solve. Directions
/// weaker than this fraction of the strongest are dropped.
pub const LSE_RCOND: f64 = 1e-8;

const MIN_SIGMA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub epochs: usize,
    /// Initial gradient-descent step, halved on every rejected step.
    pub lr: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self { epochs: 50, lr: 0.01 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    /// Model with the lowest recorded training RMSE.
    pub model: TskModel,
    /// Training RMSE right after each least-squares step.
    pub lse_rmse: Vec<f64>,
    /// Training RMSE right after each gradient step (equal to the LSE value
    /// when the step was rejected).
    pub gradient_rmse: Vec<f64>,
    pub best_rmse: f64,
    /// Learning rate after the last epoch.
    pub final_lr: f64,
}

fn check_data(model: &TskModel, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(), AnfisError> {
    if inputs.is_empty() {
        return Err(AnfisError::EmptyData);
    }
    if inputs.len() != targets.len() {
        return Err(AnfisError::TargetCount { inputs: inputs.len(), targets: targets.len() });
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != model.dim()) {
        return Err(AnfisError::DimensionMismatch { expected: model.dim(), got: bad.len() });
    }
    Ok(())
}

fn rmse_standardized(model: &TskModel, z: &[Vec<f64>], targets: &[f64]) -> Result<f64, AnfisError> {
    let mut sse = 0.0;
    for (x, t) in z.iter().zip(targets) {
        let e = model.infer_standardized(x)? - t;
        sse += e * e;
    }
    Ok((sse / z.len() as f64).sqrt())
}

/// Root-mean-square error of `model` on raw inputs.
pub fn rmse(model: &TskModel, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64, AnfisError> {
    check_data(model, inputs, targets)?;
    let z = model.standardization().apply_all(inputs);
    rmse_standardized(model, &z, targets)
}

fn lse_solve(model: &TskModel, z: &[Vec<f64>], targets: &[f64]) -> Result<Vec<f64>, AnfisError> {
    let n = model.dim();
    let cols = model.rule_count() * (n + 1);
    let rows = z.len();
    let mut design = DMatrix::<f64>::zeros(rows, cols);
    for (i, x) in z.iter().enumerate() {
        let eval = model.evaluate(x)?;
        for (k, w) in eval.weights.iter().enumerate() {
            let base = k * (n + 1);
            design[(i, base)] = *w;
            for (j, v) in x.iter().enumerate() {
                design[(i, base + 1 + j)] = w * v;
            }
        }
    }
    let rhs = DVector::from_column_slice(targets);
    let svd = design.svd(true, true);
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(AnfisError::SingularSystem { rows, cols });
    }
    let p = svd.solve(&rhs, s_max * LSE_RCOND).map_err(|_| AnfisError::SingularSystem { rows, cols })?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(AnfisError::NonFinite { stage: "least-squares step" });
    }
    Ok(p.as_slice().to_vec())
}

fn install_consequents(model: &mut TskModel, p: &[f64]) {
    let width = model.dim() + 1;
    for (rule, chunk) in model.rules_mut().iter_mut().zip(p.chunks(width)) {
        rule.set_consequent(chunk).expect("chunk width matches rule");
    }
}

/// One least-squares pass over all consequent weights with premises frozen.
///
/// The new weights are kept only if they do not raise the training error
/// over the current ones, so the returned RMSE never exceeds the RMSE the
/// model had on entry. Returns that RMSE.
pub fn fit_consequents(model: &mut TskModel, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64, AnfisError> {
    check_data(model, inputs, targets)?;
    let z = model.standardization().apply_all(inputs);
    lse_step(model, &z, targets)
}

fn lse_step(model: &mut TskModel, z: &[Vec<f64>], targets: &[f64]) -> Result<f64, AnfisError> {
    let before = rmse_standardized(model, z, targets)?;
    let p = lse_solve(model, z, targets)?;
    let mut candidate = model.clone();
    install_consequents(&mut candidate, &p);
    let after = rmse_standardized(&candidate, z, targets)?;
    if after <= before || !before.is_finite() {
        *model = candidate;
        Ok(after)
    } else {
        Ok(before)
    }
}

/// Full-batch gradient of the half mean squared error with respect to every
/// (center, sigma), flattened rule-major.
fn premise_gradient(model: &TskModel, z: &[Vec<f64>], targets: &[f64]) -> Result<(Vec<f64>, Vec<f64>), AnfisError> {
    let size = model.rule_count() * model.dim();
    let mut gc = vec![0.0; size];
    let mut gs = vec![0.0; size];
    let scale = 1.0 / z.len() as f64;
    for (x, t) in z.iter().zip(targets) {
        let g = model.premise_gradients(x)?;
        let err = (g.output - t) * scale;
        let flat_c = g.d_center.iter().flatten();
        let flat_s = g.d_sigma.iter().flatten();
        for ((acc_c, acc_s), (dc, ds)) in gc.iter_mut().zip(gs.iter_mut()).zip(flat_c.zip(flat_s)) {
            *acc_c += err * dc;
            *acc_s += err * ds;
        }
    }
    Ok((gc, gs))
}

fn gradient_candidate(model: &TskModel, gc: &[f64], gs: &[f64], lr: f64) -> Result<Option<TskModel>, AnfisError> {
    let mut out = model.clone();
    let n = model.dim();
    for (k, rule) in out.rules_mut().iter_mut().enumerate() {
        for (j, mf) in rule.antecedents_mut().iter_mut().enumerate() {
            let c = mf.c - lr * gc[k * n + j];
            let s = mf.sigma - lr * gs[k * n + j];
            if !c.is_finite() || !s.is_finite() {
                return Err(AnfisError::NonFinite { stage: "gradient step" });
            }
            if s < MIN_SIGMA {
                return Ok(None);
            }
            mf.c = c;
            mf.sigma = s;
        }
    }
    Ok(Some(out))
}

/// Train `model` on raw `inputs` / `targets` for `config.epochs` epochs.
///
/// Each epoch runs one least-squares pass on the consequents, then one
/// gradient pass on the premises. A gradient step that raises the training
/// error (or would collapse a width) is discarded and the learning rate is
/// halved. Consequently the post-LSE RMSE sequence is non-increasing.
pub fn train_hybrid(
    model: &TskModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: HybridConfig,
) -> Result<TrainingReport, AnfisError> {
    if !(config.lr > 0.0 && config.lr.is_finite()) {
        return Err(AnfisError::InvalidParameter { name: "lr", requirement: "positive and finite" });
    }
    check_data(model, inputs, targets)?;
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(AnfisError::NonFinite { stage: "target data" });
    }
    let z = model.standardization().apply_all(inputs);
    let mut current = model.clone();
    let mut best = model.clone();
    let mut best_rmse = rmse_standardized(model, &z, targets)?;
    let mut lr = config.lr;
    let mut lse_rmse = Vec::with_capacity(config.epochs);
    let mut gradient_rmse = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        let after_lse = lse_step(&mut current, &z, targets)?;
        lse_rmse.push(after_lse);
        if after_lse < best_rmse {
            best_rmse = after_lse;
            best = current.clone();
        }

        let (gc, gs) = premise_gradient(&current, &z, targets)?;
        let mut after_grad = after_lse;
        match gradient_candidate(&current, &gc, &gs, lr)? {
            Some(candidate) => {
                let e = rmse_standardized(&candidate, &z, targets)?;
                if !e.is_finite() {
                    return Err(AnfisError::NonFinite { stage: "gradient step" });
                }
                if e <= after_lse {
                    current = candidate;
                    after_grad = e;
                } else {
                    lr *= 0.5;
                }
            }
            None => lr *= 0.5,
        }
        gradient_rmse.push(after_grad);
        if after_grad < best_rmse {
            best_rmse = after_grad;
            best = current.clone();
        }
    }

    Ok(TrainingReport { model: best, lse_rmse, gradient_rmse, best_rmse, final_lr: lr })
}
