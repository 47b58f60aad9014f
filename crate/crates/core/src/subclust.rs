//! Subtractive clustering and rule-base initialization.
//!
//! Every data point is a candidate center with potential
//! `P_i = sum_j exp(-4 |x_i - x_j|^2 / r_a^2)`. The highest-potential point
//! becomes a center; potentials around it are then reduced by
//! `P* exp(-4 |x_i - x*|^2 / r_b^2)` with `r_b = squash * r_a`, and the
//! process repeats until the remaining potential is too small relative to
//! the first center's.

use thiserror::Error;

use crate::anfis::{fit_consequents, AnfisError, TskModel, TskRule};
use crate::scaling::Standardization;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubclustError {
    #[error("no data to cluster")]
    EmptyData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("cannot reach {target} clusters (at most {max} distinct centers)")]
    CalibrationFailed { target: usize, max: usize },
    #[error(transparent)]
    Anfis(#[from] AnfisError),
}

/// Clustering knobs. Only `radius` is usually tuned.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SubclustParams {
    /// Neighborhood radius `r_a`, in standardized units.
    pub radius: f64,
    /// Penalty radius multiplier, `r_b = squash * r_a`.
    pub squash: f64,
    pub accept_ratio: f64,
    pub reject_ratio: f64,
}

impl Default for SubclustParams {
    fn default() -> Self {
        Self { radius: 0.5, squash: 1.25, accept_ratio: 0.5, reject_ratio: 0.15 }
    }
}

impl SubclustParams {
    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn validate(&self) -> Result<(), SubclustError> {
        let bad = |m: &str| Err(SubclustError::InvalidParams(m.to_string()));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be positive");
        }
        if !(self.squash >= 1.0 && self.squash.is_finite()) {
            return bad("squash must be at least 1");
        }
        if !(self.accept_ratio > 0.0 && self.accept_ratio <= 1.0) {
            return bad("accept_ratio must lie in (0, 1]");
        }
        if !(self.reject_ratio > 0.0 && self.reject_ratio < self.accept_ratio) {
            return bad("reject_ratio must lie in (0, accept_ratio)");
        }
        Ok(())
    }
}

/// A selected center: a member of the input data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCenter {
    /// Index of the data point chosen as center.
    pub index: usize,
    pub center: Vec<f64>,
    /// Revised potential at the moment of selection.
    pub potential: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check(data: &[Vec<f64>]) -> Result<usize, SubclustError> {
    let dim = data.first().ok_or(SubclustError::EmptyData)?.len();
    if let Some(bad) = data.iter().find(|x| x.len() != dim) {
        return Err(SubclustError::DimensionMismatch { expected: dim, got: bad.len() });
    }
    Ok(dim)
}

/// Density potential of every point for neighborhood radius `radius`.
pub fn initial_potentials(data: &[Vec<f64>], radius: f64) -> Vec<f64> {
    let alpha = 4.0 / (radius * radius);
    data.iter().map(|xi| data.iter().map(|xj| (-alpha * sq_dist(xi, xj)).exp()).sum()).collect()
}

/// Subtract the influence of the center at `data[center]` with potential
/// `center_potential` from every potential.
pub fn revise_potentials(
    potentials: &mut [f64],
    data: &[Vec<f64>],
    center: usize,
    center_potential: f64,
    penalty_radius: f64,
) {
    let beta = 4.0 / (penalty_radius * penalty_radius);
    let c = &data[center];
    for (p, x) in potentials.iter_mut().zip(data) {
        *p -= center_potential * (-beta * sq_dist(x, c)).exp();
    }
}

fn argmax(values: &[f64]) -> usize {
    // strict comparison keeps the lowest index on ties
    (1..values.len()).fold(0, |best, i| if values[i] > values[best] { i } else { best })
}

/// Run subtractive clustering. Centers come back in selection order, which
/// is also order of non-increasing potential.
pub fn subtractive_cluster(data: &[Vec<f64>], params: &SubclustParams) -> Result<Vec<ClusterCenter>, SubclustError> {
    check(data)?;
    params.validate()?;
    let mut potential = initial_potentials(data, params.radius);
    let penalty_radius = params.squash * params.radius;

    let first = argmax(&potential);
    let first_potential = potential[first];
    let mut centers = vec![ClusterCenter { index: first, center: data[first].clone(), potential: first_potential }];
    revise_potentials(&mut potential, data, first, first_potential, penalty_radius);

    while centers.len() < data.len() {
        let k = argmax(&potential);
        let pk = potential[k];
        if pk <= 0.0 || centers.iter().any(|c| c.index == k) {
            break;
        }
        let ratio = pk / first_potential;
        let accept = if ratio > params.accept_ratio {
            true
        } else if ratio < params.reject_ratio {
            false
        } else {
            let d_min = centers.iter().map(|c| sq_dist(&data[k], &c.center).sqrt()).fold(f64::INFINITY, f64::min);
            if d_min / params.radius + ratio >= 1.0 {
                true
            } else {
                // gray zone: drop this candidate and try the next one
                potential[k] = 0.0;
                continue;
            }
        };
        if !accept {
            break;
        }
        centers.push(ClusterCenter { index: k, center: data[k].clone(), potential: pk });
        revise_potentials(&mut potential, data, k, pk, penalty_radius);
    }
    Ok(centers)
}

/// Membership width giving `exp(-4)` at distance `radius` from the center.
pub fn sigma_for_radius(radius: f64) -> f64 {
    radius / 8f64.sqrt()
}

/// Build one rule per center (Gaussian premises with `sigma = r_a / sqrt(8)`)
/// and set all consequents by one least-squares pass.
///
/// `centers` live in the standardized space of `standardization`; `inputs`
/// are raw.
pub fn rules_from_clusters(
    centers: &[Vec<f64>],
    radius: f64,
    standardization: Standardization,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<TskModel, SubclustError> {
    if centers.is_empty() {
        return Err(SubclustError::EmptyData);
    }
    let sigma = sigma_for_radius(radius);
    let rules = centers.iter().map(|c| TskRule::centered(c, sigma)).collect::<Result<Vec<_>, _>>()?;
    let mut model = TskModel::with_standardization(rules, standardization)?;
    fit_consequents(&mut model, inputs, targets)?;
    Ok(model)
}

/// Outcome of searching for a radius that yields a given rule count.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub radius: f64,
    /// Exactly `target` centers.
    pub centers: Vec<ClusterCenter>,
    /// Whether the unmodified clustering at `radius` produced exactly
    /// `target` centers; otherwise the trailing lowest-potential centers of a
    /// larger clustering were dropped.
    pub exact: bool,
    pub iterations: usize,
}

/// Bisect the radius until clustering yields `target` centers.
///
/// If the center count jumps over `target` (two radii an arbitrarily small
/// distance apart give counts on both sides), the clustering just above the
/// target is truncated to its `target` highest-potential centers.
pub fn calibrate_radius(
    data: &[Vec<f64>],
    params: &SubclustParams,
    target: usize,
) -> Result<Calibration, SubclustError> {
    check(data)?;
    params.validate()?;
    if target == 0 {
        return Err(SubclustError::InvalidParams("target rule count must be positive".into()));
    }
    let count = |r: f64| subtractive_cluster(data, &params.with_radius(r));

    // upper bracket: radius wide enough to give at most `target` centers
    let mut hi = params.radius;
    let mut hi_centers = count(hi)?;
    let mut iterations = 1;
    while hi_centers.len() > target {
        hi *= 2.0;
        hi_centers = count(hi)?;
        iterations += 1;
        if iterations > 200 {
            return Err(SubclustError::CalibrationFailed { target, max: hi_centers.len() });
        }
    }
    if hi_centers.len() == target {
        return Ok(Calibration { radius: hi, centers: hi_centers, exact: true, iterations });
    }
    // lower bracket: radius small enough to give more than `target` centers
    let mut lo = hi;
    let mut lo_centers = hi_centers;
    while lo_centers.len() < target {
        hi = lo;
        lo *= 0.5;
        lo_centers = count(lo)?;
        iterations += 1;
        if lo_centers.len() == target {
            return Ok(Calibration { radius: lo, centers: lo_centers, exact: true, iterations });
        }
        if lo < 1e-12 {
            return Err(SubclustError::CalibrationFailed { target, max: lo_centers.len() });
        }
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let mid_centers = count(mid)?;
        iterations += 1;
        match mid_centers.len().cmp(&target) {
            std::cmp::Ordering::Equal => {
                return Ok(Calibration { radius: mid, centers: mid_centers, exact: true, iterations })
            }
            std::cmp::Ordering::Greater => {
                lo = mid;
                lo_centers = mid_centers;
            }
            std::cmp::Ordering::Less => hi = mid,
        }
    }
    lo_centers.truncate(target);
    Ok(Calibration { radius: lo, centers: lo_centers, exact: false, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, [Vec<f64>; 2]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = Normal::new(0.0, 0.1).unwrap();
        let mut data = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (10.0, 10.0)] {
            for _ in 0..50 {
                data.push(vec![cx + jitter.sample(&mut rng), cy + jitter.sample(&mut rng)]);
            }
        }
        let mean = |s: &[Vec<f64>]| {
            let n = s.len() as f64;
            vec![s.iter().map(|p| p[0]).sum::<f64>() / n, s.iter().map(|p| p[1]).sum::<f64>() / n]
        };
        let means = [mean(&data[..50]), mean(&data[50..])];
        (data, means)
    }

    #[test]
    fn repeated_point_gives_one_center() {
        let data = vec![vec![1.5, -2.0]; 10];
        let centers = subtractive_cluster(&data, &SubclustParams::default()).unwrap();
        assert_eq!(centers.len(), 1);
        assert_eq!(centers[0].center, vec![1.5, -2.0]);
        assert_eq!(centers[0].index, 0);
    }

    #[test]
    fn empty_data_is_an_error() {
        assert_eq!(subtractive_cluster(&[], &SubclustParams::default()), Err(SubclustError::EmptyData));
    }

    #[test]
    fn two_blobs_two_centers() {
        let (data, means) = blobs(1);
        let params = SubclustParams::default().with_radius(2.0);
        let centers = subtractive_cluster(&data, &params).unwrap();
        assert_eq!(centers.len(), 2);
        for c in &centers {
            let near = means.iter().map(|m| sq_dist(&c.center, m).sqrt()).fold(f64::INFINITY, f64::min);
            assert!(near < 0.5);
        }

        // brute-force oracle: the maximal-potential point within each blob
        let alpha = 4.0 / 4.0;
        let potential = |i: usize| -> f64 { data.iter().map(|x| (-alpha * sq_dist(&data[i], x)).exp()).sum() };
        let best_in = |range: std::ops::Range<usize>| {
            range.fold((0, f64::NEG_INFINITY), |(bi, bp), i| {
                let p = potential(i);
                if p > bp {
                    (i, p)
                } else {
                    (bi, bp)
                }
            })
        };
        let (a, pa) = best_in(0..50);
        let (b, pb) = best_in(50..100);
        let first = if pb > pa { b } else { a };
        assert_eq!(centers[0].index, first);
        let mut got: Vec<usize> = centers.iter().map(|c| c.index).collect();
        got.sort();
        assert_eq!(got, vec![a, b]);
    }

    #[test]
    fn first_center_has_maximal_potential() {
        let (data, _) = blobs(7);
        let centers = subtractive_cluster(&data, &SubclustParams::default().with_radius(1.0)).unwrap();
        let pots = initial_potentials(&data, 1.0);
        let max = pots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(pots[centers[0].index], max);
        assert_eq!(centers[0].potential, max);
    }

    #[test]
    fn revision_never_raises_potential() {
        let (data, _) = blobs(9);
        let mut pots = initial_potentials(&data, 1.0);
        let before = pots.clone();
        revise_potentials(&mut pots, &data, 17, before[17], 1.25);
        for (a, b) in pots.iter().zip(&before) {
            assert!(a <= b);
        }
    }

    #[test]
    fn selected_potentials_decrease() {
        let (data, _) = blobs(2);
        let centers = subtractive_cluster(&data, &SubclustParams::default().with_radius(0.1)).unwrap();
        assert!(centers.len() > 2);
        for w in centers.windows(2) {
            assert!(w[1].potential <= w[0].potential);
        }
        for c in &centers {
            assert_eq!(data[c.index], c.center);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let data = vec![vec![0.0]];
        for p in [
            SubclustParams::default().with_radius(0.0),
            SubclustParams { squash: 0.5, ..Default::default() },
            SubclustParams { reject_ratio: 0.6, ..Default::default() },
            SubclustParams { accept_ratio: 1.5, ..Default::default() },
        ] {
            assert!(matches!(subtractive_cluster(&data, &p), Err(SubclustError::InvalidParams(_))));
        }
    }

    #[test]
    fn rules_from_single_center() {
        let inputs = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-1.0, 0.2]];
        let model =
            rules_from_clusters(&[vec![0.0, 0.0]], 1.0, Standardization::identity(2), &inputs, &[1.0, 1.0, 1.0])
                .unwrap();
        assert_eq!(model.rule_count(), 1);
        for mf in model.rules()[0].antecedents() {
            assert_eq!(mf.center(), 0.0);
            assert!((mf.sigma() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
            // e^-4 at distance r_a
            assert!((mf.eval(1.0) - (-4.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn separated_centers_reproduce_cluster_labels() {
        let (data, _) = blobs(4);
        let targets: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 3.0 }).collect();
        let centers = subtractive_cluster(&data, &SubclustParams::default().with_radius(2.0)).unwrap();
        let cs: Vec<Vec<f64>> = centers.iter().map(|c| c.center.clone()).collect();
        let model = rules_from_clusters(&cs, 2.0, Standardization::identity(2), &data, &targets).unwrap();
        for c in &centers {
            let want = targets[c.index];
            let got = model.infer(&c.center).unwrap();
            assert!((got - want).abs() <= 0.1 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn calibration_hits_requested_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let data: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| noise.sample(&mut rng)).collect()).collect();
        for target in [1, 5, 13, 30] {
            let cal = calibrate_radius(&data, &SubclustParams::default(), target).unwrap();
            assert_eq!(cal.centers.len(), target);
        }
    }
}
