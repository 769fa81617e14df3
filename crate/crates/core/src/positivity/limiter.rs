//! Scaling limiter toward the M-weighted cell average.

use crate::error::{Error, Result};
use crate::field::{eval_unchecked, Field};
use crate::positivity::testset::TestSet;
use crate::positivity::weight::WeightField;
use crate::space::DgSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct LimiterReport {
    /// Per-cell scaling factor in `[0, 1]`.
    pub theta: Vec<f64>,
    pub limited: usize,
    /// Smallest value of the input on any test set.
    pub worst_pre_min: f64,
    /// Smallest value of the output on any test set.
    pub post_min: f64,
}

/// `int_K M w / int_K M` by volume quadrature.
pub fn weighted_average(space: &DgSpace, w: &Field, weight: &WeightField, k: usize) -> f64 {
    let m = weight.vol(k);
    let c = w.cell(k);
    let (mut num, mut den) = (0.0, 0.0);
    for (q, &wq) in space.vol_weights().iter().enumerate() {
        let v: f64 = c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
        num += wq * m[q] * v;
        den += wq * m[q];
    }
    num / den
}

/// Minimum of `w` over the test set of cell `k`.
pub fn test_set_min(space: &DgSpace, w: &Field, ts: &TestSet, k: usize) -> f64 {
    ts.points(space, k)
        .into_iter()
        .map(|xi| eval_unchecked(space, w.cell(k), xi))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest test-set value over all cells.
pub fn global_test_set_min(space: &DgSpace, w: &Field, ts: &TestSet) -> f64 {
    (0..space.num_cells()).map(|k| test_set_min(space, w, ts, k)).fold(f64::INFINITY, f64::min)
}

/// `theta = min(1, wbar / (wbar - min_S w))`.
pub fn scaling_theta(wbar: f64, min: f64) -> f64 {
    if min >= 0.0 {
        1.0
    } else {
        (wbar / (wbar - min)).clamp(0.0, 1.0)
    }
}

/// Replace `w` by `wbar + theta (w - wbar)` in every cell where it is
/// negative somewhere on the test set. `species` only labels errors.
pub fn scaling_limiter(
    space: &DgSpace,
    w: &Field,
    weight: &WeightField,
    ts: &TestSet,
    species: usize,
) -> Result<(Field, LimiterReport)> {
    let mut out = w.clone();
    let n = space.num_cells();
    let mut theta = vec![1.0; n];
    let mut limited = 0;
    let mut worst_pre_min = f64::INFINITY;
    let mut post_min = f64::INFINITY;
    for k in 0..n {
        let min = test_set_min(space, w, ts, k);
        worst_pre_min = worst_pre_min.min(min);
        if min >= 0.0 {
            post_min = post_min.min(min);
            continue;
        }
        let wbar = weighted_average(space, w, weight, k);
        if !(wbar > 0.0) {
            return Err(Error::NonPositiveAverage { species, cell: k, value: wbar });
        }
        let t = scaling_theta(wbar, min);
        theta[k] = t;
        limited += 1;
        let c = out.cell_mut(k);
        c[0] = t * c[0] + (1.0 - t) * wbar;
        c[1..].iter_mut().for_each(|v| *v *= t);
        post_min = post_min.min(test_set_min(space, &out, ts, k));
    }
    if limited > 0 {
        log::debug!("limiter: species {species}, {limited} cells, worst test-set value {worst_pre_min:e}");
    }
    Ok((out, LimiterReport { theta, limited, worst_pre_min, post_min }))
}
