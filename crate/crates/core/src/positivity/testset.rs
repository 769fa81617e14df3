//! Weighted moments along quadrature lines, admissible test intervals
//! `(a, b)`, the choice of `gamma`, and the positive decomposition weights.
//!
//! Along a line the weighted average is `<p> = 1/2 int_{-1}^{1} p(xi) M dxi`,
//! evaluated with the same Gauss rule as every volume integral, so the
//! decomposition `<p> = w1 p(-1) + w2 p(gamma) + w3 p(1)` is exact for the
//! discrete average.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::positivity::weight::WeightField;
use crate::space::DgSpace;

/// `(<1>, <xi>, <xi^2>)` along one line.
pub type Moments = [f64; 3];

/// Moments along line `line` of `axis` in cell `k`.
pub fn line_moments(space: &DgSpace, weight: &WeightField, k: usize, axis: usize, line: usize) -> Moments {
    let rule = space.rule();
    let m = weight.vol(k);
    let mut out = [0.0; 3];
    for (tau, (&xi, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let v = 0.5 * w * m[space.line_vol_index(axis, line, tau)];
        out[0] += v;
        out[1] += v * xi;
        out[2] += v * xi * xi;
    }
    out
}

/// Moments of an explicit weight sampled at the rule nodes.
pub fn moments_from_samples(nodes: &[f64], weights: &[f64], m: &[f64]) -> Moments {
    let mut out = [0.0; 3];
    for ((&xi, &w), &mv) in nodes.iter().zip(weights).zip(m) {
        let v = 0.5 * w * mv;
        out[0] += v;
        out[1] += v * xi;
        out[2] += v * xi * xi;
    }
    out
}

/// `a = <xi - xi^2> / <1 - xi>`, `b = <xi + xi^2> / <1 + xi>`.
pub fn test_interval(m: &Moments) -> (f64, f64) {
    let a = (m[1] - m[2]) / (m[0] - m[1]);
    let b = (m[1] + m[2]) / (m[0] + m[1]);
    (a, b)
}

/// Cap `8 beta1 - 1` on `|gamma|`, when `beta1` is in the range where it
/// means anything.
pub fn gamma_cap(beta1: f64) -> Option<f64> {
    (beta1 >= 0.125).then(|| 8.0 * beta1 - 1.0)
}

/// Midpoint of `(a, b)` clamped to `|gamma| <= 8 beta1 - 1`. Below
/// `beta1 = 1/8` no clamp applies.
pub fn choose_gamma(a: f64, b: f64, beta1: f64) -> Result<f64> {
    choose_gamma_at(a, b, beta1, (0, 0, 0))
}

fn choose_gamma_at(a: f64, b: f64, beta1: f64, at: (usize, usize, usize)) -> Result<f64> {
    let (cell, axis, line) = at;
    if !(-1.0 < a && a < b && b < 1.0) {
        return Err(Error::TestIntervalOrdering { cell, axis, line, a, b });
    }
    let mid = 0.5 * (a + b);
    let Some(cap) = gamma_cap(beta1) else {
        return Ok(mid);
    };
    let g = mid.clamp(-cap, cap);
    if a < g && g < b {
        Ok(g)
    } else {
        Err(Error::InadmissibleCell { cell, axis, line, a, b, cap })
    }
}

/// `(w1, w2, w3)` with `<p> = w1 p(-1) + w2 p(gamma) + w3 p(1)` on `P^2`.
pub fn decomposition_weights(m: &Moments, gamma: f64) -> [f64; 3] {
    let [m0, m1, m2] = *m;
    [
        (gamma * m0 - (1.0 + gamma) * m1 + m2) / (2.0 * (1.0 + gamma)),
        (m0 - m2) / (1.0 - gamma * gamma),
        (m2 + (1.0 - gamma) * m1 - gamma * m0) / (2.0 * (1.0 - gamma)),
    ]
}

/// Weights, failing when one of them is not positive.
pub fn positive_decomposition_weights(m: &Moments, gamma: f64) -> Result<[f64; 3]> {
    let w = decomposition_weights(m, gamma);
    if let Some(&bad) = w.iter().find(|&&v| !(v > 0.0)) {
        let (a, b) = test_interval(m);
        return Err(Error::NonPositiveWeight { gamma, a, b, weight: bad });
    }
    Ok(w)
}

/// Test data for one quadrature line of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTest {
    pub moments: Moments,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub omega: [f64; 3],
}

impl LineTest {
    /// Reference coordinates `{-1, gamma, 1}` along the line.
    pub fn nodes(&self) -> [f64; 3] {
        [-1.0, self.gamma, 1.0]
    }
}

/// Per-cell test sets for one species: one line in 1D, `L` lines per
/// axis in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    dim: usize,
    lines_per_axis: usize,
    lines: Vec<LineTest>,
}

impl TestSet {
    #[inline]
    fn index(&self, k: usize, axis: usize, line: usize) -> usize {
        (k * self.dim + axis) * self.lines_per_axis + line
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lines_per_axis(&self) -> usize {
        self.lines_per_axis
    }

    pub fn line(&self, k: usize, axis: usize, line: usize) -> &LineTest {
        &self.lines[self.index(k, axis, line)]
    }

    pub fn lines(&self) -> &[LineTest] {
        &self.lines
    }

    /// Reference coordinates of the test points of cell `k`: 3 in 1D,
    /// `6 L` in 2D.
    pub fn points(&self, space: &DgSpace, k: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(3 * self.dim * self.lines_per_axis);
        for axis in 0..self.dim {
            for s in 0..self.lines_per_axis {
                for t in self.line(k, axis, s).nodes() {
                    out.push(space.line_point(axis, s, t));
                }
            }
        }
        out
    }

    pub fn num_points_per_cell(&self) -> usize {
        3 * self.dim * self.lines_per_axis
    }
}

/// Build the test sets of every cell from the weight of one species.
pub fn build_test_set(space: &DgSpace, weight: &WeightField, beta1: f64) -> Result<TestSet> {
    let dim = space.dim();
    let lpa = space.lines_per_axis();
    let mut lines = Vec::with_capacity(space.num_cells() * dim * lpa);
    for k in 0..space.num_cells() {
        for axis in 0..dim {
            for s in 0..lpa {
                let moments = line_moments(space, weight, k, axis, s);
                let (a, b) = test_interval(&moments);
                let gamma = choose_gamma_at(a, b, beta1, (k, axis, s))?;
                let omega = positive_decomposition_weights(&moments, gamma)?;
                lines.push(LineTest { moments, a, b, gamma, omega });
            }
        }
    }
    Ok(TestSet { dim, lines_per_axis: lpa, lines })
}
