//! Gauss-Legendre rules on the reference interval [-1, 1].

use crate::error::{Error, Result};

/// Number of points per direction used for every volume and edge integral.
pub const DEFAULT_POINTS: usize = 4;

const MAX_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    /// `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
    /// iteration from the Chebyshev-like initial guesses; weights follow from
    /// `2 / ((1 - x^2) P_n'(x)^2)`.
    pub fn gauss(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_POINTS {
            return Err(Error::UnsupportedQuadrature(n));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // descending guess order: i-th guess is the i-th largest root
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Raw weights, summing to 2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights normalized to sum to 1 (the averaging form).
    pub fn averaged_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| 0.5 * w).collect()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over `[lo, hi]` by the affine image of the rule.
    pub fn integrate_on(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self.integrate(|xi| f(mid + half * xi))
    }
}

pub fn gauss_rule(n: usize) -> Result<QuadRule> {
    QuadRule::gauss(n)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
