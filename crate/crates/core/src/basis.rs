//! Orthogonal Legendre bases of total degree two on `[-1, 1]^dim`.

use crate::mesh::Point;

/// Polynomial degree of every production field.
pub const DEGREE: usize = 2;

const EXPONENTS_1D: [[usize; 2]; 3] = [[0, 0], [1, 0], [2, 0]];
const EXPONENTS_2D: [[usize; 2]; 6] = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];

/// `P^2` modal basis. In 1D `{L0, L1, L2}`; in 2D the six products
/// `L_a(xi) L_b(eta)` with `a + b <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    dim: usize,
}

impl Basis {
    pub fn new(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        DEGREE
    }

    pub fn len(&self) -> usize {
        if self.dim == 1 {
            3
        } else {
            6
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis Legendre indices of basis function `r`.
    pub fn exponents(&self, r: usize) -> [usize; 2] {
        if self.dim == 1 {
            EXPONENTS_1D[r]
        } else {
            EXPONENTS_2D[r]
        }
    }

    pub fn value(&self, r: usize, xi: Point) -> f64 {
        let [a, b] = self.exponents(r);
        legendre(a, xi[0]).0 * if self.dim == 2 { legendre(b, xi[1]).0 } else { 1.0 }
    }

    /// Gradient with respect to the reference coordinates.
    pub fn grad(&self, r: usize, xi: Point) -> [f64; 2] {
        let [a, b] = self.exponents(r);
        let (la, da, _) = legendre(a, xi[0]);
        if self.dim == 1 {
            return [da, 0.0];
        }
        let (lb, db, _) = legendre(b, xi[1]);
        [da * lb, la * db]
    }

    /// Hessian with respect to the reference coordinates.
    pub fn hessian(&self, r: usize, xi: Point) -> [[f64; 2]; 2] {
        let [a, b] = self.exponents(r);
        let (la, da, dda) = legendre(a, xi[0]);
        if self.dim == 1 {
            return [[dda, 0.0], [0.0, 0.0]];
        }
        let (lb, db, ddb) = legendre(b, xi[1]);
        [[dda * lb, da * db], [da * db, la * ddb]]
    }

    /// Reference-element integral of the square of basis function `r`.
    pub fn norm_sq(&self, r: usize) -> f64 {
        let [a, b] = self.exponents(r);
        let na = 2.0 / (2.0 * a as f64 + 1.0);
        if self.dim == 1 {
            na
        } else {
            na * 2.0 / (2.0 * b as f64 + 1.0)
        }
    }

    /// Modal coefficients of the polynomial `c0 + g . xi + xi^T H xi / 2`
    /// given in monomial Taylor form about the reference center.
    pub fn from_taylor(&self, c0: f64, g: [f64; 2], hess: [[f64; 2]; 2]) -> Vec<f64> {
        // xi^2 = 2/3 L2 + 1/3 L0
        if self.dim == 1 {
            let q = 0.5 * hess[0][0];
            vec![c0 + q / 3.0, g[0], 2.0 * q / 3.0]
        } else {
            let qx = 0.5 * hess[0][0];
            let qy = 0.5 * hess[1][1];
            vec![c0 + (qx + qy) / 3.0, g[0], g[1], 2.0 * qx / 3.0, hess[0][1], 2.0 * qy / 3.0]
        }
    }
}

/// `(L_n, L_n', L_n'')` for `n <= 2`.
fn legendre(n: usize, x: f64) -> (f64, f64, f64) {
    match n {
        0 => (1.0, 0.0, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (1.5 * x * x - 0.5, 3.0 * x, 3.0),
        _ => unreachable!("degree above two"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_rule;

    fn gram(b: &Basis) -> Vec<Vec<f64>> {
        let rule = gauss_rule(4).unwrap();
        let n = b.len();
        let mut g = vec![vec![0.0; n]; n];
        let ys: Vec<(f64, f64)> =
            if b.dim() == 1 { vec![(0.0, 1.0)] } else { rule.nodes().iter().copied().zip(rule.weights().iter().copied()).collect() };
        for (&x, &wx) in rule.nodes().iter().zip(rule.weights()) {
            for &(y, wy) in &ys {
                for r in 0..n {
                    for s in 0..n {
                        g[r][s] += wx * wy * b.value(r, [x, y]) * b.value(s, [x, y]);
                    }
                }
            }
        }
        g
    }

    #[test]
    fn gram_matrix_is_diagonal() {
        for dim in [1, 2] {
            let b = Basis::new(dim);
            let g = gram(&b);
            for r in 0..b.len() {
                for s in 0..b.len() {
                    let expect = if r == s { b.norm_sq(r) } else { 0.0 };
                    assert!((g[r][s] - expect).abs() < 1e-14, "dim {dim} ({r},{s})");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = Basis::new(2);
        let xi = [0.31, -0.47];
        let e = 1e-6;
        for r in 0..b.len() {
            let g = b.grad(r, xi);
            for a in 0..2 {
                let mut p = xi;
                let mut m = xi;
                p[a] += e;
                m[a] -= e;
                let fd = (b.value(r, p) - b.value(r, m)) / (2.0 * e);
                assert!((fd - g[a]).abs() < 1e-8);
                let fd2 = [(b.grad(r, p)[0] - b.grad(r, m)[0]) / (2.0 * e), (b.grad(r, p)[1] - b.grad(r, m)[1]) / (2.0 * e)];
                let hs = b.hessian(r, xi);
                assert!((fd2[0] - hs[a][0]).abs() < 1e-7 && (fd2[1] - hs[a][1]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn taylor_conversion_reproduces_quadratic() {
        let b = Basis::new(2);
        let coef = b.from_taylor(0.5, [1.0, -2.0], [[3.0, 0.7], [0.7, -1.0]]);
        for xi in [[0.2, 0.9], [-1.0, 0.4], [0.0, 0.0]] {
            let exact = 0.5 + xi[0] - 2.0 * xi[1] + 0.5 * (3.0 * xi[0] * xi[0] + 1.4 * xi[0] * xi[1] - xi[1] * xi[1]);
            let got: f64 = (0..6).map(|r| coef[r] * b.value(r, xi)).sum();
            assert!((exact - got).abs() < 1e-14);
        }
    }
}
