//! Mesh-ratio bound `mu0` under which one Euler step keeps every cell
//! average positive.
//!
//! In 2D the ratio is `mu = dt/dx^2 + dt/dy^2` and the bound is the
//! minimum of the 1D bound over every quadrature line in both directions.
//! Zero-flux boundary faces carry no flux and so contribute no weight.

use crate::error::Result;
use crate::flux::FluxParams;
use crate::positivity::testset::{LineTest, TestSet};
use crate::positivity::weight::WeightField;
use crate::space::DgSpace;

pub fn alpha1(gamma: f64, beta1: f64) -> f64 {
    (8.0 * beta1 - 1.0 + gamma) / (2.0 * (1.0 + gamma))
}

pub fn alpha3(gamma: f64, beta0: f64, beta1: f64) -> f64 {
    beta0 + (8.0 * beta1 - 3.0 + gamma) / (2.0 * (1.0 - gamma))
}

/// The three candidate bounds of one line with face weights `m_l`, `m_r`:
/// the left endpoint, the interior point and the right endpoint.
pub fn line_terms(line: &LineTest, m_l: f64, m_r: f64, params: &FluxParams) -> [f64; 3] {
    let (b0, b1) = (params.beta0, params.beta1);
    let g = line.gamma;
    let [w1, w2, w3] = line.omega;
    let div = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let left = div(w1, alpha3(-g, b0, b1) * m_l + alpha1(g, b1) * m_r);
    let right = div(w3, alpha3(g, b0, b1) * m_r + alpha1(-g, b1) * m_l);
    let mid = div(w2 * (1.0 - g * g), 2.0 * (1.0 - 4.0 * b1) * (m_l + m_r));
    [left, mid, right]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CflReport {
    pub mu0: f64,
    /// Bound per axis; `f64::INFINITY` for the missing axis in 1D.
    pub mu0_axis: [f64; 2],
    /// Per-cell minimum over its lines and axes.
    pub cell_mu0: Vec<f64>,
    /// Candidate terms per line, indexed like the test-set lines.
    pub terms: Vec<[f64; 3]>,
    /// `(alpha1(gamma), alpha1(-gamma), alpha3(gamma), alpha3(-gamma))` per line.
    pub alphas: Vec<[f64; 4]>,
    pub worst_cell: usize,
}

/// `mu = sum_axis dt / h_axis^2`.
pub fn mesh_ratio(space: &DgSpace, dt: f64) -> f64 {
    (0..space.dim()).map(|a| dt / space.mesh().h(a).powi(2)).sum()
}

/// Face weight seen by cell `k` on local face `lf` at line `s`: `{M}` on
/// interior faces, zero on the walls.
fn face_weight(space: &DgSpace, weight: &WeightField, k: usize, lf: usize, s: usize) -> f64 {
    if space.mesh().neighbor(k, lf).is_some() {
        let p = if space.dim() == 1 { 0 } else { s };
        weight.face_avg(space, k, lf, p)
    } else {
        0.0
    }
}

pub fn cfl_mu0(space: &DgSpace, weight: &WeightField, ts: &TestSet, params: &FluxParams) -> Result<CflReport> {
    params.check_positivity_range()?;
    let dim = space.dim();
    let lpa = space.lines_per_axis();
    let n = space.num_cells();
    let mut terms = Vec::with_capacity(n * dim * lpa);
    let mut alphas = Vec::with_capacity(n * dim * lpa);
    let mut cell_mu0 = vec![f64::INFINITY; n];
    let mut mu0_axis = [f64::INFINITY; 2];
    for k in 0..n {
        for a in 0..dim {
            for s in 0..lpa {
                let line = ts.line(k, a, s);
                let m_l = face_weight(space, weight, k, 2 * a, s);
                let m_r = face_weight(space, weight, k, 2 * a + 1, s);
                let t = line_terms(line, m_l, m_r, params);
                let g = line.gamma;
                alphas.push([
                    alpha1(g, params.beta1),
                    alpha1(-g, params.beta1),
                    alpha3(g, params.beta0, params.beta1),
                    alpha3(-g, params.beta0, params.beta1),
                ]);
                let low = t.iter().copied().fold(f64::INFINITY, f64::min);
                cell_mu0[k] = cell_mu0[k].min(low);
                mu0_axis[a] = mu0_axis[a].min(low);
                terms.push(t);
            }
        }
    }
    let (worst_cell, mu0) = cell_mu0
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    Ok(CflReport { mu0, mu0_axis, cell_mu0, terms, alphas, worst_cell })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::field::{Field, FieldRole};
    use crate::mesh::Mesh;
    use crate::positivity::testset::build_test_set;
    use crate::positivity::transport::decomposed_cell_averages;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_line() -> LineTest {
        LineTest { moments: [1.0, 0.0, 1.0 / 3.0], a: -1.0 / 3.0, b: 1.0 / 3.0, gamma: 0.0, omega: [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0] }
    }

    #[test]
    fn worked_value() {
        let p = FluxParams::new(1.0, 1.0 / 6.0);
        assert!((alpha1(0.0, p.beta1) - 1.0 / 6.0).abs() < 1e-15);
        assert!((alpha3(0.0, p.beta0, p.beta1) - 1.0 / 6.0).abs() < 1e-15);
        let t = line_terms(&unit_line(), 1.0, 1.0, &p);
        for v in t {
            assert!((v - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn worked_value_on_a_mesh() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 6).unwrap());
        let m = WeightField::constant(&s, 1.0).unwrap();
        let p = FluxParams::new(1.0, 1.0 / 6.0);
        let ts = build_test_set(&s, &m, p.beta1).unwrap();
        let rep = cfl_mu0(&s, &m, &ts, &p).unwrap();
        assert!((rep.mu0 - 0.5).abs() < 1e-13);
    }

    #[test]
    fn quarter_beta1_drops_the_middle_term() {
        let p = FluxParams::new(2.0, 0.25);
        let t = line_terms(&unit_line(), 1.0, 1.0, &p);
        assert!(t[1].is_infinite());
        assert!(t[0].is_finite());
    }

    #[test]
    fn out_of_range_params_are_rejected() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 3).unwrap());
        let m = WeightField::constant(&s, 1.0).unwrap();
        let ts = build_test_set(&s, &m, 1.0 / 6.0).unwrap();
        let r = cfl_mu0(&s, &m, &ts, &FluxParams::new(4.0, 1.0 / 24.0));
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn invariant_under_weight_scaling() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 3, 3).unwrap());
        let p = FluxParams::new(4.0, 1.0 / 6.0);
        let m = WeightField::from_fn(&s, |x| (0.8 * x[0] - 0.6 * x[1] * x[1]).exp()).unwrap();
        let m2 = m.scaled(2.0);
        let a = cfl_mu0(&s, &m, &build_test_set(&s, &m, p.beta1).unwrap(), &p).unwrap();
        let b = cfl_mu0(&s, &m2, &build_test_set(&s, &m2, p.beta1).unwrap(), &p).unwrap();
        assert!((a.mu0 - b.mu0).abs() <= 1e-12 * a.mu0);
        assert_eq!(a.mu0, a.mu0_axis[0].min(a.mu0_axis[1]));
    }

    /// Quadratic on cell `k` taking `vals` at the test points `-1, gamma, 1`.
    fn lagrange_cell(gamma: f64, vals: [f64; 3]) -> [f64; 3] {
        // monomial coefficients of p(xi) = a + b xi + c xi^2
        let [v1, v2, v3] = vals;
        let b = 0.5 * (v3 - v1);
        let mid = 0.5 * (v1 + v3);
        let c = (mid - v2 + b * gamma) / (1.0 - gamma * gamma);
        let a = mid - c;
        // to the Legendre basis: xi^2 = 2/3 L2 + 1/3
        [a + c / 3.0, b, 2.0 * c / 3.0]
    }

    /// The updated average of cell `j` is linear in the nine test values of
    /// cells `j-1, j, j+1`. At `mu = mu0` every coefficient is nonnegative,
    /// and slightly above it one of the own-cell coefficients turns
    /// negative.
    #[test]
    fn bound_is_sharp_for_the_linear_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [FluxParams::new(1.0, 1.0 / 6.0), FluxParams::new(4.0, 1.0 / 6.0), FluxParams::new(2.0, 0.2), FluxParams::new(1.5, 0.125)] {
            for _ in 0..10 {
                let n = 7;
                let s = DgSpace::new(Mesh::interval(0.0, 1.0, n).unwrap());
                let (a, b, c) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
                let m = WeightField::from_fn(&s, |x| (a * x[0] + b * x[0] * x[0] + c * (7.0 * x[0]).sin()).exp()).unwrap();
                let Ok(ts) = build_test_set(&s, &m, p.beta1) else { continue };
                let rep = cfl_mu0(&s, &m, &ts, &p).unwrap();
                let h = s.mesh().h(0);
                for j in 1..n - 1 {
                    let coeffs_at = |mu: f64| -> Vec<f64> {
                        let dt = mu * h * h;
                        let mut out = Vec::new();
                        for cell in j - 1..=j + 1 {
                            for node in 0..3 {
                                let mut vals = [0.0; 3];
                                vals[node] = 1.0;
                                let mut g = Field::zeros(&s, FieldRole::Auxiliary);
                                g.cell_mut(cell).copy_from_slice(&lagrange_cell(ts.line(cell, 0, 0).gamma, vals));
                                out.push(decomposed_cell_averages(&s, &g, &m, &ts, &p, dt)[j]);
                            }
                        }
                        out
                    };
                    let mu0 = rep.cell_mu0[j];
                    let at = coeffs_at(mu0);
                    let scale = at.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                    assert!(at.iter().all(|&v| v >= -1e-12 * scale), "{p:?} cell {j}: {at:?}");
                    let above = coeffs_at(1.01 * mu0);
                    assert!(above[3..6].iter().any(|&v| v < 0.0), "{p:?} cell {j}: {above:?}");
                }
            }
        }
    }
}
