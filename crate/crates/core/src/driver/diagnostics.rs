//! Mass, free energy and minima of a state.

use crate::field::Field;
use crate::poisson::ScalarFn;
use crate::space::DgSpace;

/// Floor applied inside the logarithm of the entropy term.
pub const ENTROPY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub mass: Vec<f64>,
    /// Free energy; a diagnostic convention, not a quantity of the scheme.
    pub energy: f64,
    pub min_avg: Vec<f64>,
    /// Smallest `g` on the test sets before limiting, per species. NaN when
    /// no test set could be built.
    pub min_g_pre: Vec<f64>,
    pub min_g_post: Vec<f64>,
    /// Cells limited during the step, summed over species and stages.
    pub limited: usize,
    /// Smallest CFL bound over the stages of the step; NaN when skipped.
    pub mu0: f64,
}

/// `sum_K |K| cbar_K`.
pub fn total_mass(space: &DgSpace, c: &Field) -> f64 {
    let m = space.mesh().cell_measure();
    c.cell_averages().iter().sum::<f64>() * m
}

pub fn min_cell_average(c: &Field) -> f64 {
    c.cell_averages().into_iter().fold(f64::INFINITY, f64::min)
}

/// `int sum_i c_i ln c_i + 1/2 int (sum_i q_i c_i + rho0) psi` by volume
/// quadrature. Returns the energy and whether the floor was hit.
pub fn free_energy(
    space: &DgSpace,
    densities: &[Field],
    charges: &[f64],
    psi: &Field,
    rho0: Option<&ScalarFn>,
    t: f64,
) -> (f64, bool) {
    let jac = space.cell_jacobian();
    let w = space.vol_weights();
    let eval = |c: &[f64], q: usize| -> f64 { c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum() };
    let mut e = 0.0;
    let mut clipped = false;
    for k in 0..space.num_cells() {
        for q in 0..space.nq() {
            let mut ent = 0.0;
            let mut rho = 0.0;
            for (c, &z) in densities.iter().zip(charges) {
                let v = eval(c.cell(k), q);
                if v < ENTROPY_FLOOR {
                    clipped = true;
                }
                ent += v * v.max(ENTROPY_FLOOR).ln();
                rho += z * v;
            }
            if let Some(f) = rho0 {
                rho += f(t, space.mesh().to_physical(k, space.vol_points()[q]));
            }
            e += w[q] * jac * (ent + 0.5 * rho * eval(psi.cell(k), q));
        }
    }
    (e, clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{project_l2, FieldRole};
    use crate::mesh::Mesh;

    #[test]
    fn neutral_energy() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 4).unwrap());
        let c = Field::constant(&s, 3.0, FieldRole::Density);
        let psi = Field::zeros(&s, FieldRole::Potential);
        let (e, clipped) = free_energy(&s, &[c.clone(), c], &[1.0, -1.0], &psi, None, 0.0);
        assert!((e - 6.0 * 3f64.ln()).abs() < 1e-13);
        assert!(!clipped);
    }

    #[test]
    fn unit_density_has_zero_energy() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 2, 2).unwrap());
        let c = Field::constant(&s, 1.0, FieldRole::Density);
        let psi = Field::zeros(&s, FieldRole::Potential);
        assert_eq!(free_energy(&s, &[c], &[1.0], &psi, None, 0.0).0, 0.0);
    }

    #[test]
    fn mass_of_linear_profile() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 5).unwrap());
        let c = project_l2(&s, |x| 4.0 - 2.0 * x[0], FieldRole::Density);
        assert!((total_mass(&s, &c) - 3.0).abs() < 1e-13);
        assert!((min_cell_average(&c) - 2.2).abs() < 1e-13);
    }
}
