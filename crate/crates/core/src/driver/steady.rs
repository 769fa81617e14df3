//! Steady states `c_i = c_i^inf exp(-q_i phi_h)` and a fixed-point check.

use crate::driver::stepper::{Solver, State};
use crate::error::Result;
use crate::field::{point_evaluator, project_l2, Field, FieldRole};
use crate::space::DgSpace;

/// `L2` projection of `amp_i exp(-q_i phi)` for every species.
pub fn steady_state_init(space: &DgSpace, charges: &[f64], amplitudes: &[f64], phi: &Field) -> Vec<Field> {
    let eval = point_evaluator(space, phi);
    charges
        .iter()
        .zip(amplitudes)
        .map(|(&q, &a)| {
            if q == 0.0 {
                Field::constant(space, a, FieldRole::Density)
            } else {
                project_l2(space, |x| a * (-q * eval(x)).exp(), FieldRole::Density)
            }
        })
        .collect()
}

/// Amplitude that keeps the mass of `c`: `int c / int exp(-q phi)`.
pub fn fitted_amplitude(space: &DgSpace, c: &Field, charge: f64, phi: &Field) -> f64 {
    let jac = space.cell_jacobian();
    let w = space.vol_weights();
    let mut den = 0.0;
    for k in 0..space.num_cells() {
        for q in 0..space.nq() {
            let v: f64 = phi.cell(k).iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
            den += w[q] * jac * (-charge * v).exp();
        }
    }
    let mass = c.cell_averages().iter().sum::<f64>() * space.mesh().cell_measure();
    mass / den
}

/// Rebuild `state` as a steady state from its own potential, keeping each
/// species' mass.
pub fn refit_steady(solver: &Solver, state: &State) -> Result<State> {
    let space = solver.space();
    let charges = solver.problem().charges();
    let amps: Vec<f64> =
        state.densities.iter().zip(&charges).map(|(c, &q)| fitted_amplitude(space, c, q, &state.psi)).collect();
    let densities = steady_state_init(space, &charges, &amps, &state.psi);
    let mut s = solver.state_from(densities, state.t)?;
    s.step = state.step;
    Ok(s)
}

/// Change made by one step, over all species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepChange {
    /// Largest modal coefficient change.
    pub max_coeff: f64,
    /// `L2` norm of the change.
    pub l2: f64,
}

fn l2_diff(space: &DgSpace, a: &Field, b: &Field) -> f64 {
    let mut sum = 0.0;
    for k in 0..space.num_cells() {
        for (r, (x, y)) in a.cell(k).iter().zip(b.cell(k)).enumerate() {
            sum += space.mass(r) * (x - y) * (x - y);
        }
    }
    sum
}

/// Change per step over `steps` steps of size `dt`.
pub fn steady_check(solver: &Solver, state: &State, dt: f64, steps: usize) -> Result<Vec<StepChange>> {
    let space = solver.space();
    let mut s = state.clone();
    let mut changes = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (next, _, _) = solver.step(&s, dt)?;
        let pairs = s.densities.iter().zip(&next.densities);
        let max_coeff = pairs.clone().map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        let l2 = pairs.map(|(a, b)| l2_diff(space, a, b)).sum::<f64>().sqrt();
        changes.push(StepChange { max_coeff, l2 });
        s = next;
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn zero_potential_gives_constants() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 4).unwrap());
        let phi = Field::zeros(&s, FieldRole::Potential);
        let d = steady_state_init(&s, &[1.0, -1.0], &[3.0, 3.0], &phi);
        for c in d {
            assert!(c.max_abs_diff(&Field::constant(&s, 3.0, FieldRole::Density)) < 1e-14);
        }
    }

    #[test]
    fn neutral_species_ignores_potential() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 2, 2).unwrap());
        let phi = project_l2(&s, |x| x[0] - x[1], FieldRole::Potential);
        let d = steady_state_init(&s, &[0.0], &[1.5], &phi);
        assert_eq!(d[0], Field::constant(&s, 1.5, FieldRole::Density));
    }

    #[test]
    fn fitted_amplitude_recovers_amplitude() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 8).unwrap());
        let phi = project_l2(&s, |x| 0.3 * x[0] * x[0], FieldRole::Potential);
        let d = steady_state_init(&s, &[1.0], &[2.0], &phi);
        // projection error of exp(-phi) only
        assert!((fitted_amplitude(&s, &d[0], 1.0, &phi) - 2.0).abs() < 1e-6);
    }
}
