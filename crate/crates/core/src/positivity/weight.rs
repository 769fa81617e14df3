//! The Slotboom weight `M = exp(-q psi_h)` at volume and face points, and the
//! weighted projection `c -> g` with `int g M r = int c r`.

use crate::dense::SmallLu;
use crate::error::{Error, Result};
use crate::field::{Field, FieldRole};
use crate::mesh::Point;
use crate::space::DgSpace;

/// Largest `|q psi|` accepted before `exp` leaves the double range.
pub const EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    charge: f64,
    nq: usize,
    nlf: usize,
    nfp: usize,
    /// `[k * nq + q]`
    vol: Vec<f64>,
    /// Own-side traces, `[(k * nlf + lf) * nfp + p]`.
    side: Vec<f64>,
}

impl WeightField {
    /// `M = exp(-q psi)` from a potential field.
    pub fn build(space: &DgSpace, psi: &Field, charge: f64) -> Result<Self> {
        let nb = space.nb();
        let (nq, nlf, nfp) = (space.nq(), space.num_local_faces(), space.nfp());
        let ncells = space.num_cells();
        let mut vol = Vec::with_capacity(ncells * nq);
        let mut side = Vec::with_capacity(ncells * nlf * nfp);
        let guard = |k: usize, e: f64| -> Result<f64> {
            if e.abs() > EXPONENT_LIMIT || !e.is_finite() {
                Err(Error::WeightOverflow { cell: k, value: e.abs(), limit: EXPONENT_LIMIT })
            } else {
                Ok(e.exp())
            }
        };
        for k in 0..ncells {
            let c = psi.cell(k);
            for q in 0..nq {
                let v: f64 = c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
                vol.push(guard(k, -charge * v)?);
            }
            for lf in 0..nlf {
                let ft = space.face_table(lf);
                for p in 0..nfp {
                    let v: f64 = c.iter().zip(&ft.phi[p * nb..(p + 1) * nb]).map(|(a, b)| a * b).sum();
                    side.push(guard(k, -charge * v)?);
                }
            }
        }
        Ok(Self { charge, nq, nlf, nfp, vol, side })
    }

    /// Weight sampled from an arbitrary positive function of position.
    pub fn from_fn(space: &DgSpace, f: impl Fn(Point) -> f64) -> Result<Self> {
        let (nq, nlf, nfp) = (space.nq(), space.num_local_faces(), space.nfp());
        let mut vol = Vec::new();
        let mut side = Vec::new();
        for k in 0..space.num_cells() {
            for &xi in space.vol_points() {
                vol.push(f(space.mesh().to_physical(k, xi)));
            }
            for lf in 0..nlf {
                for &xi in &space.face_table(lf).points {
                    side.push(f(space.mesh().to_physical(k, xi)));
                }
            }
        }
        if let Some(i) = vol.iter().chain(&side).position(|&m| !(m > 0.0 && m.is_finite())) {
            let cell = if i < vol.len() { i / nq } else { (i - vol.len()) / (nlf * nfp) };
            return Err(Error::SingularLocalSystem { what: "nonpositive weight", cell });
        }
        Ok(Self { charge: 0.0, nq, nlf, nfp, vol, side })
    }

    pub fn constant(space: &DgSpace, value: f64) -> Result<Self> {
        Self::from_fn(space, |_| value)
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    /// Values at the volume quadrature points of cell `k`.
    #[inline]
    pub fn vol(&self, k: usize) -> &[f64] {
        &self.vol[k * self.nq..(k + 1) * self.nq]
    }

    /// Own-side trace values on local face `lf` of cell `k`.
    #[inline]
    pub fn side(&self, k: usize, lf: usize) -> &[f64] {
        let o = (k * self.nlf + lf) * self.nfp;
        &self.side[o..o + self.nfp]
    }

    /// `{M}` on local face `lf` of cell `k` at face point `p`; boundary
    /// faces use the interior trace.
    pub fn face_avg(&self, space: &DgSpace, k: usize, lf: usize, p: usize) -> f64 {
        let own = self.side(k, lf)[p];
        match space.mesh().neighbor(k, lf) {
            Some(nk) => 0.5 * (own + self.side(nk, lf ^ 1)[p]),
            None => own,
        }
    }

    /// `a * M`.
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.vol.iter_mut().chain(out.side.iter_mut()).for_each(|m| *m *= a);
        out
    }

    pub fn min_value(&self) -> f64 {
        self.vol.iter().chain(&self.side).copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solve `int_K g M r = int_K c r` cell by cell.
pub fn weighted_projection(space: &DgSpace, c: &Field, weight: &WeightField) -> Result<Field> {
    let nb = space.nb();
    let mut g = Field::zeros(space, FieldRole::Auxiliary);
    let mut mat = vec![0.0; nb * nb];
    let mut rhs = vec![0.0; nb];
    let w = space.vol_weights();
    for k in 0..space.num_cells() {
        let m = weight.vol(k);
        if m.iter().all(|&v| v == m[0]) {
            // the weighted mass matrix is m0 times the diagonal mass matrix
            g.cell_mut(k).iter_mut().zip(c.cell(k)).for_each(|(gi, ci)| *gi = ci / m[0]);
            continue;
        }
        mat.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..space.nq() {
            let phi = space.vol_phi(q);
            let wm = w[q] * m[q];
            for r in 0..nb {
                for s in r..nb {
                    mat[r * nb + s] += wm * phi[r] * phi[s];
                }
            }
        }
        for r in 0..nb {
            for s in 0..r {
                mat[r * nb + s] = mat[s * nb + r];
            }
        }
        let ck = c.cell(k);
        for r in 0..nb {
            rhs[r] = ck[r] * space.basis().norm_sq(r);
        }
        let lu = SmallLu::factor(nb, &mat).ok_or(Error::SingularLocalSystem { what: "weighted mass matrix", cell: k })?;
        lu.solve(&rhs, g.cell_mut(k));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::project_l2;
    use crate::mesh::Mesh;

    #[test]
    fn weights_from_potentials() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 3).unwrap());
        let zero = Field::zeros(&s, FieldRole::Potential);
        let m = WeightField::build(&s, &zero, 1.0).unwrap();
        assert!(m.vol.iter().chain(&m.side).all(|&v| v == 1.0));

        let ln2 = Field::constant(&s, 2f64.ln(), FieldRole::Potential);
        let m = WeightField::build(&s, &ln2, 1.0).unwrap();
        assert!(m.vol.iter().chain(&m.side).all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn exponential_trace_on_one_cell() {
        let s = DgSpace::new(Mesh::interval(0.0, 2.0, 2).unwrap());
        let psi = project_l2(&s, |x| x[0], FieldRole::Potential);
        let m = WeightField::build(&s, &psi, -1.0).unwrap();
        // right face of the cell [0, 1]
        assert!((m.side(0, 1)[0] - std::f64::consts::E).abs() < 1e-14);
        assert!((m.face_avg(&s, 0, 1, 0) - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn overflow_is_guarded() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 2).unwrap());
        let psi = Field::constant(&s, 800.0, FieldRole::Potential);
        assert!(matches!(WeightField::build(&s, &psi, 1.0), Err(Error::WeightOverflow { .. })));
    }

    #[test]
    fn projection_with_constant_weights() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 3, 3).unwrap());
        let c = project_l2(&s, |x| 1.0 + x[0] * x[1] + x[1] * x[1], FieldRole::Density);
        let g = weighted_projection(&s, &c, &WeightField::constant(&s, 1.0).unwrap()).unwrap();
        assert!(g.max_abs_diff(&c) < 1e-13);
        let g = weighted_projection(&s, &c, &WeightField::constant(&s, 2.0).unwrap()).unwrap();
        let mut half = c.clone();
        half.scale(0.5);
        assert!(g.max_abs_diff(&half) < 1e-13);
    }

    #[test]
    fn projection_residual_with_exponential_weight() {
        let s = DgSpace::new(Mesh::interval(0.0, 2.0, 2).unwrap());
        let c = project_l2(&s, |x| 1.0 + x[0], FieldRole::Density);
        let m = WeightField::from_fn(&s, |x| (-x[0]).exp()).unwrap();
        let g = weighted_projection(&s, &c, &m).unwrap();
        let jac = s.cell_jacobian();
        for r in 0..3 {
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for q in 0..s.nq() {
                let phi = s.vol_phi(q);
                let gv: f64 = (0..3).map(|i| g.cell(0)[i] * phi[i]).sum();
                let cv: f64 = (0..3).map(|i| c.cell(0)[i] * phi[i]).sum();
                lhs += s.vol_weights()[q] * jac * gv * m.vol(0)[q] * phi[r];
                rhs += s.vol_weights()[q] * jac * cv * phi[r];
            }
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_average_of_g_is_plain_average_of_c() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 4, 4).unwrap());
        let c = project_l2(&s, |x| 2.0 + (3.0 * x[0]).sin() * x[1], FieldRole::Density);
        let m = WeightField::from_fn(&s, |x| (0.7 * x[0] - 1.3 * x[1] * x[1]).exp()).unwrap();
        let g = weighted_projection(&s, &c, &m).unwrap();
        for k in 0..s.num_cells() {
            let w = s.vol_weights();
            let num: f64 = (0..s.nq())
                .map(|q| w[q] * m.vol(k)[q] * g.cell(k).iter().zip(s.vol_phi(q)).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            let cell_ref = 4.0;
            assert!((num / cell_ref - c.cell_average(k)).abs() < 1e-13);
        }
    }
}
