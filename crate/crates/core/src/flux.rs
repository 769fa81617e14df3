//! Face traces and the DDG diffusive flux
//! `Fl(w) = beta0 [w] / h_e + {d_n w} + beta1 h_e [d_n^2 w]`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::DgSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub beta0: f64,
    pub beta1: f64,
}

impl FluxParams {
    pub const fn new(beta0: f64, beta1: f64) -> Self {
        Self { beta0, beta1 }
    }

    /// Range in which the transport scheme is positivity preserving:
    /// `1/8 <= beta1 <= 1/4`, `beta0 >= 1`.
    pub fn in_positivity_range(&self) -> bool {
        (0.125..=0.25).contains(&self.beta1) && self.beta0 >= 1.0
    }

    pub fn check_positivity_range(&self) -> Result<()> {
        if self.in_positivity_range() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "(beta0, beta1) = ({}, {}) outside the positivity range beta0 >= 1, beta1 in [1/8, 1/4]",
                self.beta0, self.beta1
            )))
        }
    }
}

/// One-sided trace: value, normal derivative and second normal derivative,
/// all taken along the face normal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SideTrace {
    pub value: f64,
    pub dn: f64,
    pub dnn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceTrace {
    pub minus: SideTrace,
    pub plus: SideTrace,
    pub h_e: f64,
}

impl FaceTrace {
    /// Boundary trace: both sides carry the interior data, so all jumps vanish.
    pub fn one_sided(side: SideTrace, h_e: f64) -> Self {
        Self { minus: side, plus: side, h_e }
    }

    pub fn jump(&self) -> f64 {
        self.plus.value - self.minus.value
    }

    pub fn avg(&self) -> f64 {
        0.5 * (self.minus.value + self.plus.value)
    }

    pub fn avg_dn(&self) -> f64 {
        0.5 * (self.minus.dn + self.plus.dn)
    }

    pub fn jump_dn(&self) -> f64 {
        self.plus.dn - self.minus.dn
    }

    pub fn jump_dnn(&self) -> f64 {
        self.plus.dnn - self.minus.dnn
    }

    /// `a * self + b * other`, on the same face.
    pub fn combine(&self, a: f64, other: &FaceTrace, b: f64) -> FaceTrace {
        let mix = |x: SideTrace, y: SideTrace| SideTrace {
            value: a * x.value + b * y.value,
            dn: a * x.dn + b * y.dn,
            dnn: a * x.dnn + b * y.dnn,
        };
        FaceTrace { minus: mix(self.minus, other.minus), plus: mix(self.plus, other.plus), h_e: self.h_e }
    }
}

pub fn ddg_flux(trace: &FaceTrace, params: &FluxParams) -> f64 {
    params.beta0 * trace.jump() / trace.h_e + trace.avg_dn() + params.beta1 * trace.h_e * trace.jump_dnn()
}

/// Trace of cell coefficients `coeffs` at point `p` of local face `lf`.
pub fn side_trace(space: &DgSpace, coeffs: &[f64], lf: usize, p: usize) -> SideTrace {
    let ft = space.face_table(lf);
    let nb = space.nb();
    let s = space.deriv_scale(ft.side.axis());
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for (r, c) in coeffs.iter().enumerate() {
        v += c * ft.phi[p * nb + r];
        d += c * ft.dn[p * nb + r];
        dd += c * ft.dnn[p * nb + r];
    }
    SideTrace { value: v, dn: s * d, dnn: s * s * dd }
}

/// Trace of `field` on mesh face `face` at face quadrature point `p`.
pub fn face_trace(space: &DgSpace, field: &Field, face: usize, p: usize) -> FaceTrace {
    let f = space.mesh().face(face);
    let h_e = space.mesh().h(f.axis);
    let lo = 2 * f.axis;
    let minus = f.minus.map(|k| side_trace(space, field.cell(k), lo + 1, p));
    let plus = f.plus.map(|k| side_trace(space, field.cell(k), lo, p));
    match (minus, plus) {
        (Some(m), Some(pl)) => FaceTrace { minus: m, plus: pl, h_e },
        (Some(s), None) | (None, Some(s)) => FaceTrace::one_sided(s, h_e),
        (None, None) => unreachable!("face without cells"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{project_l2, FieldRole};
    use crate::mesh::Mesh;
    use proptest::prelude::*;

    fn trace(jump: f64, avg_dn: f64, jump_dnn: f64, h_e: f64) -> FaceTrace {
        FaceTrace {
            minus: SideTrace { value: 0.0, dn: avg_dn, dnn: 0.0 },
            plus: SideTrace { value: jump, dn: avg_dn, dnn: jump_dnn },
            h_e,
        }
    }

    #[test]
    fn smooth_data_gives_the_derivative() {
        for p in [FluxParams::new(4.0, 1.0 / 6.0), FluxParams::new(100.0, -3.0)] {
            assert_eq!(ddg_flux(&trace(0.0, 2.0, 0.0, 0.3), &p), 2.0);
        }
    }

    #[test]
    fn hand_evaluated_flux() {
        let f = ddg_flux(&trace(0.01, 2.0, 3.0, 0.1), &FluxParams::new(4.0, 1.0 / 6.0));
        assert!((f - 2.45).abs() < 1e-14);
        let f = ddg_flux(&trace(1.0, 0.0, 0.0, 1.0), &FluxParams::new(1.0, 0.125));
        assert_eq!(f, 1.0);
    }

    #[test]
    fn traces_of_simple_fields() {
        let s = DgSpace::new(Mesh::interval(0.0, 1.0, 2).unwrap());
        let interior = s.mesh().interior_faces().next().unwrap().0;

        let c = Field::constant(&s, 2.0, FieldRole::Other);
        let t = face_trace(&s, &c, interior, 0);
        assert_eq!((t.jump(), t.avg()), (0.0, 2.0));

        let x = project_l2(&s, |p| p[0], FieldRole::Other);
        let t = face_trace(&s, &x, interior, 0);
        assert!(t.jump().abs() < 1e-15 && (t.avg_dn() - 1.0).abs() < 1e-14 && t.jump_dnn().abs() < 1e-14);

        let mut steps = Field::zeros(&s, FieldRole::Other);
        steps.cell_mut(0)[0] = 1.0;
        steps.cell_mut(1)[0] = 2.0;
        let t = face_trace(&s, &steps, interior, 0);
        assert_eq!((t.jump(), t.avg()), (1.0, 1.5));
    }

    #[test]
    fn global_quadratic_flux_is_normal_derivative() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 3, 3).unwrap());
        let p = |x: [f64; 2]| 1.0 + 0.3 * x[0] - x[1] + 2.0 * x[0] * x[0] + 0.5 * x[0] * x[1] - x[1] * x[1];
        let grad = |x: [f64; 2]| [0.3 + 4.0 * x[0] + 0.5 * x[1], -1.0 + 0.5 * x[0] - 2.0 * x[1]];
        let f = project_l2(&s, p, FieldRole::Other);
        let params = FluxParams::new(16.0, 1.0 / 6.0);
        for (idx, face) in s.mesh().interior_faces() {
            for q in 0..s.nfp() {
                let t = face_trace(&s, &f, idx, q);
                let xi = s.face_table(2 * face.axis + 1).points[q];
                let x = s.mesh().to_physical(face.minus.unwrap(), xi);
                assert!(t.jump().abs() < 1e-13);
                assert!((ddg_flux(&t, &params) - grad(x)[face.axis]).abs() < 1e-12);
            }
        }
    }

    fn arb_trace() -> impl Strategy<Value = FaceTrace> {
        (prop::array::uniform6(-10.0..10.0f64), 0.01..1.0f64).prop_map(|(v, h)| FaceTrace {
            minus: SideTrace { value: v[0], dn: v[1], dnn: v[2] },
            plus: SideTrace { value: v[3], dn: v[4], dnn: v[5] },
            h_e: h,
        })
    }

    proptest! {
        #[test]
        fn flux_is_linear(t1 in arb_trace(), t2 in arb_trace(), a in -5.0..5.0f64, b in -5.0..5.0f64,
                          b0 in 0.0..20.0f64, b1 in 0.0..0.5f64) {
            let t2 = FaceTrace { h_e: t1.h_e, ..t2 };
            let p = FluxParams::new(b0, b1);
            let lhs = ddg_flux(&t1.combine(a, &t2, b), &p);
            let rhs = a * ddg_flux(&t1, &p) + b * ddg_flux(&t2, &p);
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn jump_and_average_consistent(t in arb_trace()) {
            prop_assert!((t.avg() + 0.5 * t.jump() - t.plus.value).abs() < 1e-13);
            prop_assert!((t.avg() - 0.5 * t.jump() - t.minus.value).abs() < 1e-13);
        }
    }
}
