//! DDG transport operator for `c_t = div(M grad g)` with zero-flux walls,
//! and the cell-average update in decomposition form.

use crate::field::{eval_unchecked, Field, FieldRole};
use crate::flux::{ddg_flux, side_trace, FaceTrace, FluxParams};
use crate::poisson::ScalarFn;
use crate::positivity::testset::TestSet;
use crate::positivity::weight::WeightField;
use crate::space::DgSpace;

/// Source term `f(t, x)` to add to the right-hand side.
#[derive(Clone, Copy)]
pub struct Source<'a> {
    pub f: &'a ScalarFn,
    pub t: f64,
}

/// Weighted flux `{M} Fl(g)` and the jump correction data at point `p`
/// of interior face `face`.
struct FacePoint {
    m_avg: f64,
    flux: f64,
    g_minus_off: f64,
    g_plus_off: f64,
}

fn face_point(space: &DgSpace, g: &Field, weight: &WeightField, params: &FluxParams, face: usize, p: usize) -> Option<FacePoint> {
    let f = space.mesh().face(face);
    let (km, kp) = (f.minus?, f.plus?);
    let lo = 2 * f.axis;
    let tm = side_trace(space, g.cell(km), lo + 1, p);
    let tp = side_trace(space, g.cell(kp), lo, p);
    let trace = FaceTrace { minus: tm, plus: tp, h_e: space.mesh().h(f.axis) };
    let m_avg = 0.5 * (weight.side(km, lo + 1)[p] + weight.side(kp, lo)[p]);
    let avg = trace.avg();
    Some(FacePoint { m_avg, flux: ddg_flux(&trace, params), g_minus_off: tm.value - avg, g_plus_off: tp.value - avg })
}

/// Weak-form residual `R_r = -int M grad g . grad phi_r + faces (+ int f phi_r)`
/// for every cell and basis function.
pub fn np_residual(space: &DgSpace, g: &Field, weight: &WeightField, params: &FluxParams, source: Option<Source>) -> Field {
    let nb = space.nb();
    let dim = space.dim();
    let mut r = Field::zeros(space, FieldRole::Increment);
    let jac = space.cell_jacobian();
    let scale = [space.deriv_scale(0), if dim == 2 { space.deriv_scale(1) } else { 0.0 }];
    let vw = space.vol_weights();

    for k in 0..space.num_cells() {
        let c = g.cell(k);
        let m = weight.vol(k);
        let out = r.cell_mut(k);
        for q in 0..space.nq() {
            let grad = space.vol_grad(q);
            let mut dg = [0.0; 2];
            for (i, ci) in c.iter().enumerate() {
                dg[0] += ci * grad[i][0];
                dg[1] += ci * grad[i][1];
            }
            let wq = vw[q] * jac * m[q];
            let (gx, gy) = (dg[0] * scale[0] * scale[0], dg[1] * scale[1] * scale[1]);
            for (o, gr) in out.iter_mut().zip(grad) {
                *o -= wq * (gx * gr[0] + gy * gr[1]);
            }
        }
        if let Some(src) = source {
            for q in 0..space.nq() {
                let x = space.mesh().to_physical(k, space.vol_points()[q]);
                let wf = vw[q] * jac * (src.f)(src.t, x);
                for (o, phi) in out.iter_mut().zip(space.vol_phi(q)) {
                    *o += wf * phi;
                }
            }
        }
    }

    for (idx, face) in space.mesh().interior_faces() {
        let (km, kp) = (face.minus.unwrap(), face.plus.unwrap());
        let a = face.axis;
        let s = space.deriv_scale(a);
        let fj = space.face_jacobian(a);
        let (tm, tp) = (space.face_table(2 * a + 1), space.face_table(2 * a));
        for p in 0..space.nfp() {
            let fp = face_point(space, g, weight, params, idx, p).expect("interior face");
            let w = tm.weights[p] * fj * fp.m_avg;
            let (om, op) = (p * nb, p * nb);
            {
                let out = r.cell_mut(km);
                for i in 0..nb {
                    out[i] += w * (fp.flux * tm.phi[om + i] + fp.g_minus_off * s * tm.dn[om + i]);
                }
            }
            let out = r.cell_mut(kp);
            for i in 0..nb {
                out[i] -= w * (fp.flux * tp.phi[op + i] + fp.g_plus_off * s * tp.dn[op + i]);
            }
        }
    }
    r
}

/// Time derivative of the density coefficients: residual times the inverse
/// of the (diagonal) unweighted mass matrix.
pub fn np_rhs(space: &DgSpace, g: &Field, weight: &WeightField, params: &FluxParams, source: Option<Source>) -> Field {
    let mut r = np_residual(space, g, weight, params, source);
    apply_inverse_mass(space, &mut r);
    r
}

pub fn apply_inverse_mass(space: &DgSpace, r: &mut Field) {
    let inv: Vec<f64> = (0..space.nb()).map(|i| 1.0 / space.mass(i)).collect();
    for k in 0..space.num_cells() {
        r.cell_mut(k).iter_mut().zip(&inv).for_each(|(v, m)| *v *= m);
    }
}

/// Forward Euler update `c + dt * rhs`.
pub fn euler_update(
    space: &DgSpace,
    c: &Field,
    g: &Field,
    weight: &WeightField,
    params: &FluxParams,
    dt: f64,
    source: Option<Source>,
) -> Field {
    let rhs = np_rhs(space, g, weight, params, source);
    let mut out = c.clone();
    out.axpy(dt, &rhs);
    out.with_role(FieldRole::Density)
}

/// Cell averages after one Euler step, written as convex-looking
/// combinations of `g` on the test sets plus face fluxes evaluated on each
/// quadrature line. Without a source it agrees with the `v = 1` component of
/// the weak form whenever `g` is the weighted projection of the density.
pub fn decomposed_cell_averages(
    space: &DgSpace,
    g: &Field,
    weight: &WeightField,
    ts: &TestSet,
    params: &FluxParams,
    dt: f64,
) -> Vec<f64> {
    let dim = space.dim();
    let lpa = space.lines_per_axis();
    let mesh = space.mesh();
    let mu_axis: Vec<f64> = (0..dim).map(|a| dt / (mesh.h(a) * mesh.h(a))).collect();
    let mu: f64 = mu_axis.iter().sum();
    // 1D: a single line with weight 1; 2D: averaged Gauss weights.
    let line_w: Vec<f64> = if dim == 1 { vec![1.0] } else { space.rule().averaged_weights() };

    let flux_at = |k: usize, lf: usize, p: usize| -> f64 {
        let f = mesh.cell_face(k, lf);
        match face_point(space, g, weight, params, f, p) {
            Some(fp) => fp.m_avg * fp.flux,
            None => 0.0,
        }
    };

    (0..space.num_cells())
        .map(|k| {
            let mut total = 0.0;
            for a in 0..dim {
                let h = mesh.h(a);
                let mut sum = 0.0;
                for s in 0..lpa {
                    let line = ts.line(k, a, s);
                    let avg: f64 = line
                        .nodes()
                        .iter()
                        .zip(&line.omega)
                        .map(|(&t, &w)| w * eval_unchecked(space, g.cell(k), space.line_point(a, s, t)))
                        .sum();
                    let jump = flux_at(k, 2 * a + 1, s) - flux_at(k, 2 * a, s);
                    sum += line_w[s] * (avg + mu * h * jump);
                }
                total += mu_axis[a] / mu * sum;
            }
            total
        })
        .collect()
}
