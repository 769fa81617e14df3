//! The discrete space `V_h` on a mesh together with the reference-element
//! tables (basis values and derivatives at volume and face quadrature
//! points) shared by every assembly loop.

use crate::basis::Basis;
use crate::mesh::{Mesh, Point, Side};
use crate::quadrature::{QuadRule, DEFAULT_POINTS};

/// Basis data on one local face of the reference element.
#[derive(Debug, Clone)]
pub struct FaceTable {
    pub side: Side,
    /// Reference coordinates of the face quadrature points.
    pub points: Vec<Point>,
    /// Reference quadrature weights along the face (sum 2 in 2D, 1 in 1D).
    pub weights: Vec<f64>,
    /// `phi[p * nb + r]`
    pub phi: Vec<f64>,
    /// Reference derivative along the face axis, `[p * nb + r]`.
    pub dn: Vec<f64>,
    /// Second reference derivative along the face axis.
    pub dnn: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: Mesh,
    basis: Basis,
    rule: QuadRule,
    nb: usize,
    vol_points: Vec<Point>,
    vol_weights: Vec<f64>,
    vol_phi: Vec<f64>,
    vol_grad: Vec<[f64; 2]>,
    faces: Vec<FaceTable>,
}

impl DgSpace {
    pub fn new(mesh: Mesh) -> Self {
        let rule = QuadRule::gauss(DEFAULT_POINTS).expect("default rule is supported");
        Self::with_rule(mesh, rule)
    }

    pub fn with_rule(mesh: Mesh, rule: QuadRule) -> Self {
        let dim = mesh.dim();
        let basis = Basis::new(dim);
        let nb = basis.len();
        let nodes = rule.nodes().to_vec();
        let w = rule.weights().to_vec();
        let l = nodes.len();

        let mut vol_points = Vec::new();
        let mut vol_weights = Vec::new();
        if dim == 1 {
            for t in 0..l {
                vol_points.push([nodes[t], 0.0]);
                vol_weights.push(w[t]);
            }
        } else {
            for ty in 0..l {
                for tx in 0..l {
                    vol_points.push([nodes[tx], nodes[ty]]);
                    vol_weights.push(w[tx] * w[ty]);
                }
            }
        }
        let mut vol_phi = Vec::with_capacity(vol_points.len() * nb);
        let mut vol_grad = Vec::with_capacity(vol_points.len() * nb);
        for &xi in &vol_points {
            for r in 0..nb {
                vol_phi.push(basis.value(r, xi));
                vol_grad.push(basis.grad(r, xi));
            }
        }

        let faces = (0..2 * dim)
            .map(|lf| {
                let side = Side::from_local_face(lf);
                let axis = side.axis();
                let s = side.outward_sign();
                let (points, weights): (Vec<Point>, Vec<f64>) = if dim == 1 {
                    (vec![[s, 0.0]], vec![1.0])
                } else {
                    nodes
                        .iter()
                        .zip(&w)
                        .map(|(&t, &wt)| if axis == 0 { ([s, t], wt) } else { ([t, s], wt) })
                        .unzip()
                };
                let mut phi = Vec::new();
                let mut dn = Vec::new();
                let mut dnn = Vec::new();
                for &xi in &points {
                    for r in 0..nb {
                        phi.push(basis.value(r, xi));
                        dn.push(basis.grad(r, xi)[axis]);
                        dnn.push(basis.hessian(r, xi)[axis][axis]);
                    }
                }
                FaceTable { side, points, weights, phi, dn, dnn }
            })
            .collect();

        Self { mesh, basis, rule, nb, vol_points, vol_weights, vol_phi, vol_grad, faces }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    /// Basis functions per cell.
    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }

    pub fn num_dofs(&self) -> usize {
        self.nb * self.mesh.num_cells()
    }

    /// Volume quadrature points per cell.
    pub fn nq(&self) -> usize {
        self.vol_points.len()
    }

    /// Quadrature points per local face.
    pub fn nfp(&self) -> usize {
        self.faces[0].points.len()
    }

    pub fn num_local_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vol_points(&self) -> &[Point] {
        &self.vol_points
    }

    /// Reference volume weights (sum `2^dim`).
    pub fn vol_weights(&self) -> &[f64] {
        &self.vol_weights
    }

    #[inline]
    pub fn vol_phi(&self, q: usize) -> &[f64] {
        &self.vol_phi[q * self.nb..(q + 1) * self.nb]
    }

    #[inline]
    pub fn vol_grad(&self, q: usize) -> &[[f64; 2]] {
        &self.vol_grad[q * self.nb..(q + 1) * self.nb]
    }

    pub fn face_table(&self, lf: usize) -> &FaceTable {
        &self.faces[lf]
    }

    /// Jacobian of the reference-to-cell map.
    pub fn cell_jacobian(&self) -> f64 {
        if self.dim() == 1 {
            0.5 * self.mesh.h(0)
        } else {
            0.25 * self.mesh.h(0) * self.mesh.h(1)
        }
    }

    /// Jacobian of the reference-to-face map for faces normal to `axis`.
    pub fn face_jacobian(&self, axis: usize) -> f64 {
        if self.dim() == 1 {
            1.0
        } else {
            0.5 * self.mesh.h(1 - axis)
        }
    }

    /// Chain-rule factor `2 / h` along `axis`.
    #[inline]
    pub fn deriv_scale(&self, axis: usize) -> f64 {
        2.0 / self.mesh.h(axis)
    }

    /// Physical-cell integral of the square of basis function `r`.
    pub fn mass(&self, r: usize) -> f64 {
        self.basis.norm_sq(r) * self.cell_jacobian()
    }

    /// Quadrature lines per axis per cell used by the test sets.
    pub fn lines_per_axis(&self) -> usize {
        if self.dim() == 1 {
            1
        } else {
            self.rule.len()
        }
    }

    /// Volume point index of the `tau`-th node along line `s` of `axis`.
    #[inline]
    pub fn line_vol_index(&self, axis: usize, s: usize, tau: usize) -> usize {
        let l = self.rule.len();
        match (self.dim(), axis) {
            (1, _) => tau,
            (_, 0) => tau + l * s,
            _ => s + l * tau,
        }
    }

    /// Reference point at coordinate `t` along line `s` of `axis`.
    pub fn line_point(&self, axis: usize, s: usize, t: f64) -> Point {
        if self.dim() == 1 {
            return [t, 0.0];
        }
        let node = self.rule.nodes()[s];
        if axis == 0 {
            [t, node]
        } else {
            [node, t]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        let s1 = DgSpace::new(Mesh::interval(0.0, 1.0, 4).unwrap());
        assert_eq!((s1.nb(), s1.nq(), s1.nfp(), s1.num_local_faces()), (3, 4, 1, 2));
        let s2 = DgSpace::new(Mesh::rectangle(1.0, 1.0, 2, 2).unwrap());
        assert_eq!((s2.nb(), s2.nq(), s2.nfp(), s2.num_local_faces()), (6, 16, 4, 4));
        assert_eq!(s2.num_dofs(), 24);
    }

    #[test]
    fn line_indices_follow_the_line() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 2, 2).unwrap());
        for axis in 0..2 {
            for line in 0..4 {
                for tau in 0..4 {
                    let q = s.line_vol_index(axis, line, tau);
                    let p = s.vol_points()[q];
                    let expect = s.line_point(axis, line, s.rule().nodes()[tau]);
                    assert_eq!(p, expect);
                }
            }
        }
    }

    #[test]
    fn face_points_match_line_endpoints() {
        let s = DgSpace::new(Mesh::rectangle(1.0, 1.0, 3, 2).unwrap());
        for lf in 0..4 {
            let ft = s.face_table(lf);
            let axis = ft.side.axis();
            for (p, pt) in ft.points.iter().enumerate() {
                let expect = s.line_point(axis, p, ft.side.outward_sign());
                assert_eq!(*pt, expect);
            }
        }
    }
}
