//! Small dense LU with partial pivoting for the per-cell weighted mass systems.

/// Largest supported size; the local systems are at most 6 x 6.
pub const MAX_N: usize = 6;

/// LU factors of an `n x n` row-major matrix, `n <= MAX_N`.
#[derive(Debug, Clone)]
pub struct SmallLu {
    n: usize,
    lu: [f64; MAX_N * MAX_N],
    perm: [usize; MAX_N],
}

impl SmallLu {
    /// Returns `None` when a pivot vanishes relative to the matrix scale.
    pub fn factor(n: usize, a: &[f64]) -> Option<Self> {
        assert!(n <= MAX_N && a.len() == n * n);
        let mut lu = [0.0; MAX_N * MAX_N];
        lu[..n * n].copy_from_slice(a);
        let mut perm = [0; MAX_N];
        perm.iter_mut().enumerate().for_each(|(i, p)| *p = i);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return None;
        }
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= 1e-14 * scale {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }
}
