//! Tridiagonal solvers: the Thomas sweep for general banded systems and a
//! prefactored solver for constant-coefficient symmetric circulant systems.

/// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return None;
    }
    c[0] = sup[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        c[i] = sup[i] / denom;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

/// Prefactored solver for the `n x n` circulant matrix with `diag` on the
/// diagonal and `off` on both off-diagonals and in the two corners.
///
/// Uses the rank-one (Sherman-Morrison) correction of a plain tridiagonal
/// system; the correction vector is computed once, so each solve is a single
/// forward/backward sweep plus an axpy. Requires `|diag| > 2 |off|`.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    off: f64,
    first_pivot: f64,
    /// Thomas multipliers `c'_i` of the modified system.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    /// `B^{-1} u` for the correction vector `u = [gamma, 0, .., 0, off]`.
    correction: Vec<f64>,
    /// `off / gamma`, the last entry of `v`.
    v_last: f64,
    denom: f64,
}

impl CyclicTridiagonal {
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        assert!(n >= 3, "cyclic system needs n >= 3");
        assert!(
            diag.abs() > 2.0 * off.abs(),
            "cyclic system must be strictly diagonally dominant"
        );
        let gamma = -diag;
        let mut b = vec![diag; n];
        b[0] = diag - gamma;
        b[n - 1] = diag - off * off / gamma;

        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        inv_pivot[0] = 1.0 / b[0];
        upper[0] = off * inv_pivot[0];
        for i in 1..n {
            let pivot = b[i] - off * upper[i - 1];
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off * inv_pivot[i];
        }

        let mut solver = Self {
            off,
            first_pivot: b[0],
            upper,
            inv_pivot,
            correction: Vec::new(),
            v_last: off / gamma,
            denom: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = off;
        let mut z = vec![0.0; n];
        solver.sweep(&u, &mut z);
        solver.denom = 1.0 + z[0] + solver.v_last * z[n - 1];
        solver.correction = z;
        solver
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    fn sweep(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.inv_pivot.len();
        out[0] = rhs[0] / self.first_pivot;
        for i in 1..n {
            out[i] = (rhs[i] - self.off * out[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            out[i] -= self.upper[i] * out[i + 1];
        }
    }

    /// Writes the solution of `A x = rhs` into `out`.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert!(rhs.len() == n && out.len() == n);
        self.sweep(rhs, out);
        let factor = (out[0] + self.v_last * out[n - 1]) / self.denom;
        for (x, z) in out.iter_mut().zip(&self.correction) {
            *x -= factor * z;
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        self.solve_into(rhs, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circulant_mul(diag: f64, off: f64, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| diag * x[k] + off * (x[(k + 1) % n] + x[(k + n - 1) % n]))
            .collect()
    }

    #[test]
    fn cyclic_matches_direct_multiplication() {
        for &(n, diag, off) in &[(3, 4.0, 1.0), (8, 2.5, -1.0), (1000, 1.0 + 2e6, -1e6)] {
            let solver = CyclicTridiagonal::new(n, diag, off);
            let rhs: Vec<f64> = (0..n).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
            let x = solver.solve(&rhs);
            let back = circulant_mul(diag, off, &x);
            let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in back.iter().zip(&rhs) {
                assert!((a - b).abs() <= 1e-9 * scale.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn thomas_small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3, 5, 3] -> x = [1, 1, 1]
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 5.0, 3.0])
            .unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).is_none());
    }
}
