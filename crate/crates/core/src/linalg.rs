//! Small dense solves: least squares, rank and nullspace via SVD.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    /// `‖A x − b‖∞`
    pub residual: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Pads `a` with zero rows so the SVD exposes all `ncols` right singular vectors.
fn padded(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m >= n {
        return a.clone();
    }
    let mut p = DMatrix::zeros(n, n);
    p.view_mut((0, 0), (m, n)).copy_from(a);
    p
}

fn cutoff(singular: &[f64], eps_rank: f64) -> f64 {
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    eps_rank * smax
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = padded(a).singular_values().iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with relative cutoff `eps_rank · σ_max`.
pub fn rank(a: &DMatrix<f64>, eps_rank: f64) -> usize {
    rank_with_floor(a, eps_rank, 0.0)
}

/// Rank with cutoff `eps_rank · max(σ_max, floor)`, so that a matrix that is
/// round-off relative to `floor` has rank zero.
pub fn rank_with_floor(a: &DMatrix<f64>, eps_rank: f64, floor: f64) -> usize {
    let s = singular_values(a);
    if s.first().copied().unwrap_or(0.0) == 0.0 {
        return 0;
    }
    let tol = cutoff(&s, eps_rank).max(eps_rank * floor);
    s.iter().filter(|&&v| v > tol).count()
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, eps_rank: f64) -> LstsqSolution {
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let x = if smax == 0.0 {
        DVector::zeros(n)
    } else {
        svd.solve(b, eps_rank * smax)
            .unwrap_or_else(|_| DVector::zeros(n))
    };
    let residual = (a * &x - b).amax();
    LstsqSolution {
        x,
        residual,
        rank: if smax == 0.0 {
            0
        } else {
            s.iter().filter(|&&v| v > eps_rank * smax).count()
        },
        singular_values: s,
    }
}

/// Orthonormal basis of the numerical nullspace, one vector per column.
pub fn nullspace(a: &DMatrix<f64>, eps_rank: f64) -> DMatrix<f64> {
    nullspace_with_floor(a, eps_rank, 0.0)
}

/// Nullspace with cutoff `eps_rank · max(σ_max, floor)`.
pub fn nullspace_with_floor(a: &DMatrix<f64>, eps_rank: f64, floor: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let p = padded(a);
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = eps_rank * smax.max(floor);
    let cols: Vec<DVector<f64>> = (0..s.len())
        .filter(|&i| s[i] <= tol)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Nullspace of `a` restricted to the span of the columns of `basis`.
///
/// Returns the basis of `{ basis·y : a·basis·y = 0 }`, orthonormalised.
pub fn restrict_nullspace(
    basis: &DMatrix<f64>,
    a: &DMatrix<f64>,
    eps_rank: f64,
    floor: f64,
) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return basis.clone();
    }
    let ab = a * basis;
    if ab.amax() == 0.0 {
        return basis.clone();
    }
    let y = nullspace_with_floor(&ab, eps_rank, floor);
    if y.ncols() == 0 {
        return DMatrix::zeros(basis.nrows(), 0);
    }
    let z = basis * y;
    let qr = z.qr();
    qr.q()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0]);
        let x = DVector::from_vec(vec![0.3, -1.7]);
        let b = &a * &x;
        let sol = lstsq(&a, &b, 1e-12);
        assert!((sol.x - x).amax() < 1e-12);
        assert!(sol.residual < 1e-12);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, -2.0]);
        let sol = lstsq(&a, &b, 1e-10);
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).amax() < 1e-12);
        assert_eq!(nullspace(&DMatrix::zeros(2, 3), 1e-10).ncols(), 3);
    }

    #[test]
    fn restricted_nullspace_intersects() {
        let a1 = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let a2 = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]);
        let b = nullspace(&a1, 1e-10);
        let c = restrict_nullspace(&b, &a2, 1e-10, 0.0);
        assert_eq!(c.ncols(), 1);
        assert!((c[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_rank() {
        assert_eq!(rank(&DMatrix::zeros(3, 3), 1e-8), 0);
        assert_eq!(rank(&DMatrix::identity(3, 3), 1e-8), 3);
        let tiny = DMatrix::identity(3, 3) * 1e-15;
        assert_eq!(rank(&tiny, 1e-8), 3);
        assert_eq!(rank_with_floor(&tiny, 1e-8, 1.0), 0);
        assert_eq!(nullspace_with_floor(&tiny, 1e-8, 1.0).ncols(), 3);
    }
}
