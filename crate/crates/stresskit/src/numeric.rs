//! Rank-revealing helpers shared by the geometry and solver modules.
//!
//! All rank decisions use a relative cutoff `eps_rank * pivot_max`; values at
//! or below the cutoff count as zero (ties resolve toward lower rank). The
//! decompositions are column-pivoted QR rather than SVD: nalgebra's small-SVD
//! singular vectors lose accuracy on near-rank-deficient inputs, while pivoted
//! Householder QR stays backward stable.

use nalgebra::{DMatrix, DVector};

fn pivoted_qr_rank(r: &DMatrix<f64>, eps_rank: f64) -> usize {
    let k = r.nrows().min(r.ncols());
    if k == 0 {
        return 0;
    }
    let pivot_max = (0..k).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    if pivot_max <= 0.0 {
        return 0;
    }
    (0..k)
        .take_while(|&i| r[(i, i)].abs() > eps_rank * pivot_max)
        .count()
}

/// Numeric rank of `m` at the relative cutoff.
pub fn rank(m: &DMatrix<f64>, eps_rank: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let qr = m.clone().col_piv_qr();
    pivoted_qr_rank(&qr.r(), eps_rank)
}

/// Orthonormal basis for the column space of `m` (nrows x r, r = rank).
pub fn column_space(m: &DMatrix<f64>, eps_rank: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let qr = m.clone().col_piv_qr();
    let r = pivoted_qr_rank(&qr.r(), eps_rank);
    qr.q().columns(0, r).into_owned()
}

/// Extend a set of orthonormal columns to an orthonormal basis of R^n; the
/// returned matrix holds only the new vectors.
fn complete_basis(known: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut all: Vec<DVector<f64>> = known.to_vec();
    let mut fresh: Vec<DVector<f64>> = Vec::new();
    let mut i = 0;
    while all.len() < n && i < n {
        let mut cand = DVector::zeros(n);
        cand[i] = 1.0;
        // two orthogonalization passes
        for _ in 0..2 {
            for k in &all {
                let c = k.dot(&cand);
                cand -= k * c;
            }
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            cand /= norm;
            all.push(cand.clone());
            fresh.push(cand);
        }
        i += 1;
    }
    let mut out = DMatrix::zeros(n, fresh.len());
    for (j, col) in fresh.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

/// Orthonormal basis for the (right) nullspace of `m` (ncols x k): the
/// orthogonal complement of the row space. An empty matrix (zero rows) has
/// full nullspace.
pub fn nullspace(m: &DMatrix<f64>, eps_rank: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let row_space = column_space(&m.transpose(), eps_rank);
    let known: Vec<DVector<f64>> = (0..row_space.ncols())
        .map(|j| row_space.column(j).into_owned())
        .collect();
    complete_basis(&known, n)
}

/// Orthonormal basis of the orthogonal complement of the column span of `b`
/// (whose columns need not be orthonormal) inside R^n.
pub fn orthogonal_complement(b: &DMatrix<f64>, eps_rank: f64) -> DMatrix<f64> {
    let n = b.nrows();
    if b.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    nullspace(&b.transpose(), eps_rank)
}

/// Minimum-norm least-squares solution of `C x = d`: returns the solution and
/// the residual norm.
pub fn lstsq_min_norm(c: &DMatrix<f64>, d: &DVector<f64>, eps_rank: f64) -> (DVector<f64>, f64) {
    let n = c.ncols();
    let row_space = column_space(&c.transpose(), eps_rank);
    let r = row_space.ncols();
    if r == 0 {
        return (DVector::zeros(n), d.norm());
    }
    // substitute x = row_space · y and solve the full-column-rank system
    let a = c * &row_space;
    let qr = a.clone().qr();
    let qtd = qr.q().transpose() * d;
    let rr = qr.r();
    let mut y = qtd.rows(0, r).into_owned();
    if !rr.rows(0, r).columns(0, r).solve_upper_triangular_mut(&mut y) {
        // fall back to the normal equations on the reduced system
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * d;
        match gram.cholesky() {
            Some(ch) => y = ch.solve(&rhs),
            None => return (DVector::zeros(n), d.norm()),
        }
    }
    let x = &row_space * y;
    let residual = (c * &x - d).norm();
    (x, residual)
}

/// Residual of `b` against orthonormality of its columns.
pub fn orthonormality_residual(b: &DMatrix<f64>) -> f64 {
    let k = b.ncols();
    if k == 0 {
        return 0.0;
    }
    let g = b.transpose() * b;
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Normalize sign so the first coefficient above `eps` is positive.
pub fn canonical_sign(v: &mut DVector<f64>, eps: f64) {
    for x in v.iter() {
        if x.abs() > eps {
            if *x < 0.0 {
                *v *= -1.0;
            }
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace_of_simple_matrix() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(rank(&m, 1e-9), 2);
        let ns = nullspace(&m, 1e-9);
        assert_eq!(ns.ncols(), 1);
        let r = &m * &ns;
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix_is_complete() {
        let m = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        let ns = nullspace(&m, 1e-9);
        assert_eq!(ns.ncols(), 3);
        assert!((&m * &ns).norm() < 1e-12);
        assert!(orthonormality_residual(&ns) < 1e-12);
    }

    #[test]
    fn complement_dimensions() {
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        let c = orthogonal_complement(&b, 1e-9);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * &c).norm() < 1e-12);
    }

    #[test]
    fn zero_rows_matrix_has_identity_nullspace() {
        let m = DMatrix::zeros(0, 3);
        let ns = nullspace(&m, 1e-9);
        assert_eq!(ns.ncols(), 3);
    }

    #[test]
    fn column_space_is_accurate_on_near_singular_input() {
        // a rank-1 2x2 with tiny residual in the second direction: the basis
        // vector must actually span the range
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[0.0004531633616112196, 0.02091910194464716, 0.021652835948388405, 0.9995465674555586],
        );
        let cs = column_space(&m, 1e-9);
        assert_eq!(cs.ncols(), 1);
        // residual of each column of m against the basis
        for j in 0..2 {
            let col = m.column(j).into_owned();
            let res = &col - &cs * (cs.transpose() * &col);
            assert!(res.norm() < 1e-10, "column {j} residual {}", res.norm());
        }
    }

    #[test]
    fn lstsq_solves_consistent_and_inconsistent_systems() {
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let d = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let (x, res) = lstsq_min_norm(&c, &d, 1e-9);
        assert!(res < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let d2 = DVector::from_vec(vec![1.0, 2.0, 10.0]);
        let (_, res2) = lstsq_min_norm(&c, &d2, 1e-9);
        assert!(res2 > 1.0);
        // wide system: minimum-norm solution
        let cw = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let dw = DVector::from_vec(vec![3.0]);
        let (xw, resw) = lstsq_min_norm(&cw, &dw, 1e-9);
        assert!(resw < 1e-12);
        for i in 0..3 {
            assert!((xw[i] - 1.0).abs() < 1e-12);
        }
    }
}
