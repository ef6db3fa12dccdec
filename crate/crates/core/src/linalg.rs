//! Thin LAPACK bindings (system OpenBLAS): symmetric eigendecomposition
//! and complex linear solves.  Only the two routines the crate needs.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::os::raw::c_char;

extern "C" {
    /// Divide-and-conquer symmetric eigensolver.
    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );

    /// Complex general linear solve A X = B (LU with partial pivoting).
    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
}

/// Full eigendecomposition of a symmetric matrix given as a dense n×n
/// slice (symmetric, so row- vs column-major is immaterial on input).
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and
/// eigenvectors stored column-major: component `i` of eigenvector `j`
/// is `eigenvectors[i + j*n]`.
pub fn sym_eig(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    let mut vecs = a.to_vec();
    let mut w = vec![0.0f64; n];
    let ni = n as i32;
    let jobz = b'V' as c_char;
    let uplo = b'L' as c_char;
    let mut info: i32 = 0;

    // Workspace query.
    let mut work_query = [0.0f64];
    let mut iwork_query = [0i32];
    let m1: i32 = -1;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            vecs.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &m1,
            iwork_query.as_mut_ptr(),
            &m1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numeric(format!("dsyevd workspace query failed: info={info}")));
    }
    let lwork = work_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            vecs.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        let norm = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        return Err(Error::Numeric(format!(
            "dsyevd failed: info={info}, n={n}, max|a_ij|={norm:.3e}"
        )));
    }
    Ok((w, vecs))
}

/// Solve the complex system A X = B in place.
///
/// `a` is n×n; since callers build it explicitly we fix the convention to
/// **column-major** (`a[i + j*n]` is entry (i,j)).  `b` holds `nrhs`
/// right-hand sides column-major and is overwritten with the solution.
pub fn solve_complex(n: usize, a: &mut [Complex64], b: &mut [Complex64], nrhs: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * nrhs);
    let ni = n as i32;
    let nrhsi = nrhs as i32;
    let mut ipiv = vec![0i32; n];
    let mut info: i32 = 0;
    unsafe {
        zgesv_(
            &ni,
            &nrhsi,
            a.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            b.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numeric(format!("zgesv failed: info={info}, n={n}")));
    }
    Ok(())
}

/// Complex resolvent (zI − A)⁻¹ of a real symmetric matrix, returned
/// column-major.  Test-oracle helper; O(n³), intended for n ≲ 100.
pub fn resolvent(n: usize, a: &[f64], z: Complex64) -> Result<Vec<Complex64>> {
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            // zI − A, column-major; A symmetric so indexing is safe either way.
            let mut v = -Complex64::new(a[i * n + j], 0.0);
            if i == j {
                v += z;
            }
            m[i + j * n] = v;
        }
    }
    let mut b = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        b[i + i * n] = Complex64::new(1.0, 0.0);
    }
    solve_complex(n, &mut m, &mut b, n)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eig_diagonal() {
        let a = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let (w, v) = sym_eig(3, &a).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 3.0, epsilon = 1e-12);
        // eigenvector for eigenvalue 1 is e_1 (second coordinate)
        assert_abs_diff_eq!(v[1].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_reconstructs() {
        // small symmetric matrix, check A = U diag(w) Uᵀ
        let n = 4;
        let mut a = vec![0.0; n * n];
        let vals = [
            [2.0, -1.0, 0.5, 0.0],
            [-1.0, 3.0, 0.2, -0.3],
            [0.5, 0.2, 1.0, 0.7],
            [0.0, -0.3, 0.7, -2.0],
        ];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = vals[i][j];
            }
        }
        let (w, v) = sym_eig(n, &a).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += v[i + k * n] * w[k] * v[j + k * n];
                }
                assert_abs_diff_eq!(s, a[i * n + j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn resolvent_diagonal() {
        let a = vec![1.0, 0.0, 0.0, 2.0];
        let z = Complex64::new(0.0, 1.0);
        let g = resolvent(2, &a, z).unwrap();
        let expect0 = (z - 1.0).inv();
        let expect1 = (z - 2.0).inv();
        assert!((g[0] - expect0).norm() < 1e-13);
        assert!((g[3] - expect1).norm() < 1e-13);
        assert!(g[1].norm() < 1e-13);
    }
}
