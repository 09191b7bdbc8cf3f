//! Thin wrappers over the system LAPACK for dense symmetric/Hermitian
//! eigenproblems (divide-and-conquer drivers).

use crate::error::{QembedError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::os::raw::c_char;

extern "C" {
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
    fn zheevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut f64,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        lrwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

const JOBZ_N: c_char = b'N' as c_char;
const JOBZ_V: c_char = b'V' as c_char;
const UPLO_L: c_char = b'L' as c_char;

/// Eigenvalues (ascending) and optionally eigenvectors of a real symmetric
/// matrix. Column j of the returned array is the j-th eigenvector.
pub fn eigh_real(a: &Array2<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QembedError::Dimension("eigh_real requires a square matrix".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    // Row-major symmetric input read as column-major is its own transpose.
    let mut buf: Vec<f64> = a.iter().cloned().collect();
    let mut w = vec![0.0f64; n];
    let jobz = if vectors { JOBZ_V } else { JOBZ_N };
    let ni = n as i32;
    let mut info = 0i32;

    // Workspace query.
    let mut work_query = [0.0f64];
    let mut iwork_query = [0i32];
    let neg1 = -1i32;
    unsafe {
        dsyevd_(
            &jobz, &UPLO_L, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            work_query.as_mut_ptr(), &neg1, iwork_query.as_mut_ptr(), &neg1, &mut info,
        );
    }
    let lwork = work_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            &jobz, &UPLO_L, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(QembedError::Numerical(format!("dsyevd failed with info = {info}")));
    }
    let vecs = vectors.then(|| {
        // LAPACK stores eigenvector j in column-major column j.
        Array2::from_shape_fn((n, n), |(i, j)| buf[i + j * n])
    });
    Ok((w, vecs))
}

/// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian
/// matrix. Column j of the returned array is the j-th eigenvector.
pub fn eigh_complex(
    a: &Array2<Complex64>,
    vectors: bool,
) -> Result<(Vec<f64>, Option<Array2<Complex64>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QembedError::Dimension("eigh_complex requires a square matrix".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    // Row-major Hermitian input read as column-major is the conjugate
    // matrix; its eigenvectors are the conjugates of ours.
    let mut buf: Vec<Complex64> = a.iter().cloned().collect();
    let mut w = vec![0.0f64; n];
    let jobz = if vectors { JOBZ_V } else { JOBZ_N };
    let ni = n as i32;
    let mut info = 0i32;

    let mut work_query = [Complex64::new(0.0, 0.0)];
    let mut rwork_query = [0.0f64];
    let mut iwork_query = [0i32];
    let neg1 = -1i32;
    unsafe {
        zheevd_(
            &jobz, &UPLO_L, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            work_query.as_mut_ptr(), &neg1, rwork_query.as_mut_ptr(), &neg1,
            iwork_query.as_mut_ptr(), &neg1, &mut info,
        );
    }
    let lwork = work_query[0].re as i32;
    let lrwork = rwork_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        zheevd_(
            &jobz, &UPLO_L, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &lrwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(QembedError::Numerical(format!("zheevd failed with info = {info}")));
    }
    let vecs = vectors.then(|| Array2::from_shape_fn((n, n), |(i, j)| buf[i + j * n].conj()));
    Ok((w, vecs))
}
