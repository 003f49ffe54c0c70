//! Dense complex linear-algebra helpers shared by the modules.
//!
//! Matrices are `nalgebra` dense types. The non-Hermitian eigenproblem is
//! delegated to `faer`, the matrix exponential is a Padé scaling-and-squaring
//! implementation.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest entry modulus, `‖M‖_max`.
pub fn max_abs<'a, It>(entries: It) -> f64
where
    It: IntoIterator<Item = &'a Complex64>,
{
    entries.into_iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖A − B‖_max` for equally-shaped matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &CMat) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// `D·A·D` for a diagonal `D` given by its (real) diagonal.
pub fn sandwich_diag(diag: &[f64], a: &CMat) -> CMat {
    let n = diag.len();
    assert_eq!(a.shape(), (n, n));
    CMat::from_fn(n, n, |i, j| a[(i, j)] * (diag[i] * diag[j]))
}

/// Inverse together with its 2-norm condition number. Rejects matrices whose
/// condition number exceeds `max_condition`.
pub fn inverse_checked(a: &CMat, max_condition: f64) -> Result<(CMat, f64)> {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::SingularMap { condition });
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMap { condition })?;
    Ok((inv, condition))
}

fn to_faer(a: &CMat) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: &Mat<Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Below this size nalgebra's generic product is faster than converting.
const FAER_MIN_DIM: usize = 32;

/// `a·b`. Large products go through faer's sequential kernel, which keeps
/// results independent of the thread count.
pub fn mm(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matrix product shape mismatch");
    if a.nrows().min(a.ncols()).min(b.ncols()) < FAER_MIN_DIM {
        return a * b;
    }
    let mut out = Mat::<Complex64>::zeros(a.nrows(), b.ncols());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        faer::Accum::Replace,
        to_faer(a).as_ref(),
        to_faer(b).as_ref(),
        ONE,
        faer::Par::Seq,
    );
    from_faer(&out)
}

/// Solves `a·x = b` by partial-pivot LU; `None` if `a` is singular.
fn lu_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() < FAER_MIN_DIM {
        return a.clone().lu().solve(b);
    }
    use faer::linalg::solvers::Solve;
    let x = to_faer(a).partial_piv_lu().solve(to_faer(b));
    let x = from_faer(&x);
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

fn solver_error(a: &CMat, reason: String) -> Error {
    Error::Eigensolver {
        dim: a.nrows(),
        max_abs: max_abs(a.iter()),
        reason,
    }
}

/// All eigenvalues of a square complex matrix, unordered.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(solver_error(a, "matrix is not square".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(solver_error(a, "non-finite entries".into()));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(a)
        .eigenvalues()
        .map_err(|e| solver_error(a, format!("{e:?}")))
}

/// Eigenvalues and right eigenvectors (columns) of a square complex matrix.
pub fn eigen(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    if !a.is_square() {
        return Err(solver_error(a, "matrix is not square".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(solver_error(a, "non-finite entries".into()));
    }
    let n = a.nrows();
    let evd = to_faer(a)
        .eigen()
        .map_err(|e| solver_error(a, format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((values, vectors))
}

/// Sort by real part, then imaginary part.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

// Padé coefficients and 1-norm thresholds from Higham (2005), "The scaling
// and squaring method for the matrix exponential revisited".
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn scaled(a: &CMat, s: f64) -> CMat {
    a * re(s)
}

/// `U` and `V` of the low-order diagonal Padé approximants, `r = (V+U)/(V−U)`.
fn pade_low(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = mm(a, a);
    let mut pow = id.clone();
    let mut u = scaled(&id, b[1]);
    let mut v = scaled(&id, b[0]);
    for k in (2..b.len()).step_by(2) {
        pow = mm(&pow, &a2);
        v += scaled(&pow, b[k]);
        if k + 1 < b.len() {
            u += scaled(&pow, b[k + 1]);
        }
    }
    (mm(a, &u), v)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let b = &PADE13;
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = mm(a, a);
    let a4 = mm(&a2, &a2);
    let a6 = mm(&a4, &a2);
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = mm(
        a,
        &(mm(&a6, &inner_u)
            + scaled(&a6, b[7])
            + scaled(&a4, b[5])
            + scaled(&a2, b[3])
            + scaled(&id, b[1])),
    );
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = mm(&a6, &inner_v)
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    (u, v)
}

/// Matrix exponential by Padé scaling and squaring.
///
/// Panics if the Padé denominator is singular, which cannot happen for
/// finite input after scaling.
pub fn expm(a: &CMat) -> CMat {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = norm1(a);
    let (u, v, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some((3, _)) => {
            let (u, v) = pade_low(a, &PADE3);
            (u, v, 0)
        }
        Some((5, _)) => {
            let (u, v) = pade_low(a, &PADE5);
            (u, v, 0)
        }
        Some((7, _)) => {
            let (u, v) = pade_low(a, &PADE7);
            (u, v, 0)
        }
        Some(_) => {
            let (u, v) = pade_low(a, &PADE9);
            (u, v, 0)
        }
        None => {
            let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
            let scaled_a = scaled(a, 2f64.powi(-s));
            let (u, v) = pade13(&scaled_a);
            (u, v, s)
        }
    };
    let numer = &v + &u;
    let denom = v - u;
    let mut result = lu_solve(&denom, &numer).expect("Padé denominator is singular");
    for _ in 0..squarings {
        result = mm(&result, &result);
    }
    result
}
