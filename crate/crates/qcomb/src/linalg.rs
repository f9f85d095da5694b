//! Dense complex linear-algebra helpers shared by all modules.
//!
//! Everything is built on Hermitian eigendecompositions and SVDs of
//! `DMatrix<Complex64>`. Matrix functions of nominally-PSD arguments clamp
//! tolerance-level negative eigenvalues to zero before being applied, so that
//! square roots and inverses of numerically-perturbed operators stay real.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::{TOL_PINV, TOL_RANK};

pub type CMatrix = DMatrix<Complex64>;

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry distance between two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-entry deviation from Hermiticity, ||M - M^dag||_max.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Hermitian part (M + M^dag)/2.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part; returns (eigenvalues, eigenvectors)
/// with eigenvectors as columns, ascending eigenvalue order.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Rebuild sum_k f(lambda_k) |v_k><v_k| from an eigensystem.
fn spectral_apply(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vecs.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        let fl = f(l);
        if fl != 0.0 {
            let v = vecs.column(k);
            out += (v * v.adjoint()).scale(fl);
        }
    }
    out
}

/// Minimum eigenvalue of the Hermitian part.
pub fn min_eig(m: &CMatrix) -> f64 {
    let (vals, _) = eigh(m);
    vals.first().copied().unwrap_or(0.0)
}

/// Positive part: negative eigenvalues clamped to zero.
pub fn psd_part(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    spectral_apply(&vals, &vecs, |l| l.max(0.0))
}

/// Square root of a nominally-PSD matrix (negatives clamped first).
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    spectral_apply(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Square root of a nominally-PSD matrix with eigenvalues below the relative
/// cutoff `TOL_PINV` zeroed, so that its support agrees with
/// [`support_projector`].
pub fn sqrt_psd_trunc(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let cut = TOL_PINV * vals.iter().cloned().fold(0.0, f64::max);
    spectral_apply(&vals, &vecs, |l| if l > cut { l.sqrt() } else { 0.0 })
}

/// Moore-Penrose pseudo-inverse of a nominally-PSD matrix, with the relative
/// eigenvalue cutoff `TOL_PINV`.
pub fn pinv_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let cut = TOL_PINV * vals.iter().cloned().fold(0.0, f64::max);
    spectral_apply(&vals, &vecs, |l| if l > cut { 1.0 / l } else { 0.0 })
}

/// Square root of the pseudo-inverse of a nominally-PSD matrix.
pub fn pinv_sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let cut = TOL_PINV * vals.iter().cloned().fold(0.0, f64::max);
    spectral_apply(&vals, &vecs, |l| if l > cut { 1.0 / l.sqrt() } else { 0.0 })
}

/// Projector onto the support (range) of a nominally-PSD matrix.
pub fn support_projector(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let cut = TOL_PINV * vals.iter().cloned().fold(0.0, f64::max);
    spectral_apply(&vals, &vecs, |l| if l > cut { 1.0 } else { 0.0 })
}

/// Trace norm of the Hermitian part: sum of |eigenvalues|.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter().map(|l| l.abs()).sum()
}

/// Numerical rank with the relative eigenvalue cutoff `TOL_RANK`.
pub fn rank_psd(m: &CMatrix) -> usize {
    let (vals, _) = eigh(m);
    let cut = TOL_RANK * vals.iter().cloned().fold(0.0, f64::max);
    vals.iter().filter(|&&l| l > cut).count()
}

/// Nearest isometry to a tall (or square) matrix in Frobenius norm:
/// polar factor U V^dag from the thin SVD.
pub fn polar_isometry(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    u * vt
}

/// Identity matrix of side n.
pub fn ident(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard Gaussian via Box-Muller.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Matrix with iid standard complex Gaussian entries.
pub fn random_ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let entries: Vec<Complex64> = (0..rows * cols)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    CMatrix::from_vec(rows, cols, entries)
}

/// Random PSD matrix G G^dag from a Ginibre factor.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_ginibre(rng, n, n);
    &g * g.adjoint()
}

/// Haar-ish random isometry with `cols` <= `rows`, via polar projection of a
/// Ginibre matrix.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(cols <= rows);
    polar_isometry(&random_ginibre(rng, rows, cols))
}

/// Random unitary.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    random_isometry(rng, n, n)
}
