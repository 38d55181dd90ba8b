//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. The SVD and
//! Hermitian eigendecompositions are computed by `faer`; this module fixes the
//! conventions on top of them (descending singular values, deterministic
//! phases, relative rank thresholds) and adds the few operations the MPS and
//! synthesis code needs.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative singular-value threshold below which a value counts as zero.
pub const RANK_TOL: f64 = 1e-10;

const SVD_RESIDUAL_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// Thin singular value decomposition `a = left * diag(singulars) * right^†`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub left: ComplexMatrix,
    /// Non-negative, non-increasing.
    pub singulars: Vec<f64>,
    /// `cols x k` with orthonormal columns.
    pub right: ComplexMatrix,
}

impl SvdResult {
    /// Number of singular values above `rel_tol * σ₁`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.singulars, rel_tol)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_rank(self.singulars.len())
    }

    /// `Σ_{i<k} σᵢ uᵢ vᵢ^†`.
    pub fn reconstruct_rank(&self, k: usize) -> ComplexMatrix {
        let k = k.min(self.singulars.len());
        let mut scaled = self.left.columns(0, k).into_owned();
        for (j, s) in self.singulars.iter().take(k).enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.right.columns(0, k).adjoint()
    }

    /// Frobenius norm of the discarded tail when keeping `k` values.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.singulars
            .iter()
            .skip(k)
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }
}

/// Count of singular values strictly above `rel_tol` times the largest one.
pub fn numerical_rank(singulars: &[f64], rel_tol: f64) -> usize {
    match singulars.first() {
        Some(&top) if top > 0.0 => singulars.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("svd of empty {rows}x{cols} matrix")));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericFailure {
            op: "svd",
            rows,
            cols,
        });
    }
    let fail = || Error::NumericFailure {
        op: "svd",
        rows,
        cols,
    };
    let raw = to_faer(a).thin_svd().map_err(|_| fail())?;
    let u = from_faer(raw.U());
    let v = from_faer(raw.V());
    let diag = raw.S().column_vector();
    let values: Vec<f64> = (0..diag.nrows()).map(|i| diag[i].re).collect();
    let k = values.len();
    let mut us = u.clone();
    for (j, s) in values.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    let residual = frobenius(&(us * v.adjoint() - a));
    if residual.is_nan() || residual > SVD_RESIDUAL_TOL * frobenius(a).max(f64::MIN_POSITIVE) {
        return Err(fail());
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let mut left = ComplexMatrix::zeros(rows, k);
    let mut right = ComplexMatrix::zeros(cols, k);
    let mut singulars = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut u_col = u.column(src).into_owned();
        let mut v_col = v.column(src).into_owned();
        let phase = leading_phase(u_col.as_slice());
        u_col *= phase.conj();
        v_col *= phase.conj();
        left.set_column(dst, &u_col);
        right.set_column(dst, &v_col);
        singulars.push(values[src].max(0.0));
    }
    Ok(SvdResult {
        left,
        singulars,
        right,
    })
}

/// Unit phase of the largest-magnitude entry (first one on ties).
fn leading_phase(v: &[C64]) -> C64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let z = v
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-12))
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    z / z.norm()
}

/// Best rank-`k` approximation in Frobenius norm.
pub fn truncate_rank(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let min_dim = a.nrows().min(a.ncols());
    if k == 0 || k > min_dim {
        return Err(invalid(format!(
            "truncation rank {k} outside [1, {min_dim}]"
        )));
    }
    Ok(svd(a)?.reconstruct_rank(k))
}

fn to_faer(a: &ComplexMatrix) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian
/// part `(h + h^†) / 2`.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NumericFailure {
            op: "hermitian eigendecomposition",
            rows: h.nrows(),
            cols: h.ncols(),
        })?;
    let diag = eig.S().column_vector();
    let values = (0..diag.nrows()).map(|i| diag[i].re).collect();
    Ok((values, from_faer(eig.U())))
}

/// Largest entry of `|h - h^†|`.
pub fn hermitian_asymmetry(h: &ComplexMatrix) -> f64 {
    (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(-i * scale * h)` for Hermitian `h`, via its eigendecomposition.
pub fn hermitian_expm(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(invalid(format!(
            "matrix exponential needs a nonempty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let asym = hermitian_asymmetry(h);
    if asym > HERMITIAN_TOL {
        return Err(invalid(format!(
            "generator is not Hermitian (max asymmetry {asym:.3e})"
        )));
    }
    let (values, vectors) = hermitian_eigen(h)?;
    let mut phased = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -scale * lambda);
        for z in phased.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(phased * vectors.adjoint())
}

/// Largest entry of `|m^† m - I|`.
pub fn orthonormality_residual(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let eye = ComplexMatrix::identity(m.ncols(), m.ncols());
    (gram - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|u^† u - I|` and `|u u^† - I|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    orthonormality_residual(u).max(orthonormality_residual(&u.adjoint()))
}

/// Extend a matrix with orthonormal columns to a square unitary whose leading
/// columns are the input. New columns come from Gram–Schmidt on the standard
/// basis, taking at each step the basis vector with the largest residual.
pub fn complete_to_unitary(iso: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = iso.shape();
    if rows == 0 || cols == 0 || cols > rows {
        return Err(invalid(format!(
            "cannot complete a {rows}x{cols} matrix to a unitary"
        )));
    }
    let residual = orthonormality_residual(iso);
    if residual > ORTHONORMAL_TOL {
        return Err(invalid(format!(
            "columns are not orthonormal (residual {residual:.3e})"
        )));
    }
    let mut out = ComplexMatrix::zeros(rows, rows);
    out.columns_mut(0, cols).copy_from(iso);
    for filled in cols..rows {
        let basis = out.columns(0, filled).into_owned();
        let mut best: Option<(f64, ComplexVector)> = None;
        for e in 0..rows {
            let mut v = ComplexVector::zeros(rows);
            v[e] = C64::new(1.0, 0.0);
            // two passes keep the completion orthonormal to machine precision
            for _ in 0..2 {
                let coeffs = basis.adjoint() * &v;
                v -= &basis * coeffs;
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("rows > 0");
        out.set_column(filled, &(v / C64::new(norm, 0.0)));
    }
    Ok(out)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 || data.len() != rows * cols {
        return Err(invalid(format!(
            "{} entries cannot form a {rows}x{cols} matrix",
            data.len()
        )));
    }
    Ok(ComplexMatrix::from_row_slice(rows, cols, data))
}

pub fn to_row_major(m: &ComplexMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        out.extend(m.row(r).iter().copied());
    }
    out
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}
