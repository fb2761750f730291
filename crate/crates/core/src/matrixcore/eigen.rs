//! Dense eigendecompositions. Hermitian problems go through nalgebra's
//! symmetric QR; unitaries through its complex Schur form, which is diagonal
//! for normal input.

use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column k belongs to `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k)
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
}

/// Eigendecomposition of the symmetrized input (A + A†)/2.
pub fn eig_hermitian(a: &CMatrix) -> Result<HermitianEigen> {
    let n = a.require_square()?;
    let h = a.hermitian_part();
    if n == 1 {
        return Ok(HermitianEigen { values: vec![h[(0, 0)].re], vectors: CMatrix::identity(1) });
    }
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = eig.eigenvectors[(row, k)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Largest eigenvalue of the Hermitian part of `a`.
pub fn lambda_max(a: &CMatrix) -> f64 {
    match a.rows() {
        1 => a[(0, 0)].re,
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let b = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
            0.5 * (p + q) + (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt()
        }
        _ => {
            let h = a.hermitian_part().to_nalgebra();
            h.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Eigendecomposition of a unitary; eigenvalues are unimodular.
pub fn eig_unitary(a: &CMatrix) -> Result<UnitaryEigen> {
    a.require_square()?;
    let defect = a.unitarity_defect();
    if defect > 1e-9 {
        return Err(Error::NotUnitary { residual: defect });
    }
    Ok(schur_eig(a))
}

/// Schur-form eigendecomposition without the unitarity gate; exact only for
/// normal input. Falls back to a Hermitian pencil when QR stalls.
pub(crate) fn schur_eig(a: &CMatrix) -> UnitaryEigen {
    let n = a.rows();
    match nalgebra::Schur::try_new(a.to_nalgebra(), f64::EPSILON, 2000) {
        Some(schur) => {
            let (q, t) = schur.unpack();
            let values = (0..n).map(|k| t[(k, k)]).collect();
            UnitaryEigen { values, vectors: CMatrix::from_nalgebra(&q) }
        }
        None => pencil_eig(a),
    }
}

/// Eigenvectors of the Hermitian part of e^{−iφ}A for a generic φ; for normal
/// A they diagonalize A, and the Rayleigh quotients give the eigenvalues.
fn pencil_eig(a: &CMatrix) -> UnitaryEigen {
    let h = a.scale(C64::from_polar(1.0, -0.618_033_988_749_895));
    let eig = eig_hermitian(&h).expect("square input");
    let values = (0..a.rows()).map(|k| {
        let v = eig.vector(k);
        a.bracket(&v, &v)
    });
    UnitaryEigen { values: values.collect(), vectors: eig.vectors }
}
