use num_complex::Complex64 as C64;

use super::{CMatrix, StateVector};
use crate::error::{Error, Result};

/// Directions whose residual norm after projection falls below this are
/// treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// An operator restricted to the span of a set of states.
#[derive(Clone, Debug)]
pub struct Compression {
    /// B(j, k) = ⟨f_j|A|f_k⟩.
    pub matrix: CMatrix,
    /// Orthonormal frame f_j spanning the input states.
    pub frame: Vec<StateVector>,
    /// Input positions dropped as dependent.
    pub dropped: Vec<usize>,
}

impl Compression {
    /// Frame coordinates ⟨f_j|ψ⟩.
    pub fn coordinates(&self, psi: &StateVector) -> Vec<C64> {
        self.frame.iter().map(|f| f.inner(psi)).collect()
    }

    /// Σ_j x_j f_j.
    pub fn lift(&self, x: &[C64]) -> Vec<C64> {
        let dim = self.frame[0].dim();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (xj, f) in x.iter().zip(&self.frame) {
            for (o, a) in out.iter_mut().zip(f.amplitudes()) {
                *o += xj * a;
            }
        }
        out
    }
}

fn orthonormalize(
    n: usize,
    inner: impl Fn(&[C64], &[C64]) -> C64,
    initial: impl Fn(usize) -> Vec<C64>,
) -> (Vec<Vec<C64>>, Vec<usize>) {
    let mut frame: Vec<Vec<C64>> = Vec::new();
    let mut dropped = Vec::new();
    for k in 0..n {
        let mut v = initial(k);
        let norm0 = inner(&v, &v).re.max(0.0).sqrt();
        for _pass in 0..2 {
            for f in &frame {
                let p = inner(f, &v);
                for (x, y) in v.iter_mut().zip(f) {
                    *x -= p * y;
                }
            }
        }
        let norm = inner(&v, &v).re.max(0.0).sqrt();
        if norm <= RANK_TOL * norm0.max(1.0) {
            dropped.push(k);
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        frame.push(v);
    }
    (frame, dropped)
}

/// Compresses `a` onto span(`span_states`) with modified Gram–Schmidt.
pub fn compress(a: &CMatrix, span_states: &[StateVector]) -> Result<Compression> {
    if span_states.is_empty() {
        return Err(Error::Argument("empty span".into()));
    }
    let n = a.require_square()?;
    if let Some(s) = span_states.iter().find(|s| s.dim() != n) {
        return Err(Error::Shape(format!("state of dimension {} for a {n}x{n} operator", s.dim())));
    }
    let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>();
    let (frame, dropped) = orthonormalize(span_states.len(), dot, |k| span_states[k].amplitudes().to_vec());
    let images: Vec<Vec<C64>> = frame.iter().map(|f| a.mul_vec(f)).collect();
    let r = frame.len();
    let mut b = CMatrix::zeros(r, r);
    for j in 0..r {
        for k in 0..r {
            b[(j, k)] = dot(&frame[j], &images[k]);
        }
    }
    let frame = frame.into_iter().map(|v| StateVector::new(v).expect("normalized frame vector")).collect();
    Ok(Compression { matrix: b, frame, dropped })
}

/// Compression known only through Gram and bracket matrices of a spanning
/// family: G(i,j) = ⟨φ_i|φ_j⟩, K(i,j) = ⟨φ_i|A|φ_j⟩.
#[derive(Clone, Debug)]
pub struct GramCompression {
    /// B = C† K C.
    pub matrix: CMatrix,
    /// Column j holds the expansion of frame vector f_j over the family.
    pub transform: CMatrix,
    pub dropped: Vec<usize>,
}

impl GramCompression {
    /// Family coefficients of the lifted vector Σ_j x_j f_j.
    pub fn lift(&self, x: &[C64]) -> Vec<C64> {
        self.transform.mul_vec(x)
    }
}

pub fn compress_gram(gram: &CMatrix, bracket: &CMatrix) -> Result<GramCompression> {
    let n = gram.require_square()?;
    if bracket.rows() != n || bracket.cols() != n {
        return Err(Error::Shape("Gram and bracket matrices differ in size".into()));
    }
    let g_inner = |x: &[C64], y: &[C64]| gram.bracket(x, y);
    let (frame, dropped) = orthonormalize(n, g_inner, |k| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[k] = C64::new(1.0, 0.0);
        e
    });
    if frame.is_empty() {
        return Err(Error::Argument("empty span".into()));
    }
    let r = frame.len();
    let mut transform = CMatrix::zeros(n, r);
    for (j, f) in frame.iter().enumerate() {
        for i in 0..n {
            transform[(i, j)] = f[i];
        }
    }
    let matrix = &(&transform.adjoint() * bracket) * &transform;
    Ok(GramCompression { matrix, transform, dropped })
}
