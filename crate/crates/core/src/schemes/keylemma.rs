//! Zero as a convex combination of the values z_k = z₁^{N−k} z₂^k, and the
//! matching isotropic vector of A^{⊗N} inside span{ψ₁^{⊗N−k} ψ₂^{⊗k}}.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::PhiTerm;
use crate::error::{Error, Result};
use crate::hermbasis::{RayValue, ZERO_TOL};
use crate::matrixcore::{compress_gram, CMatrix, StateVector};
use crate::numrange::{achieve_value, isotropic_vector, VALUE_TOL};

/// Angular gaps at or below this count as co-linear.
pub const ANGLE_TOL: f64 = 1e-12;
/// |Nθ − π| at or below this is treated as an exact hit.
pub const CASE_BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// θ = π, N = 1.
    #[serde(rename = "case1")]
    Opposite,
    /// Nθ = π with N ≥ 2.
    #[serde(rename = "case2a")]
    ExactHit,
    /// π < Nθ < 2π.
    #[serde(rename = "case2b")]
    Straddle,
}

/// Copy count, case, and convex weights over the participating Φ_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaPlan {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub case_tag: CaseTag,
    pub weights: Vec<f64>,
    pub phi_indices: Vec<usize>,
    /// |Σ p_k z_k| / Σ p_k |z_k|.
    pub weight_residual: f64,
}

/// Smaller angular gap between two nonzero values, in [0, π].
pub fn angular_gap(z1: RayValue, z2: RayValue) -> f64 {
    let delta = (z2.theta - z1.theta).rem_euclid(TAU);
    delta.min(TAU - delta)
}

/// θ = min(θ₂ − θ₁, 2π + θ₁ − θ₂) and N = ⌈π/θ⌉, with π/k giving exactly k.
pub fn keylemma_n(z1: RayValue, z2: RayValue) -> Result<(f64, usize)> {
    let theta = angular_gap(z1, z2);
    if theta <= ANGLE_TOL {
        return Err(Error::Domain(format!("values {} and {} are co-linear", z1.value(), z2.value())));
    }
    let ratio = PI / theta;
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-12 * ratio { nearest } else { ratio.ceil() };
    if !(n.is_finite() && n >= 1.0 && n < usize::MAX as f64) {
        return Err(Error::Domain(format!("copy count for θ = {theta} is not representable")));
    }
    Ok((theta, n as usize))
}

/// log |z_k| for z_k = r₁^{N−k} r₂^k.
fn log_modulus(z1: RayValue, z2: RayValue, n: usize, k: usize) -> f64 {
    (n - k) as f64 * z1.r.ln() + k as f64 * z2.r.ln()
}

/// Weights p with Σ p_k z_k = 0, z_k = r₁^{N−k} r₂^k e^{ikθ}.
///
/// The unit directions at the participating angles get barycentric weights
/// w (their sines of opposite gaps), and p_k ∝ w_k / |z_k| is normalized in
/// log space so large N does not overflow.
pub fn keylemma_weights(z1: RayValue, z2: RayValue, theta: f64, n: usize) -> Result<KeyLemmaPlan> {
    if n == 0 || !(theta > 0.0 && theta <= PI + 1e-12) {
        return Err(Error::Argument(format!("invalid (θ, N) = ({theta}, {n})")));
    }
    let nt = n as f64 * theta;
    let (case_tag, phi_indices, w): (CaseTag, Vec<usize>, Vec<f64>) = if n == 1 {
        if (theta - PI).abs() > CASE_BOUNDARY_TOL {
            return Err(Error::Domain(format!("N = 1 needs θ = π, got {theta}")));
        }
        (CaseTag::Opposite, vec![0, 1], vec![0.5, 0.5])
    } else if (nt - PI).abs() <= CASE_BOUNDARY_TOL {
        (CaseTag::ExactHit, vec![0, n], vec![0.5, 0.5])
    } else if nt > PI && nt < TAU && (n as f64 - 1.0) * theta < PI {
        let w = vec![theta.sin(), -nt.sin(), ((n - 1) as f64 * theta).sin()];
        (CaseTag::Straddle, vec![0, n - 1, n], w)
    } else {
        return Err(Error::Domain(format!("(θ, N) = ({theta}, {n}) is not a ceiling pair")));
    };
    if w.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Domain(format!("negative barycentric weight for θ = {theta}, N = {n}")));
    }
    let logs: Vec<f64> = phi_indices
        .iter()
        .zip(&w)
        .map(|(&k, &wk)| if wk > 0.0 { wk.ln() - log_modulus(z1, z2, n, k) } else { f64::NEG_INFINITY })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|p| *p /= total);
    let weight_residual = weight_residual(z1, z2, theta, n, &phi_indices, &weights);
    if weight_residual > 1e-12 {
        return Err(Error::Convergence { what: "keylemma_weights".into(), best_residual: weight_residual });
    }
    Ok(KeyLemmaPlan { n, theta, case_tag, weights, phi_indices, weight_residual })
}

/// |Σ p_k z_k| / Σ p_k |z_k| with the moduli rescaled by their maximum.
pub fn weight_residual(z1: RayValue, z2: RayValue, theta: f64, n: usize, indices: &[usize], weights: &[f64]) -> f64 {
    // log(p_k |z_k|), shifted so the largest term is 1.
    let logs: Vec<f64> = indices.iter().zip(weights).map(|(&k, &p)| p.ln() + log_modulus(z1, z2, n, k)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    for (&k, &l) in indices.iter().zip(&logs) {
        let m = (l - top).exp();
        sum += C64::from_polar(m, k as f64 * theta);
        mass += m;
    }
    if mass > 0.0 && mass.is_finite() {
        sum.norm() / mass
    } else {
        f64::INFINITY
    }
}

/// Which of ψ₁, ψ₂ sits in a copy slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Psi1,
    Psi2,
}

/// Selector list for Φ_k = ψ₁^{⊗N−k} ψ₂^{⊗k}.
pub fn phi_selectors(n: usize, k: usize) -> Vec<Factor> {
    let mut out = vec![Factor::Psi1; n - k.min(n)];
    out.resize(n, Factor::Psi2);
    out
}

/// ⟨Φ_left|A^{⊗N}|Φ_right⟩ as a product of single-copy brackets.
pub fn tensor_bracket(a: &CMatrix, left: &[Factor], right: &[Factor], psi1: &StateVector, psi2: &StateVector) -> Result<C64> {
    if left.len() != right.len() {
        return Err(Error::Shape(format!("selector lengths {} and {} differ", left.len(), right.len())));
    }
    let d = a.require_square()?;
    if psi1.dim() != d || psi2.dim() != d {
        return Err(Error::Shape(format!("states of dimension {}, {} for a {d}x{d} operator", psi1.dim(), psi2.dim())));
    }
    let pick = |f: Factor| if f == Factor::Psi1 { psi1.amplitudes() } else { psi2.amplitudes() };
    let table = [
        [a.bracket(pick(Factor::Psi1), pick(Factor::Psi1)), a.bracket(pick(Factor::Psi1), pick(Factor::Psi2))],
        [a.bracket(pick(Factor::Psi2), pick(Factor::Psi1)), a.bracket(pick(Factor::Psi2), pick(Factor::Psi2))],
    ];
    let idx = |f: Factor| if f == Factor::Psi1 { 0 } else { 1 };
    Ok(left.iter().zip(right).map(|(&l, &r)| table[idx(l)][idx(r)]).product())
}

/// ⟨Φ_left|Φ_right⟩.
pub fn tensor_gram(left: &[Factor], right: &[Factor], psi1: &StateVector, psi2: &StateVector) -> Result<C64> {
    tensor_bracket(&CMatrix::identity(psi1.dim()), left, right, psi1, psi2)
}

/// An isotropic vector of A^{⊗N} written in the Φ_k basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaResult {
    pub plan: KeyLemmaPlan,
    pub terms: Vec<PhiTerm>,
    pub residual: f64,
}

/// Bracket and Gram matrices over Φ_k for the given indices.
fn phi_matrices(a: &CMatrix, psi1: &StateVector, psi2: &StateVector, n: usize, indices: &[usize]) -> Result<(CMatrix, CMatrix)> {
    let m = indices.len();
    let (mut k, mut g) = (CMatrix::zeros(m, m), CMatrix::zeros(m, m));
    for (i, &ki) in indices.iter().enumerate() {
        for (j, &kj) in indices.iter().enumerate() {
            let (l, r) = (phi_selectors(n, ki), phi_selectors(n, kj));
            k[(i, j)] = tensor_bracket(a, &l, &r, psi1, psi2)?;
            g[(i, j)] = tensor_gram(&l, &r, psi1, psi2)?;
        }
    }
    Ok((k, g))
}

/// ⟨ψ|A^{⊗N}|ψ⟩ for ψ = Σ c_k Φ_k, evaluated factor by factor.
pub fn phi_value(a: &CMatrix, psi1: &StateVector, psi2: &StateVector, n: usize, terms: &[PhiTerm]) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for l in terms {
        for r in terms {
            acc += l.coeff.conj() * r.coeff * tensor_bracket(a, &phi_selectors(n, l.k), &phi_selectors(n, r.k), psi1, psi2)?;
        }
    }
    Ok(acc)
}

/// Finds N and a unit vector in span{Φ_k} with ⟨ψ|A^{⊗N}|ψ⟩ = 0, given two
/// states whose values under A are nonzero and not co-linear.
pub fn keylemma_isotropic(a: &CMatrix, psi1: &StateVector, psi2: &StateVector) -> Result<KeyLemmaResult> {
    a.require_square()?;
    let (v1, v2) = (a.bracket(psi1.amplitudes(), psi1.amplitudes()), a.bracket(psi2.amplitudes(), psi2.amplitudes()));
    if v1.norm() <= ZERO_TOL || v2.norm() <= ZERO_TOL {
        return Err(Error::Domain("a witness value is zero; the witness itself is isotropic".into()));
    }
    let (z1, z2) = (RayValue::from_complex(v1)?, RayValue::from_complex(v2)?);
    let (theta, n) = keylemma_n(z1, z2)?;
    let plan = keylemma_weights(z1, z2, theta, n)?;
    let (k, g) = phi_matrices(a, psi1, psi2, n, &plan.phi_indices)?;
    let comp = compress_gram(&g, &k)?;
    // Coordinates of Φ_k in the orthonormal frame: C†G e_k.
    let cg = &comp.transform.adjoint() * &g;
    let states: Vec<StateVector> = (0..plan.phi_indices.len()).map(|j| StateVector::new(cg.col(j))).collect::<Result<_>>()?;
    let x = match achieve_value(&comp.matrix, &states, &plan.weights) {
        Ok(x) => x,
        Err(Error::Convergence { .. }) => isotropic_vector(&comp.matrix)?,
        Err(e) => return Err(e),
    };
    let mut c = comp.lift(x.amplitudes());
    let norm = g.bracket(&c, &c).re.sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    let terms: Vec<PhiTerm> = plan.phi_indices.iter().zip(&c).map(|(&k, &coeff)| PhiTerm { k, coeff }).collect();
    let residual = phi_value(a, psi1, psi2, n, &terms)?.norm();
    if residual > VALUE_TOL {
        return Err(Error::Convergence { what: "keylemma_isotropic".into(), best_residual: residual });
    }
    Ok(KeyLemmaResult { plan, terms, residual })
}
