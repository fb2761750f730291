//! Discrimination planners and the scheme data they produce.
//!
//! A scheme feeds a product input (each party may entangle its own copies)
//! through N parallel copies of W_U = U u⁽ⁿ⁻¹⁾ U ⋯ u⁽¹⁾ U. Two unitaries are
//! told apart with certainty exactly when the two outputs are orthogonal,
//! i.e. when ⟨in|(W₁†W₂)^{⊗N}|in⟩ = 0.

mod dispatch;
pub mod keylemma;
mod multi;
mod parallel;
mod sequential;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use dispatch::{plan_discrimination, plan_discrimination_with, PlanOptions, INPUT_UNITARY_TOL};
pub use keylemma::{
    keylemma_isotropic, keylemma_n, keylemma_weights, phi_selectors, tensor_bracket, tensor_gram, CaseTag, Factor, KeyLemmaPlan,
    KeyLemmaResult,
};
pub use multi::{plan_multi, plan_multi_with, simulate_elimination, Duel, EliminationStage, EliminationTree, SimulationBranch};
pub use parallel::{parallel_plan, Pivot};
pub use sequential::{non_hermiticity, sequential_search, SequentialAttempt, SequentialOutcome, SequentialRecord};

use crate::error::{Error, Result};
use crate::localrange::{IsotropicPath, ProductState};
use crate::matrixcore::{total_dim, CMatrix, PartitionedOperator, StateVector, DENSE_CAP};

/// Residual contract for every returned scheme.
pub const SCHEME_TOL: f64 = 1e-8;
/// Allowed gap between factored and dense evaluations.
pub const REFEREE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    SingleRun,
    Parallel,
    SequentialParallel,
    EliminationTree,
}

/// Coefficient of Φ_k = ψ₁^{⊗N−k} ψ₂^{⊗k}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiTerm {
    pub k: usize,
    pub coeff: C64,
}

/// One party's state over its N copies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PartyInput {
    /// |φ⟩^{⊗N}.
    Product { copy_state: StateVector },
    /// Σ_k c_k ψ₁^{⊗N−k} ψ₂^{⊗k}.
    Superposition { psi1: StateVector, psi2: StateVector, terms: Vec<PhiTerm> },
}

impl PartyInput {
    pub fn dim(&self) -> usize {
        match self {
            PartyInput::Product { copy_state } => copy_state.dim(),
            PartyInput::Superposition { psi1, .. } => psi1.dim(),
        }
    }

    /// Terms as (coefficient, per-copy factors).
    fn expand(&self, copies: usize) -> Vec<(C64, Vec<&StateVector>)> {
        match self {
            PartyInput::Product { copy_state } => vec![(C64::new(1.0, 0.0), vec![copy_state; copies])],
            PartyInput::Superposition { psi1, psi2, terms } => terms
                .iter()
                .map(|t| {
                    let k = t.k.min(copies);
                    let mut f = vec![psi1; copies - k];
                    f.extend(std::iter::repeat_n(psi2, k));
                    (t.coeff, f)
                })
                .collect(),
        }
    }

    /// Squared norm Σ conj(c_a) c_b ⟨Φ_a|Φ_b⟩.
    pub fn norm_sqr(&self, copies: usize) -> f64 {
        let terms = self.expand(copies);
        let mut acc = C64::new(0.0, 0.0);
        for (ca, fa) in &terms {
            for (cb, fb) in &terms {
                acc += ca.conj() * cb * fa.iter().zip(fb).map(|(x, y)| x.inner(y)).product::<C64>();
            }
        }
        acc.re
    }

    /// Dense amplitudes over the d^N copy space, copy 1 slowest.
    pub fn dense(&self, copies: usize) -> Result<Vec<C64>> {
        let d = self.dim();
        let size = checked_power(d, copies)?;
        let mut out = vec![C64::new(0.0, 0.0); size];
        for (c, factors) in self.expand(copies) {
            for (idx, slot) in out.iter_mut().enumerate() {
                let mut rest = idx;
                let mut amp = c;
                for f in factors.iter().rev() {
                    amp *= f.amplitudes()[rest % d];
                    rest /= d;
                }
                *slot += amp;
            }
        }
        Ok(out)
    }

    /// Whether the copies are entangled with each other.
    pub fn is_entangled(&self, copies: usize) -> bool {
        match self {
            PartyInput::Product { .. } => false,
            PartyInput::Superposition { terms, .. } => copies > 1 && terms.iter().filter(|t| t.coeff.norm() > 1e-12).count() > 1,
        }
    }
}

fn checked_power(d: usize, n: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..n {
        size = size.checked_mul(d).filter(|&s| s <= DENSE_CAP).ok_or(Error::SizeLimit {
            requested: d.saturating_pow(n.min(u32::MAX as usize) as u32),
            cap: DENSE_CAP,
        })?;
    }
    Ok(size)
}

/// Tensor product of per-party unitaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitary {
    pub factors: Vec<CMatrix>,
}

impl LocalUnitary {
    pub fn identity(party_dims: &[usize]) -> Self {
        LocalUnitary { factors: party_dims.iter().map(|&d| CMatrix::identity(d)).collect() }
    }

    pub fn dense(&self) -> Result<CMatrix> {
        let mut it = self.factors.iter();
        let first = it.next().ok_or_else(|| Error::Argument("local unitary without factors".into()))?.clone();
        it.try_fold(first, |acc, f| acc.tensor(f))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(CMatrix::rows).collect()
    }
}

/// Which dispatch branch produced a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// tr(U₁†U₂) = 0.
    TraceZero,
    /// The see-saw found an isotropic product state.
    LocalMinimum,
    /// Not Hermitian up to phase.
    Parallel,
    /// Two qubits, Hermitian up to phase.
    HermitianQubits,
    /// Interleaved sequence followed by the parallel construction.
    Sequential,
}

/// Everything a planner learned on the way to a scheme.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub branch: Option<Branch>,
    pub trace: Option<C64>,
    pub local_min: Option<f64>,
    pub local_min_starts: Option<usize>,
    pub keylemma: Option<KeyLemmaPlan>,
    pub pivot: Option<Pivot>,
    pub isotropic_path: Option<IsotropicPath>,
    pub sequential: Option<SequentialRecord>,
    /// The input came from a lattice value equal to zero.
    pub zero_lattice_point: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationScheme {
    pub kind: SchemeKind,
    #[serde(rename = "N")]
    pub copies: usize,
    pub sequential_depth: usize,
    pub interleaved_locals: Vec<LocalUnitary>,
    pub party_dims: Vec<usize>,
    pub input: Vec<PartyInput>,
    /// Canonical phase θ with U₁†U₂ = e^{iθ}H, when one exists.
    pub phase_note: Option<f64>,
    pub residual: f64,
    /// Applications of the unknown unitary, n·N.
    pub uses: usize,
    pub certificate: Certificate,
}

impl DiscriminationScheme {
    /// Single copy, no interleaving, product input.
    pub fn single_run(state: &ProductState, residual: f64, certificate: Certificate) -> Self {
        DiscriminationScheme {
            kind: SchemeKind::SingleRun,
            copies: 1,
            sequential_depth: 1,
            interleaved_locals: Vec::new(),
            party_dims: state.dims(),
            input: state.party_states().iter().map(|s| PartyInput::Product { copy_state: s.clone() }).collect(),
            phase_note: None,
            residual,
            uses: 1,
            certificate,
        }
    }

    /// Product input state of a single-copy scheme.
    pub fn single_copy_state(&self) -> Option<ProductState> {
        if self.copies != 1 {
            return None;
        }
        let states: Option<Vec<StateVector>> =
            self.input.iter().map(|p| p.dense(1).ok().and_then(|v| StateVector::new(v).ok())).collect();
        ProductState::new(states?).ok()
    }

    /// Field-level consistency with the given party dims.
    pub fn validate(&self, party_dims: &[usize]) -> Result<()> {
        let mut problems = Vec::new();
        if self.party_dims != party_dims {
            problems.push(format!("party_dims {:?} do not match operators {:?}", self.party_dims, party_dims));
        }
        if self.copies == 0 {
            problems.push("N must be positive".into());
        }
        if self.sequential_depth == 0 {
            problems.push("sequential_depth must be positive".into());
        } else if self.interleaved_locals.len() + 1 != self.sequential_depth {
            problems.push(format!(
                "{} interleaved locals for sequential depth {}",
                self.interleaved_locals.len(),
                self.sequential_depth
            ));
        }
        if self.uses != self.copies * self.sequential_depth {
            problems.push(format!("uses {} != N·n = {}", self.uses, self.copies * self.sequential_depth));
        }
        match self.kind {
            SchemeKind::SingleRun if self.copies != 1 || self.sequential_depth != 1 => {
                problems.push("single_run needs N = 1 and n = 1".into())
            }
            SchemeKind::Parallel if self.sequential_depth != 1 => problems.push("parallel needs n = 1".into()),
            SchemeKind::SequentialParallel if self.sequential_depth < 2 => {
                problems.push("sequential_parallel needs n ≥ 2".into())
            }
            SchemeKind::EliminationTree => problems.push("elimination trees are verified stage by stage".into()),
            _ => {}
        }
        for (j, u) in self.interleaved_locals.iter().enumerate() {
            if u.dims() != party_dims {
                problems.push(format!("interleaved local {j} has dims {:?}", u.dims()));
            }
            for (k, f) in u.factors.iter().enumerate() {
                if !f.is_square() || !f.is_unitary(1e-8) {
                    problems.push(format!("interleaved local {j} factor {k} is not unitary"));
                }
            }
        }
        if self.input.len() != party_dims.len() {
            problems.push(format!("input has {} parties, operators have {}", self.input.len(), party_dims.len()));
        }
        for (k, (p, &d)) in self.input.iter().zip(party_dims).enumerate() {
            if p.dim() != d {
                problems.push(format!("input party {k} has dimension {}, expected {d}", p.dim()));
                continue;
            }
            if let PartyInput::Superposition { psi2, terms, .. } = p {
                if psi2.dim() != d {
                    problems.push(format!("input party {k} mixes dimensions"));
                    continue;
                }
                if terms.is_empty() {
                    problems.push(format!("input party {k} has no terms"));
                }
                if terms.iter().any(|t| t.k > self.copies) {
                    problems.push(format!("input party {k} has a term index above N"));
                }
            }
            let n2 = p.norm_sqr(self.copies);
            if (n2 - 1.0).abs() > 1e-10 {
                problems.push(format!("input party {k} has squared norm {n2}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// W_U = U u_{n−1} U ⋯ u_1 U.
pub fn chain(u: &CMatrix, locals: &[LocalUnitary]) -> Result<CMatrix> {
    let mut w = u.clone();
    for l in locals {
        w = &(u * &l.dense()?) * &w;
    }
    Ok(w)
}

/// ⟨in|A^{⊗N}|in⟩ expanded over the parties' term lists; A acts on one
/// copy of every party at a time.
pub fn factored_overlap(a: &CMatrix, input: &[PartyInput], copies: usize) -> Result<C64> {
    let dims: Vec<usize> = input.iter().map(PartyInput::dim).collect();
    if a.rows() != total_dim(&dims)? || !a.is_square() {
        return Err(Error::Shape(format!("{}x{} operator for input dims {dims:?}", a.rows(), a.cols())));
    }
    let expanded: Vec<Vec<(C64, Vec<&StateVector>)>> = input.iter().map(|p| p.expand(copies)).collect();
    let counts: Vec<usize> = expanded.iter().map(Vec::len).collect();
    let combos: usize = counts.iter().product();
    let pick = |mut flat: usize| -> Vec<usize> {
        let mut out = vec![0; counts.len()];
        for k in (0..counts.len()).rev() {
            out[k] = flat % counts[k];
            flat /= counts[k];
        }
        out
    };
    // Per-copy product vectors for each combination.
    let vectors = |choice: &[usize]| -> (C64, Vec<Vec<C64>>) {
        let coeff: C64 = choice.iter().enumerate().map(|(k, &t)| expanded[k][t].0).product();
        let per_copy = (0..copies)
            .map(|j| {
                let mut v = vec![C64::new(1.0, 0.0)];
                for (k, &t) in choice.iter().enumerate() {
                    let f = expanded[k][t].1[j].amplitudes();
                    v = v.iter().flat_map(|x| f.iter().map(move |y| x * y)).collect();
                }
                v
            })
            .collect();
        (coeff, per_copy)
    };
    let all: Vec<(C64, Vec<Vec<C64>>)> = (0..combos).map(|f| vectors(&pick(f))).collect();
    let mut acc = C64::new(0.0, 0.0);
    for (cl, left) in &all {
        for (cr, right) in &all {
            let mut term = cl.conj() * cr;
            for (x, y) in left.iter().zip(right) {
                term *= a.bracket(x, y);
            }
            acc += term;
        }
    }
    Ok(acc)
}

/// Full input vector over all copies, copy-major: copy 1 of every party
/// first, party 1 slowest within a copy.
pub fn dense_input(input: &[PartyInput], copies: usize) -> Result<Vec<C64>> {
    let dims: Vec<usize> = input.iter().map(PartyInput::dim).collect();
    let d = total_dim(&dims)?;
    let size = checked_power(d, copies)?;
    let parts: Vec<Vec<C64>> = input.iter().map(|p| p.dense(copies)).collect::<Result<_>>()?;
    let mut out = vec![C64::new(0.0, 0.0); size];
    for (idx, slot) in out.iter_mut().enumerate() {
        // digits[j][k]: index of party k in copy j.
        let mut rest = idx;
        let mut digits = vec![vec![0; dims.len()]; copies];
        for j in (0..copies).rev() {
            for k in (0..dims.len()).rev() {
                digits[j][k] = rest % dims[k];
                rest /= dims[k];
            }
        }
        let mut amp = C64::new(1.0, 0.0);
        for (k, part) in parts.iter().enumerate() {
            let local = digits.iter().fold(0, |acc, row| acc * dims[k] + row[k]);
            amp *= part[local];
        }
        *slot = amp;
    }
    Ok(out)
}

/// A^{⊗N} v, applying A to one copy slot at a time.
pub fn apply_tensor_power(a: &CMatrix, v: &[C64], copies: usize) -> Result<Vec<C64>> {
    let d = a.require_square()?;
    let size = checked_power(d, copies)?;
    if v.len() != size {
        return Err(Error::Shape(format!("vector of length {} for {copies} copies of dimension {d}", v.len())));
    }
    let mut cur = v.to_vec();
    for j in 0..copies {
        let post = d.pow((copies - 1 - j) as u32);
        let pre = size / (post * d);
        let mut next = vec![C64::new(0.0, 0.0); size];
        for p in 0..pre {
            for q in 0..post {
                for i in 0..d {
                    let mut s = C64::new(0.0, 0.0);
                    for l in 0..d {
                        s += a[(i, l)] * cur[(p * d + l) * post + q];
                    }
                    next[(p * d + i) * post + q] = s;
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Dense ⟨in|A^{⊗N}|in⟩, or None when d^N exceeds the dense cap.
pub fn dense_overlap(a: &CMatrix, input: &[PartyInput], copies: usize) -> Result<Option<C64>> {
    let v = match dense_input(input, copies) {
        Ok(v) => v,
        Err(Error::SizeLimit { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let w = apply_tensor_power(a, &v, copies)?;
    Ok(Some(v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum()))
}

/// ⟨Φ_{U_a}|Φ_{U_b}⟩ for a scheme, in factored form.
pub fn scheme_overlap(scheme: &DiscriminationScheme, ua: &CMatrix, ub: &CMatrix) -> Result<C64> {
    let wa = chain(ua, &scheme.interleaved_locals)?;
    let wb = chain(ub, &scheme.interleaved_locals)?;
    factored_overlap(&(&wa.adjoint() * &wb), &scheme.input, scheme.copies)
}

/// Independent re-evaluation of a scheme's output overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residual: f64,
    pub overlap: C64,
    pub dense_residual: Option<f64>,
    /// |factored − dense|, when the dense referee ran.
    pub disagreement: Option<f64>,
    pub uses: usize,
    pub recorded_residual: f64,
}

impl VerificationReport {
    /// Residual within `tol` and referees in agreement.
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol && self.disagreement.is_none_or(|d| d <= REFEREE_TOL)
    }
}

pub fn verify_scheme(u1: &PartitionedOperator, u2: &PartitionedOperator, scheme: &DiscriminationScheme) -> Result<VerificationReport> {
    if u1.party_dims() != u2.party_dims() {
        return Err(Error::Shape("operators have different party dims".into()));
    }
    scheme.validate(u1.party_dims())?;
    let w1 = chain(u1.matrix(), &scheme.interleaved_locals)?;
    let w2 = chain(u2.matrix(), &scheme.interleaved_locals)?;
    let a = &w1.adjoint() * &w2;
    let overlap = factored_overlap(&a, &scheme.input, scheme.copies)?;
    let dense = dense_overlap(&a, &scheme.input, scheme.copies)?;
    Ok(VerificationReport {
        residual: overlap.norm(),
        overlap,
        dense_residual: dense.map(|z| z.norm()),
        disagreement: dense.map(|z| (z - overlap).norm()),
        uses: scheme.copies * scheme.sequential_depth,
        recorded_residual: scheme.residual,
    })
}
