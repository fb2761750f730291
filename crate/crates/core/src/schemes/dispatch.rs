//! Chooses how to tell two unitaries apart and verifies the result.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    chain, factored_overlap, parallel_plan, sequential_search, Branch, Certificate, DiscriminationScheme, SchemeKind,
};
use crate::error::{Error, Result};
use crate::hermbasis::canonical_phase;
use crate::localrange::{
    hermitian_local_isotropic_with, local_value, min_abs_local_from, min_abs_local_with, purify_product_value,
    SeeSawOptions, LOCAL_ZERO_TOL,
};
use crate::matrixcore::{CMatrix, PartitionedOperator};

/// Input unitaries must satisfy ‖U†U − I‖_F ≤ this.
pub const INPUT_UNITARY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub seed: u64,
    /// See-saw multistarts.
    pub starts: usize,
    /// Deepest interleaved sequence tried.
    pub n_max: usize,
    /// Random interleavers per depth.
    pub interleavers: usize,
    /// Residual a returned scheme must meet.
    pub tol: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { seed: 0, starts: 32, n_max: 8, interleavers: 64, tol: super::SCHEME_TOL }
    }
}

impl PlanOptions {
    pub fn with_seed(seed: u64) -> Self {
        PlanOptions { seed, ..Self::default() }
    }

    pub fn see_saw(&self) -> SeeSawOptions {
        SeeSawOptions::new(self.seed, self.starts)
    }
}

pub fn plan_discrimination(u1: &PartitionedOperator, u2: &PartitionedOperator, seed: u64) -> Result<DiscriminationScheme> {
    plan_discrimination_with(u1, u2, &PlanOptions::with_seed(seed))
}

/// Rejects mismatched, non-unitary or phase-equivalent pairs.
pub(crate) fn check_pair(u1: &PartitionedOperator, u2: &PartitionedOperator) -> Result<PartitionedOperator> {
    if u1.party_dims() != u2.party_dims() {
        return Err(Error::Shape(format!("party dims {:?} and {:?} differ", u1.party_dims(), u2.party_dims())));
    }
    u1.matrix().require_unitary(INPUT_UNITARY_TOL)?;
    u2.matrix().require_unitary(INPUT_UNITARY_TOL)?;
    let a = u1.with_matrix(&u1.matrix().adjoint() * u2.matrix())?;
    let d = a.dim() as f64;
    let shift = CMatrix::identity(a.dim()).scale(a.matrix().trace() / d);
    if (a.matrix() - &shift).frobenius_norm() <= 1e-10 {
        return Err(Error::IdenticalUpToPhase);
    }
    Ok(a)
}

/// Dispatch: trace-zero shortcut, see-saw single run, parallel scheme,
/// two-qubit Hermitian path, then interleaved sequence plus parallel scheme.
pub fn plan_discrimination_with(
    u1: &PartitionedOperator,
    u2: &PartitionedOperator,
    opts: &PlanOptions,
) -> Result<DiscriminationScheme> {
    let a = check_pair(u1, u2)?;
    let trace = a.matrix().trace();
    let phase = canonical_phase(a.matrix()).map_err(|e| e.at_stage("canonical_phase"))?;
    let phase_note = phase.as_ref().map(|p| p.theta);
    let mut cert = Certificate { trace: Some(trace), ..Certificate::default() };

    let mut scheme = if trace.norm() <= 1e-10 {
        cert.branch = Some(Branch::TraceZero);
        let rhos: Vec<CMatrix> =
            a.party_dims().iter().map(|&d| CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0))).collect();
        let s = purify_product_value(&a, &rhos).map_err(|e| e.at_stage("purify_product_value"))?;
        let refined = min_abs_local_from(&a, &s, &opts.see_saw()).map_err(|e| e.at_stage("min_abs_local"))?;
        let best = if refined.modulus() < local_value(&a, &s)?.norm() { refined.state } else { s };
        let residual = local_value(&a, &best)?.norm();
        cert.local_min = Some(residual);
        DiscriminationScheme::single_run(&best, residual, cert)
    } else {
        let m = min_abs_local_with(&a, &opts.see_saw()).map_err(|e| e.at_stage("min_abs_local"))?;
        cert.local_min = Some(m.modulus());
        cert.local_min_starts = Some(m.starts);
        if m.modulus() <= LOCAL_ZERO_TOL {
            cert.branch = Some(Branch::LocalMinimum);
            DiscriminationScheme::single_run(&m.state, m.modulus(), cert)
        } else if let Some(p) = &phase {
            if a.party_dims() == [2, 2] {
                cert.branch = Some(Branch::HermitianQubits);
                let h = a.with_matrix(p.hermitian.clone())?;
                let iso = hermitian_local_isotropic_with(&h, &opts.see_saw()).map_err(|e| e.at_stage("hermitian_local_isotropic"))?;
                cert.isotropic_path = Some(iso.path);
                let residual = local_value(&a, &iso.state)?.norm();
                DiscriminationScheme::single_run(&iso.state, residual, cert)
            } else {
                cert.branch = Some(Branch::Sequential);
                let seq = sequential_search(u1, u2, opts.seed, opts.n_max, opts.interleavers)
                    .map_err(|e| e.at_stage("sequential_search"))?;
                let w = a.with_matrix(&seq.w1.adjoint() * &seq.w2)?;
                let inner = parallel_plan(&w).map_err(|e| e.at_stage("parallel_plan"))?;
                cert.keylemma = inner.certificate.keylemma;
                cert.pivot = inner.certificate.pivot;
                cert.zero_lattice_point = inner.certificate.zero_lattice_point;
                cert.sequential = Some(seq.record);
                DiscriminationScheme {
                    kind: SchemeKind::SequentialParallel,
                    copies: inner.copies,
                    sequential_depth: seq.n,
                    uses: inner.copies * seq.n,
                    interleaved_locals: seq.locals,
                    party_dims: inner.party_dims,
                    input: inner.input,
                    phase_note: None,
                    residual: inner.residual,
                    certificate: cert,
                }
            }
        } else {
            cert.branch = Some(Branch::Parallel);
            let inner = parallel_plan(&a).map_err(|e| e.at_stage("parallel_plan"))?;
            cert.keylemma = inner.certificate.keylemma;
            cert.pivot = inner.certificate.pivot;
            cert.zero_lattice_point = inner.certificate.zero_lattice_point;
            DiscriminationScheme { certificate: cert, ..inner }
        }
    };
    scheme.phase_note = phase_note;

    // Independent re-evaluation against the original unitaries.
    let w1 = chain(u1.matrix(), &scheme.interleaved_locals)?;
    let w2 = chain(u2.matrix(), &scheme.interleaved_locals)?;
    let residual = factored_overlap(&(&w1.adjoint() * &w2), &scheme.input, scheme.copies)?.norm();
    if residual > opts.tol {
        return Err(Error::Convergence { what: "scheme residual".into(), best_residual: residual }.at_stage("verify"));
    }
    scheme.residual = residual;
    Ok(scheme)
}
