//! Seeded search for local interleavers that make W₁†W₂ non-Hermitian up to
//! phase when U₁†U₂ itself is Hermitian up to phase.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{chain, LocalUnitary};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::hermbasis::{canonical_phase, ZERO_TOL};
use crate::matrixcore::random::party_seed;
use crate::matrixcore::{random_unitary, CMatrix, PartitionedOperator};

/// min_θ ‖e^{−iθ}A − (e^{−iθ}A)†‖_F = √(2‖A‖² − 2|tr A²|).
/// Evaluated at the minimizing phase θ = arg(tr A²)/2 to avoid cancellation.
pub fn non_hermiticity(a: &CMatrix) -> f64 {
    let theta = (a * a).trace().arg() / 2.0;
    let b = a.scale(C64::from_polar(1.0, -theta));
    (&b - &b.adjoint()).frobenius_norm()
}

/// One depth of the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialAttempt {
    pub n: usize,
    /// Candidates tried: the identity, then the random draws.
    pub candidates: usize,
    /// Index of the accepted candidate (0 is the identity).
    pub accepted: Option<usize>,
    /// Index committed to this slot when moving on.
    pub committed: usize,
    /// Largest non-Hermiticity seen among the candidates.
    pub best_defect: f64,
    pub observed_trace: C64,
    /// (tr D / d)^{n−1} tr D for D = U₁†U₂, the interleaver-averaged trace.
    pub averaged_trace: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialRecord {
    pub seed: u64,
    pub starts: usize,
    pub n_max: usize,
    pub attempts: Vec<SequentialAttempt>,
    /// Non-Hermiticity of the accepted W₁†W₂.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequentialOutcome {
    pub n: usize,
    pub locals: Vec<LocalUnitary>,
    pub w1: CMatrix,
    pub w2: CMatrix,
    pub record: SequentialRecord,
}

fn random_local(party_dims: &[usize], seed: u64) -> LocalUnitary {
    LocalUnitary {
        factors: party_dims.iter().enumerate().map(|(k, &d)| random_unitary(d, party_seed(seed, k as u64))).collect(),
    }
}

/// Whether W₁†W₂ = e^{iφ}I within 1e-10.
fn proportional_to_identity(a: &CMatrix) -> bool {
    let d = a.rows() as f64;
    let shift = CMatrix::identity(a.rows()).scale(a.trace() / d);
    (a - &shift).frobenius_norm() <= 1e-10
}

/// Extends the interleaved sequence one slot at a time until W₁†W₂ is no
/// longer Hermitian up to phase. Each depth tries the identity and then
/// `starts` seeded random local unitaries; when none works the first random
/// draw is kept and the search moves one level deeper.
pub fn sequential_search(
    u1: &PartitionedOperator,
    u2: &PartitionedOperator,
    seed: u64,
    n_max: usize,
    starts: usize,
) -> Result<SequentialOutcome> {
    if u1.party_dims() != u2.party_dims() {
        return Err(Error::Shape("operators have different party dims".into()));
    }
    let d = &u1.matrix().adjoint() * u2.matrix();
    let Some(phase) = canonical_phase(&d)? else {
        return Err(Error::Domain("U₁†U₂ is not Hermitian up to phase".into()));
    };
    let tr_d = d.trace();
    if phase.hermitian.trace().norm() <= ZERO_TOL {
        return Err(Error::Domain("U₁†U₂ is traceless".into()));
    }
    let dims = u1.party_dims();
    let dim = u1.dim() as f64;
    let mut locals: Vec<LocalUnitary> = Vec::new();
    let mut attempts = Vec::new();
    let (mut w1, mut w2) = (u1.matrix().clone(), u2.matrix().clone());
    for n in 2..=n_max {
        let level = party_seed(seed, n as u64);
        let candidates: Vec<LocalUnitary> = std::iter::once(LocalUnitary::identity(dims))
            .chain((0..starts).map(|j| random_local(dims, party_seed(level, j as u64))))
            .collect();
        let evaluated: Vec<Result<(CMatrix, CMatrix, bool, f64)>> = map_indexed(candidates.len(), |j| {
            let u = candidates[j].dense()?;
            let n1 = &(u1.matrix() * &u) * &w1;
            let n2 = &(u2.matrix() * &u) * &w2;
            let a = &n1.adjoint() * &n2;
            let ok = canonical_phase(&a)?.is_none() && !proportional_to_identity(&a);
            let defect = non_hermiticity(&a);
            Ok((n1, n2, ok, defect))
        });
        let evaluated: Vec<(CMatrix, CMatrix, bool, f64)> = evaluated.into_iter().collect::<Result<_>>()?;
        let accepted = evaluated.iter().position(|e| e.2);
        let committed = accepted.unwrap_or(if candidates.len() > 1 { 1 } else { 0 });
        let best_defect = evaluated.iter().map(|e| e.3).fold(0.0, f64::max);
        let (n1, n2, _, defect) = evaluated.into_iter().nth(committed).expect("candidate exists");
        locals.push(candidates[committed].clone());
        w1 = n1;
        w2 = n2;
        attempts.push(SequentialAttempt {
            n,
            candidates: candidates.len(),
            accepted,
            committed,
            best_defect,
            observed_trace: (&w1.adjoint() * &w2).trace(),
            averaged_trace: (tr_d / dim).powi(n as i32 - 1) * tr_d,
        });
        if accepted.is_some() {
            debug_assert!(chain(u1.matrix(), &locals).is_ok_and(|w| w.max_diff(&w1) < 1e-9));
            let record = SequentialRecord { seed, starts, n_max, attempts, defect };
            return Ok(SequentialOutcome { n, locals, w1, w2, record });
        }
    }
    let summary: Vec<String> = attempts.iter().map(|a| format!("n={} best defect {:e}", a.n, a.best_defect)).collect();
    Err(Error::SearchFailed(format!("no interleaver up to n = {n_max} ({})", summary.join(", "))))
}
