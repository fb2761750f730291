//! Parallel scheme for operators that are not Hermitian up to phase.
//!
//! The values of A on Hermitian-basis product states cannot all share a ray,
//! so walking from one value to a non-co-linear one, changing one party's
//! index at a time, exposes two neighbouring tuples with non-co-linear values.
//! They differ at a single party, which then carries the two-state key-lemma
//! superposition across its copies while every other party repeats its basis
//! state.

use serde::{Deserialize, Serialize};

use num_complex::Complex64 as C64;

use super::keylemma::{angular_gap, keylemma_isotropic, keylemma_n};
use super::{Certificate, DiscriminationScheme, PartyInput, SchemeKind, SCHEME_TOL};
use crate::error::{Error, Result};
use crate::hermbasis::{build_lattice, canonical_phase, pair_colinear, BasisLattice, RayValue, COLINEAR_TOL};
use crate::localrange::{local_value, reduced_operator};
use crate::matrixcore::PartitionedOperator;

/// Neighbouring lattice tuples chosen for the key lemma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pivot {
    /// The party whose index differs.
    pub party: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub values: [C64; 2],
    pub theta: f64,
}

/// Tuples visited when turning `from` into `to`, last party first.
fn lattice_path(from: &[usize], to: &[usize]) -> Vec<Vec<usize>> {
    let mut path = vec![from.to_vec()];
    let mut cur = from.to_vec();
    for k in (0..from.len()).rev() {
        if cur[k] != to[k] {
            cur[k] = to[k];
            path.push(cur.clone());
        }
    }
    path
}

fn choose_pivot(lattice: &BasisLattice) -> Result<Pivot> {
    let values = lattice.values();
    let start = 0;
    let z0 = RayValue::from_complex(values[start])?;
    let mut far = start;
    let mut best_gap = 0.0;
    for (i, &z) in values.iter().enumerate() {
        let gap = angular_gap(z0, RayValue::from_complex(z)?);
        if gap > best_gap && !pair_colinear(values[start], z, COLINEAR_TOL) {
            best_gap = gap;
            far = i;
        }
    }
    if far == start {
        return Err(Error::Contradiction("all lattice values are co-linear although the operator is not Hermitian up to phase".into()));
    }
    let path = lattice_path(&lattice.tuple(start), &lattice.tuple(far));
    let mut best: Option<Pivot> = None;
    for pair in path.windows(2) {
        let (l, r) = (lattice.value(&pair[0])?, lattice.value(&pair[1])?);
        if pair_colinear(l, r, COLINEAR_TOL) {
            continue;
        }
        let Ok((theta, _)) = keylemma_n(RayValue::from_complex(l)?, RayValue::from_complex(r)?) else {
            continue;
        };
        // Later pairs win ties.
        if best.as_ref().is_none_or(|b| theta >= b.theta - 1e-12) {
            let party = (0..pair[0].len()).find(|&k| pair[0][k] != pair[1][k]).expect("neighbours differ");
            best = Some(Pivot { party, left: pair[0].clone(), right: pair[1].clone(), values: [l, r], theta });
        }
    }
    best.ok_or_else(|| Error::Contradiction("no non-co-linear neighbours along the lattice path".into()))
}

/// Parallel scheme (or a single run when a lattice value vanishes) for an
/// operator that is not Hermitian up to phase.
pub fn parallel_plan(a: &PartitionedOperator) -> Result<DiscriminationScheme> {
    if canonical_phase(a.matrix())?.is_some() {
        return Err(Error::Domain("operator is Hermitian up to phase".into()));
    }
    let lattice = build_lattice(a)?;
    if let Some(flat) = lattice.first_zero() {
        let state = lattice.product_state(&lattice.tuple(flat))?;
        let residual = local_value(a, &state)?.norm();
        let cert = Certificate { zero_lattice_point: true, ..Certificate::default() };
        return Ok(DiscriminationScheme::single_run(&state, residual, cert));
    }
    let pivot = choose_pivot(&lattice)?;
    let k = pivot.party;
    let fixed = lattice.product_state(&pivot.left)?;
    let m = reduced_operator(a, &fixed, k)?;
    let psi1 = lattice.bases()[k][pivot.left[k]].clone();
    let psi2 = lattice.bases()[k][pivot.right[k]].clone();
    let key = keylemma_isotropic(&m, &psi1, &psi2)?;
    let n = key.plan.n;
    let input: Vec<PartyInput> = (0..a.parties())
        .map(|q| {
            if q == k {
                PartyInput::Superposition { psi1: psi1.clone(), psi2: psi2.clone(), terms: key.terms.clone() }
            } else {
                PartyInput::Product { copy_state: fixed.party(q).clone() }
            }
        })
        .collect();
    let residual = super::factored_overlap(a.matrix(), &input, n)?.norm();
    if residual > SCHEME_TOL {
        return Err(Error::Convergence { what: "parallel_plan".into(), best_residual: residual });
    }
    let certificate = Certificate { keylemma: Some(key.plan), pivot: Some(pivot), ..Certificate::default() };
    Ok(DiscriminationScheme {
        kind: if n == 1 { SchemeKind::SingleRun } else { SchemeKind::Parallel },
        copies: n,
        sequential_depth: 1,
        interleaved_locals: Vec::new(),
        party_dims: a.party_dims().to_vec(),
        input,
        phase_note: None,
        residual,
        uses: n,
        certificate,
    })
}
