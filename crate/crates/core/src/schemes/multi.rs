//! More than two hypotheses: a champion-challenger elimination.
//!
//! Hypothesis 0 starts as champion. Stage j pits the current champion c
//! against challenger j using the pairwise scheme for (c, j) and measures
//! {P, I − P} with P the projector onto the output for U_c. Outcome P rules
//! out j, since j's output is orthogonal to c's; outcome I − P rules out c.
//! The true hypothesis therefore always survives, and k − 1 stages leave one.

use serde::{Deserialize, Serialize};

use super::dispatch::check_pair;
use super::{plan_discrimination_with, scheme_overlap, DiscriminationScheme, PlanOptions, SchemeKind};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::matrixcore::PartitionedOperator;

/// Branches below this probability are dropped from simulations.
pub const BRANCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Duel {
    pub champion: usize,
    pub scheme: DiscriminationScheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationStage {
    pub challenger: usize,
    /// One pairwise scheme per possible champion c < challenger.
    pub duels: Vec<Duel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationTree {
    pub kind: SchemeKind,
    pub hypotheses: usize,
    pub party_dims: Vec<usize>,
    pub stages: Vec<EliminationStage>,
    /// Uses of the unknown unitary along the most expensive path.
    pub max_uses: usize,
}

impl EliminationTree {
    pub fn duel(&self, champion: usize, challenger: usize) -> Option<&DiscriminationScheme> {
        let stage = self.stages.iter().find(|s| s.challenger == challenger)?;
        stage.duels.iter().find(|d| d.champion == champion).map(|d| &d.scheme)
    }
}

pub fn plan_multi(units: &[PartitionedOperator], seed: u64) -> Result<EliminationTree> {
    plan_multi_with(units, &PlanOptions::with_seed(seed))
}

pub fn plan_multi_with(units: &[PartitionedOperator], opts: &PlanOptions) -> Result<EliminationTree> {
    if units.len() < 2 {
        return Err(Error::Argument(format!("need at least two unitaries, got {}", units.len())));
    }
    let dims = units[0].party_dims().to_vec();
    if let Some(i) = units.iter().position(|u| u.party_dims() != dims.as_slice()) {
        return Err(Error::Shape(format!("unitary {i} has party dims {:?}, expected {dims:?}", units[i].party_dims())));
    }
    let pairs: Vec<(usize, usize)> = (1..units.len()).flat_map(|j| (0..j).map(move |c| (c, j))).collect();
    for &(c, j) in &pairs {
        check_pair(&units[c], &units[j]).map_err(|e| e.at_stage(&format!("pair ({c}, {j})")))?;
    }
    let planned: Vec<Result<DiscriminationScheme>> = map_indexed(pairs.len(), |p| {
        let (c, j) = pairs[p];
        plan_discrimination_with(&units[c], &units[j], opts).map_err(|e| Error::Planner {
            stage: format!("pair ({c}, {j})"),
            source: Box::new(e),
        })
    });
    let mut planned = planned.into_iter();
    let mut stages = Vec::with_capacity(units.len() - 1);
    let mut max_uses = 0;
    for j in 1..units.len() {
        let mut duels = Vec::with_capacity(j);
        for c in 0..j {
            let scheme = planned.next().expect("one scheme per pair")?;
            duels.push(Duel { champion: c, scheme });
        }
        max_uses += duels.iter().map(|d| d.scheme.uses).max().unwrap_or(0);
        stages.push(EliminationStage { challenger: j, duels });
    }
    Ok(EliminationTree { kind: SchemeKind::EliminationTree, hypotheses: units.len(), party_dims: dims, stages, max_uses })
}

/// One measurement history of the elimination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationBranch {
    pub probability: f64,
    /// Surviving hypothesis after the last stage.
    pub winner: usize,
    /// Eliminated hypotheses in order.
    pub eliminated: Vec<usize>,
    pub stages: usize,
}

/// Runs every outcome history with probability above 1e-9 when `truth` is
/// the unknown unitary.
pub fn simulate_elimination(tree: &EliminationTree, units: &[PartitionedOperator], truth: usize) -> Result<Vec<SimulationBranch>> {
    if units.len() != tree.hypotheses {
        return Err(Error::Shape(format!("{} unitaries for {} hypotheses", units.len(), tree.hypotheses)));
    }
    if truth >= units.len() {
        return Err(Error::Index { index: truth, len: units.len() });
    }
    let mut branches = vec![SimulationBranch { probability: 1.0, winner: 0, eliminated: Vec::new(), stages: 0 }];
    for stage in &tree.stages {
        let j = stage.challenger;
        let mut next = Vec::with_capacity(branches.len() * 2);
        for b in branches {
            let c = b.winner;
            let scheme = tree.duel(c, j).ok_or_else(|| Error::Validation(vec![format!("missing duel ({c}, {j})")]))?;
            let overlap = scheme_overlap(scheme, units[c].matrix(), units[truth].matrix())?;
            let keep = overlap.norm_sqr().clamp(0.0, 1.0);
            for (p, winner, loser) in [(keep, c, j), (1.0 - keep, j, c)] {
                let probability = b.probability * p;
                if probability > BRANCH_TOL {
                    let mut eliminated = b.eliminated.clone();
                    eliminated.push(loser);
                    next.push(SimulationBranch { probability, winner, eliminated, stages: b.stages + 1 });
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}
