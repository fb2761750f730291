use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, StateVector};
use crate::error::{Error, Result};

/// A square operator on ⊗_k C^{d_k} together with its party dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartitioned", into = "RawPartitioned")]
pub struct PartitionedOperator {
    matrix: CMatrix,
    party_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawPartitioned {
    party_dims: Vec<usize>,
    matrix: CMatrix,
}

impl TryFrom<RawPartitioned> for PartitionedOperator {
    type Error = Error;

    fn try_from(raw: RawPartitioned) -> Result<Self> {
        PartitionedOperator::new(raw.matrix, raw.party_dims)
    }
}

impl From<PartitionedOperator> for RawPartitioned {
    fn from(p: PartitionedOperator) -> Self {
        RawPartitioned { party_dims: p.party_dims, matrix: p.matrix }
    }
}

/// Product of the dimensions, or an error on zero entries / overflow.
pub fn total_dim(party_dims: &[usize]) -> Result<usize> {
    if party_dims.is_empty() {
        return Err(Error::Argument("at least one party is required".into()));
    }
    party_dims.iter().try_fold(1usize, |acc, &d| {
        if d == 0 {
            Err(Error::Argument("party dimensions must be positive".into()))
        } else {
            acc.checked_mul(d).ok_or(Error::SizeLimit { requested: usize::MAX, cap: super::DENSE_CAP })
        }
    })
}

impl PartitionedOperator {
    pub fn new(matrix: CMatrix, party_dims: Vec<usize>) -> Result<Self> {
        let d = total_dim(&party_dims)?;
        if !matrix.is_square() || matrix.rows() != d {
            return Err(Error::Shape(format!(
                "{}x{} matrix does not match party dims {:?} (product {d})",
                matrix.rows(),
                matrix.cols(),
                party_dims
            )));
        }
        Ok(PartitionedOperator { matrix, party_dims })
    }

    /// Single-party wrapper.
    pub fn whole(matrix: CMatrix) -> Result<Self> {
        let d = matrix.require_square()?;
        Self::new(matrix, vec![d])
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn parties(&self) -> usize {
        self.party_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Same partition, different matrix.
    pub fn with_matrix(&self, matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, self.party_dims.clone())
    }

    fn split(&self, party: usize) -> Result<(usize, usize, usize)> {
        if party >= self.party_dims.len() {
            return Err(Error::Index { index: party, len: self.party_dims.len() });
        }
        let left: usize = self.party_dims[..party].iter().product();
        let right: usize = self.party_dims[party + 1..].iter().product();
        Ok((left, self.party_dims[party], right))
    }

    /// Slots `state` into `party` and returns the operator on the remaining
    /// parties: entry (i, j) is ⟨i, state|A|j, state⟩.
    pub fn contract_party(&self, party: usize, state: &StateVector) -> Result<PartitionedOperator> {
        let (_, dk, _) = self.split(party)?;
        if state.dim() != dk {
            return Err(Error::Shape(format!(
                "state of dimension {} for party {party} of dimension {dk}",
                state.dim()
            )));
        }
        let s = state.amplitudes();
        self.contract_with(party, |a, b| s[a].conj() * s[b])
    }

    /// Partial trace tr_k[A (I ⊗ ρ_k)] for a density matrix on `party`.
    pub fn contract_party_mixed(&self, party: usize, rho: &CMatrix) -> Result<PartitionedOperator> {
        let (_, dk, _) = self.split(party)?;
        if rho.rows() != dk || rho.cols() != dk {
            return Err(Error::Shape(format!(
                "{}x{} density matrix for party {party} of dimension {dk}",
                rho.rows(),
                rho.cols()
            )));
        }
        self.contract_with(party, |a, b| rho[(b, a)])
    }

    fn contract_with(&self, party: usize, weight: impl Fn(usize, usize) -> C64) -> Result<PartitionedOperator> {
        let (left, dk, right) = self.split(party)?;
        let rest = left * right;
        let full = |l: usize, a: usize, r: usize| (l * dk + a) * right + r;
        let mut out = CMatrix::zeros(rest, rest);
        for a in 0..dk {
            for b in 0..dk {
                let w = weight(a, b);
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for li in 0..left {
                    for ri in 0..right {
                        let row = full(li, a, ri);
                        let i = li * right + ri;
                        for lj in 0..left {
                            for rj in 0..right {
                                out[(i, lj * right + rj)] += w * self.matrix[(row, full(lj, b, rj))];
                            }
                        }
                    }
                }
            }
        }
        let mut dims = self.party_dims.clone();
        dims.remove(party);
        if dims.is_empty() {
            dims.push(1);
        }
        PartitionedOperator::new(out, dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::{random_state, random_unitary};

    #[test]
    fn diagonal_selection() {
        let a = PartitionedOperator::new(CMatrix::from_real_diag(&[1.0, 1.0, -1.0, -1.0]), vec![2, 2]).unwrap();
        let m = a.contract_party(1, &StateVector::basis(2, 0)).unwrap();
        assert_eq!(m.party_dims(), &[2]);
        assert_eq!(m.matrix(), &CMatrix::from_real_diag(&[1.0, -1.0]));
    }

    #[test]
    fn identity_contracts_to_identity() {
        let a = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        let s = random_state(2, 3);
        for party in 0..2 {
            let m = a.contract_party(party, &s).unwrap();
            assert!(m.matrix().max_diff(&CMatrix::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn consistency_identity_all_parties() {
        let dims = vec![2, 3, 2];
        for seed in 0..20 {
            let a = PartitionedOperator::new(
                &random_unitary(12, seed) + &random_unitary(12, seed + 50).scale(C64::new(0.0, 0.7)),
                dims.clone(),
            )
            .unwrap();
            let states: Vec<_> = dims.iter().enumerate().map(|(k, &d)| random_state(d, seed * 7 + k as u64)).collect();
            let full = states[0].tensor(&states[1]).tensor(&states[2]);
            let direct = a.matrix().bracket(full.amplitudes(), full.amplitudes());
            for party in 0..3 {
                let m = a.contract_party(party, &states[party]).unwrap();
                let others: Vec<_> = (0..3).filter(|&p| p != party).collect();
                let rest = states[others[0]].tensor(&states[others[1]]);
                let v = m.matrix().bracket(rest.amplitudes(), rest.amplitudes());
                assert!((v - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_contraction_matches_pure_for_projector() {
        let a = PartitionedOperator::new(random_unitary(6, 4), vec![2, 3]).unwrap();
        let s = random_state(3, 9);
        let pure = a.contract_party(1, &s).unwrap();
        let mixed = a.contract_party_mixed(1, &s.projector()).unwrap();
        assert!(pure.matrix().max_diff(mixed.matrix()) < 1e-14);
    }

    #[test]
    fn rejects_bad_party() {
        let a = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        assert!(matches!(a.contract_party(2, &StateVector::basis(2, 0)), Err(Error::Index { .. })));
        assert!(matches!(a.contract_party(0, &StateVector::basis(3, 0)), Err(Error::Shape(_))));
        assert!(PartitionedOperator::new(CMatrix::identity(4), vec![2, 3]).is_err());
        assert!(PartitionedOperator::new(CMatrix::identity(4), vec![]).is_err());
    }
}
