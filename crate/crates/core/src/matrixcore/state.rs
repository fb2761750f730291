use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of every constructed state.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct StateVector {
    amps: Vec<C64>,
}

impl TryFrom<Vec<C64>> for StateVector {
    type Error = Error;

    /// Deserialized states are checked, not renormalized, so that stored
    /// amplitudes survive a round trip bit for bit.
    fn try_from(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() || amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("state amplitudes must be finite and nonempty".into()));
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state has norm {norm}")));
        }
        Ok(StateVector { amps })
    }
}

impl From<StateVector> for Vec<C64> {
    fn from(s: StateVector) -> Self {
        s.amps
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl StateVector {
    /// Normalizes `amps`; fails on a zero or non-finite vector.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = norm(&amps);
        if amps.is_empty() || !n.is_finite() || n <= 1e-300 {
            return Err(Error::Argument("cannot normalize a zero or non-finite vector".into()));
        }
        let inv = 1.0 / n;
        Ok(StateVector { amps: amps.into_iter().map(|z| z * inv).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state |k⟩ in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// Rotates the global phase so the first amplitude with modulus above
    /// 1e-12 is real and positive.
    pub fn gauge_fixed(mut self) -> Self {
        if let Some(z) = self.amps.iter().find(|z| z.norm() > 1e-12) {
            let phase = z.conj() / z.norm();
            for a in &mut self.amps {
                *a *= phase;
            }
        }
        self
    }

    pub fn scaled_phase(&self, phase: C64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|z| z * phase).collect() }
    }

    /// Distance to `other` after optimizing the global phase.
    pub fn phase_distance(&self, other: &StateVector) -> f64 {
        let ov = other.inner(self);
        let phase = if ov.norm() > 1e-300 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b * phase).norm_sqr()).sum::<f64>().sqrt()
    }

    /// |ψ⟩⟨ψ|.
    pub fn projector(&self) -> super::CMatrix {
        super::CMatrix::outer(&self.amps, &self.amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes() {
        let s = StateVector::from_real(&[3.0, 4.0]).unwrap();
        assert!((s.norm() - 1.0).abs() <= NORM_TOL);
        assert!(StateVector::from_real(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn gauge_makes_first_amplitude_positive() {
        let s = StateVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)])
            .unwrap()
            .gauge_fixed();
        assert!(s.amplitudes()[1].im.abs() < 1e-15 && s.amplitudes()[1].re > 0.0);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let s = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let t = s.scaled_phase(C64::from_polar(1.0, 0.7));
        assert!(s.phase_distance(&t) < 1e-7);
        assert!(s.phase_distance(&StateVector::from_real(&[1.0, -1.0]).unwrap()) > 1.0);
    }

    #[test]
    fn deserialization_checks_norm() {
        assert!(serde_json::from_str::<StateVector>("[[1.0,0.0],[1.0,0.0]]").is_err());
        let s: StateVector = serde_json::from_str("[[0.6,0.0],[0.0,0.8]]").unwrap();
        assert_eq!(s.dim(), 2);
    }
}
