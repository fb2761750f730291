use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, StateVector};

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for sub-stream `k` (splitmix64 finalizer).
pub fn party_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
}

/// Haar-random unitary: Gram–Schmidt (applied twice) on the columns of a
/// complex Gaussian matrix, which leaves R with a positive diagonal.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = (0..d).map(|_| (0..d).map(|_| gaussian(rng)).collect()).collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj: C64 = done[k].iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, q) in rest[0].iter_mut().zip(done[k].iter()) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    let mut u = CMatrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    assert!(d >= 1, "dimension must be positive");
    random_unitary_with(d, &mut rng_from_seed(seed))
}

/// Tensor product of independent Haar unitaries, party k drawn from
/// `random_unitary(d_k, party_seed(seed, k))`.
pub fn random_local_unitary(party_dims: &[usize], seed: u64) -> CMatrix {
    party_dims
        .iter()
        .enumerate()
        .map(|(k, &d)| random_unitary(d, party_seed(seed, k as u64)))
        .reduce(|acc, u| acc.tensor_capped(&u, usize::MAX).expect("uncapped"))
        .unwrap_or_else(|| CMatrix::identity(1))
}

pub fn random_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    StateVector::new((0..d).map(|_| gaussian(rng)).collect()).expect("gaussian vector is nonzero")
}

pub fn random_state(d: usize, seed: u64) -> StateVector {
    random_state_with(d, &mut rng_from_seed(seed))
}

/// Random density matrix of full rank (Ginibre ensemble G G† / tr).
pub fn random_density_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_vec(d, d, (0..d * d).map(|_| gaussian(rng)).collect()).expect("shape");
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale(C64::new(1.0 / tr, 0.0)).hermitian_part()
}
