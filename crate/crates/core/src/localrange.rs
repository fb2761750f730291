//! The local numerical range: values ⟨s|A|s⟩ over product states s, the
//! see-saw minimization of |⟨s|A|s⟩|, the Hermitian interval, and the
//! purification of mixed product values.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{argmin_with_ties, map_indexed};
use crate::matrixcore::random::{party_seed, random_state};
use crate::matrixcore::{eig_hermitian, CMatrix, PartitionedOperator, StateVector, NORM_TOL};
use crate::numrange::{achieve_value, nearest_to_origin, SearchOptions};

/// Threshold on min |⟨s|A|s⟩| below which 0 is taken to lie in the local range.
pub const LOCAL_ZERO_TOL: f64 = 1e-8;
/// Residual contract for product states claimed to be isotropic.
pub const ISOTROPIC_TOL: f64 = 1e-9;

/// One normalized state per party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StateVector>", into = "Vec<StateVector>")]
pub struct ProductState {
    party_states: Vec<StateVector>,
}

impl TryFrom<Vec<StateVector>> for ProductState {
    type Error = Error;

    fn try_from(party_states: Vec<StateVector>) -> Result<Self> {
        ProductState::new(party_states)
    }
}

impl From<ProductState> for Vec<StateVector> {
    fn from(s: ProductState) -> Self {
        s.party_states
    }
}

impl ProductState {
    pub fn new(party_states: Vec<StateVector>) -> Result<Self> {
        if party_states.is_empty() {
            return Err(Error::Argument("a product state needs at least one party".into()));
        }
        if let Some((k, s)) = party_states.iter().enumerate().find(|(_, s)| (s.norm() - 1.0).abs() > NORM_TOL) {
            return Err(Error::Argument(format!("party {k} state has norm {}", s.norm())));
        }
        Ok(ProductState { party_states })
    }

    /// |i_1⟩ ⊗ … ⊗ |i_n⟩.
    pub fn basis(party_dims: &[usize], indices: &[usize]) -> Result<Self> {
        if party_dims.len() != indices.len() {
            return Err(Error::Shape(format!("{} dims but {} indices", party_dims.len(), indices.len())));
        }
        let mut states = Vec::with_capacity(indices.len());
        for (&d, &i) in party_dims.iter().zip(indices) {
            if i >= d {
                return Err(Error::Index { index: i, len: d });
            }
            states.push(StateVector::basis(d, i));
        }
        ProductState::new(states)
    }

    pub fn party_states(&self) -> &[StateVector] {
        &self.party_states
    }

    pub fn party(&self, k: usize) -> &StateVector {
        &self.party_states[k]
    }

    pub fn parties(&self) -> usize {
        self.party_states.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.party_states.iter().map(StateVector::dim).collect()
    }

    /// Copy with party `k` replaced.
    pub fn with_party(&self, k: usize, state: StateVector) -> Result<Self> {
        if k >= self.parties() {
            return Err(Error::Index { index: k, len: self.parties() });
        }
        if state.dim() != self.party_states[k].dim() {
            return Err(Error::Shape(format!("party {k} has dimension {}, got {}", self.party_states[k].dim(), state.dim())));
        }
        let mut out = self.clone();
        out.party_states[k] = state;
        Ok(out)
    }

    /// Dense tensor product, party 1 slowest.
    pub fn to_dense(&self) -> Result<StateVector> {
        crate::matrixcore::total_dim(&self.dims())?;
        let mut it = self.party_states.iter();
        let first = it.next().expect("nonempty").clone();
        Ok(it.fold(first, |acc, s| acc.tensor(s)))
    }

    /// Phase-insensitive distance, maximized over parties.
    pub fn max_phase_distance(&self, other: &ProductState) -> f64 {
        self.party_states
            .iter()
            .zip(&other.party_states)
            .map(|(a, b)| a.phase_distance(b))
            .fold(0.0, f64::max)
    }

    fn check_against(&self, a: &PartitionedOperator) -> Result<()> {
        if self.dims() != a.party_dims() {
            return Err(Error::Shape(format!(
                "product state dims {:?} do not match operator dims {:?}",
                self.dims(),
                a.party_dims()
            )));
        }
        Ok(())
    }
}

/// ⟨s|A|s⟩ by contracting one party at a time.
pub fn local_value(a: &PartitionedOperator, s: &ProductState) -> Result<C64> {
    s.check_against(a)?;
    let mut op = a.clone();
    for k in (0..s.parties()).rev() {
        op = op.contract_party(k, s.party(k))?;
    }
    Ok(op.matrix()[(0, 0)])
}

/// Operator seen by party `k` when every other party is fixed.
pub fn reduced_operator(a: &PartitionedOperator, s: &ProductState, k: usize) -> Result<CMatrix> {
    s.check_against(a)?;
    if k >= s.parties() {
        return Err(Error::Index { index: k, len: s.parties() });
    }
    let mut op = a.clone();
    for j in (0..s.parties()).rev().filter(|&j| j != k) {
        op = op.contract_party(j, s.party(j))?;
    }
    Ok(op.into_matrix())
}

/// Values of A at random product states, for plotting the local range.
pub fn local_samples(a: &PartitionedOperator, count: usize, seed: u64) -> Result<Vec<(C64, ProductState)>> {
    map_indexed(count, |j| {
        let s = start_state(a.party_dims(), seed, j as u64 + 1);
        Ok((local_value(a, &s)?, s))
    })
    .into_iter()
    .collect()
}

/// Controls for the alternating per-party optimizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeeSawOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_sweeps: usize,
    /// Stop once a sweep changes the objective by less than this.
    pub tol: f64,
    /// A run reaching |value| ≤ target stops, and so do the remaining
    /// batches of starts.
    pub target: f64,
}

/// Starts are launched in batches of this size; the multistart ends after
/// the first batch that reaches the target.
pub const START_BATCH: usize = 8;

impl Default for SeeSawOptions {
    fn default() -> Self {
        SeeSawOptions { seed: 0, starts: 32, max_sweeps: 200, tol: 1e-12, target: 1e-14 }
    }
}

impl SeeSawOptions {
    pub fn new(seed: u64, starts: usize) -> Self {
        SeeSawOptions { seed, starts: starts.max(1), ..Self::default() }
    }
}

/// Start 0 is |0…0⟩; the rest are Haar-random product states.
fn start_state(dims: &[usize], seed: u64, start: u64) -> ProductState {
    let states = if start == 0 {
        dims.iter().map(|&d| StateVector::basis(d, 0)).collect()
    } else {
        let s = party_seed(seed, start);
        dims.iter().enumerate().map(|(k, &d)| random_state(d, party_seed(s, k as u64))).collect()
    };
    ProductState { party_states: states }
}

/// Best product state found by the see-saw, with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMinimum {
    pub value: C64,
    pub state: ProductState,
    /// Starts actually run.
    pub starts: usize,
    pub best_start: usize,
    pub sweeps: usize,
}

impl LocalMinimum {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// Locally minimal |⟨s|A|s⟩| over product states, multistart see-saw.
pub fn min_abs_local(a: &PartitionedOperator, seed: u64, starts: usize) -> Result<LocalMinimum> {
    min_abs_local_with(a, &SeeSawOptions::new(seed, starts))
}

pub fn min_abs_local_with(a: &PartitionedOperator, opts: &SeeSawOptions) -> Result<LocalMinimum> {
    let starts = opts.starts.max(1);
    let mut runs: Vec<Result<(C64, ProductState, usize)>> = Vec::with_capacity(starts);
    for first in (0..starts).step_by(START_BATCH) {
        let batch = START_BATCH.min(starts - first);
        runs.extend(map_indexed(batch, |i| {
            let j = (first + i) as u64;
            let s = start_state(a.party_dims(), opts.seed, j);
            descend_abs(a, s, opts, party_seed(opts.seed ^ 0x5eed, j))
        }));
        if runs.iter().any(|r| r.as_ref().is_ok_and(|r| r.0.norm() <= opts.target)) {
            break;
        }
    }
    let ran = runs.len();
    pick_best(runs, ran)
}

/// Single see-saw run from a given product state.
pub fn min_abs_local_from(a: &PartitionedOperator, initial: &ProductState, opts: &SeeSawOptions) -> Result<LocalMinimum> {
    initial.check_against(a)?;
    let run = descend_abs(a, initial.clone(), opts, party_seed(opts.seed ^ 0x5eed, 0));
    pick_best(vec![run], 1)
}

fn pick_best(runs: Vec<Result<(C64, ProductState, usize)>>, starts: usize) -> Result<LocalMinimum> {
    let runs: Vec<(C64, ProductState, usize)> = runs.into_iter().collect::<Result<_>>()?;
    let keys: Vec<f64> = runs.iter().map(|r| r.0.norm()).collect();
    let best = argmin_with_ties(&keys, 0.0).expect("at least one start");
    let (value, state, sweeps) = runs.into_iter().nth(best).expect("index in range");
    Ok(LocalMinimum { value, state, starts, best_start: best, sweeps })
}

fn descend_abs(
    a: &PartitionedOperator,
    mut s: ProductState,
    opts: &SeeSawOptions,
    search_seed: u64,
) -> Result<(C64, ProductState, usize)> {
    let mut value = local_value(a, &s)?;
    let search = SearchOptions::with_seed(search_seed);
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps && value.norm() > opts.target {
        sweeps += 1;
        let before = value.norm();
        for k in 0..s.parties() {
            let m = reduced_operator(a, &s, k)?;
            let near = nearest_to_origin(&m, &search)?;
            if near.value.norm() < value.norm() - 1e-15 {
                s.party_states[k] = near.witness;
                value = local_value(a, &s)?;
            }
        }
        if (before - value.norm()).abs() < opts.tol {
            break;
        }
    }
    Ok((value, s, sweeps))
}

/// Extremes of the real form ⟨s|A|s⟩ over product states, for Hermitian A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_state: ProductState,
    pub hi_state: ProductState,
}

pub fn hermitian_local_interval(a: &PartitionedOperator) -> Result<HermitianInterval> {
    hermitian_local_interval_with(a, &SeeSawOptions::default())
}

pub fn hermitian_local_interval_with(a: &PartitionedOperator, opts: &SeeSawOptions) -> Result<HermitianInterval> {
    let defect = a.matrix().hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::Domain(format!("operator is not Hermitian (defect {defect:e})")));
    }
    let starts = opts.starts.max(1);
    let extreme = |sign: f64| -> Result<(f64, ProductState)> {
        let runs: Vec<Result<(f64, ProductState)>> = map_indexed(starts, |j| {
            descend_real(a, start_state(a.party_dims(), opts.seed, j as u64), sign, opts)
        });
        let runs: Vec<(f64, ProductState)> = runs.into_iter().collect::<Result<_>>()?;
        let keys: Vec<f64> = runs.iter().map(|r| sign * r.0).collect();
        let best = argmin_with_ties(&keys, 1e-12).expect("at least one start");
        Ok(runs.into_iter().nth(best).expect("index in range"))
    };
    let (lo, lo_state) = extreme(1.0)?;
    let (hi, hi_state) = extreme(-1.0)?;
    Ok(HermitianInterval { lo, hi, lo_state, hi_state })
}

/// Minimizes sign·⟨s|A|s⟩ by per-party extreme eigenvectors.
fn descend_real(a: &PartitionedOperator, mut s: ProductState, sign: f64, opts: &SeeSawOptions) -> Result<(f64, ProductState)> {
    let mut value = local_value(a, &s)?.re;
    for _ in 0..opts.max_sweeps {
        let before = value;
        for k in 0..s.parties() {
            let m = reduced_operator(a, &s, k)?;
            let e = eig_hermitian(&m)?;
            let idx = if sign > 0.0 { e.values.len() - 1 } else { 0 };
            if sign * e.values[idx] < sign * value - 1e-15 {
                s.party_states[k] = StateVector::new(e.vector(idx))?.gauge_fixed();
                value = local_value(a, &s)?.re;
            }
        }
        if (before - value).abs() < opts.tol {
            break;
        }
    }
    Ok((value, s))
}

/// How an isotropic product state for a Hermitian operator was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotropicPath {
    /// One of the interval witnesses already has value zero.
    Endpoint,
    /// Root of the value along per-party great circles between the witnesses.
    Geodesic,
    /// Multistart see-saw after the path failed.
    SeeSaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalIsotropic {
    pub state: ProductState,
    pub value: f64,
    pub path: IsotropicPath,
}

/// Product state with ⟨s|A|s⟩ = 0 for Hermitian A whose local interval
/// straddles zero.
pub fn hermitian_local_isotropic(a: &PartitionedOperator) -> Result<LocalIsotropic> {
    hermitian_local_isotropic_with(a, &SeeSawOptions::default())
}

pub fn hermitian_local_isotropic_with(a: &PartitionedOperator, opts: &SeeSawOptions) -> Result<LocalIsotropic> {
    let iv = hermitian_local_interval_with(a, opts)?;
    if iv.lo > ISOTROPIC_TOL || iv.hi < -ISOTROPIC_TOL {
        return Err(Error::Domain(format!("local interval [{}, {}] does not contain 0", iv.lo, iv.hi)));
    }
    if iv.lo.abs() <= ISOTROPIC_TOL {
        return Ok(LocalIsotropic { state: iv.lo_state, value: iv.lo, path: IsotropicPath::Endpoint });
    }
    if iv.hi.abs() <= ISOTROPIC_TOL {
        return Ok(LocalIsotropic { state: iv.hi_state, value: iv.hi, path: IsotropicPath::Endpoint });
    }

    let arcs: Vec<Arc> = iv.lo_state.party_states().iter().zip(iv.hi_state.party_states()).map(|(u, v)| Arc::new(u, v)).collect();
    let at = |t: f64| -> Result<ProductState> { ProductState::new(arcs.iter().map(|arc| arc.point(t)).collect::<Result<_>>()?) };
    let f = |t: f64| -> Result<f64> { Ok(local_value(a, &at(t)?)?.re) };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo <= 0.0 && f_hi >= 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = f(mid)?;
            if v.abs() <= 1e-15 {
                lo = mid;
                hi = mid;
                break;
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let state = at(t)?;
        let value = local_value(a, &state)?.re;
        if value.abs() <= ISOTROPIC_TOL {
            let state = ProductState::new(state.party_states.into_iter().map(StateVector::gauge_fixed).collect())?;
            return Ok(LocalIsotropic { state, value, path: IsotropicPath::Geodesic });
        }
    }
    let best = min_abs_local_with(a, opts)?;
    if best.modulus() > ISOTROPIC_TOL {
        return Err(Error::Convergence { what: "hermitian_local_isotropic".into(), best_residual: best.modulus() });
    }
    Ok(LocalIsotropic { state: best.state, value: best.value.re, path: IsotropicPath::SeeSaw })
}

/// Great circle from u to a phase-aligned copy of v.
struct Arc {
    u: Vec<C64>,
    v: Vec<C64>,
    omega: f64,
}

impl Arc {
    fn new(u: &StateVector, v: &StateVector) -> Arc {
        let ov = u.inner(v);
        let phase = if ov.norm() > 1e-300 { ov.conj() / ov.norm() } else { C64::new(1.0, 0.0) };
        let v = v.scaled_phase(phase);
        let omega = ov.norm().min(1.0).acos();
        Arc { u: u.amplitudes().to_vec(), v: v.amplitudes().to_vec(), omega }
    }

    fn point(&self, t: f64) -> Result<StateVector> {
        if self.omega < 1e-12 {
            return StateVector::new(self.u.clone());
        }
        let (a, b) = (((1.0 - t) * self.omega).sin(), (t * self.omega).sin());
        StateVector::new(self.u.iter().zip(&self.v).map(|(x, y)| x * a + y * b).collect())
    }
}

/// Checks Hermiticity, unit trace and positivity to 1e-9.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    rho.require_square()?;
    let defect = rho.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::Domain(format!("density matrix is not Hermitian (defect {defect:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Domain(format!("density matrix has trace {tr}")));
    }
    let e = eig_hermitian(rho)?;
    let min = e.values.last().copied().unwrap_or(0.0);
    if min < -1e-9 {
        return Err(Error::Domain(format!("density matrix has eigenvalue {min}")));
    }
    Ok(())
}

/// tr(A ⊗_k ρ_k).
pub fn mixed_product_value(a: &PartitionedOperator, rhos: &[CMatrix]) -> Result<C64> {
    if rhos.len() != a.parties() {
        return Err(Error::Shape(format!("{} density matrices for {} parties", rhos.len(), a.parties())));
    }
    let mut op = a.clone();
    for k in (0..rhos.len()).rev() {
        op = op.contract_party_mixed(k, &rhos[k])?;
    }
    Ok(op.matrix()[(0, 0)])
}

/// Pure product state with the same value as the mixed product ⊗_k ρ_k,
/// obtained by purifying one party at a time.
pub fn purify_product_value(a: &PartitionedOperator, rhos: &[CMatrix]) -> Result<ProductState> {
    if rhos.len() != a.parties() {
        return Err(Error::Shape(format!("{} density matrices for {} parties", rhos.len(), a.parties())));
    }
    for (k, rho) in rhos.iter().enumerate() {
        if rho.rows() != a.party_dims()[k] {
            return Err(Error::Shape(format!("density matrix {k} has dimension {}, party has {}", rho.rows(), a.party_dims()[k])));
        }
        validate_density(rho)?;
    }
    let target = mixed_product_value(a, rhos)?;
    let n = rhos.len();
    let mut pure: Vec<StateVector> = Vec::with_capacity(n);
    for k in 0..n {
        // Parties after k stay mixed, parties before k are already pure.
        let mut op = a.clone();
        for j in (k + 1..n).rev() {
            op = op.contract_party_mixed(j, &rhos[j])?;
        }
        for j in (0..k).rev() {
            op = op.contract_party(j, &pure[j])?;
        }
        let m = op.into_matrix();
        let e = eig_hermitian(&rhos[k])?;
        let (mut states, mut weights) = (Vec::new(), Vec::new());
        for (i, &w) in e.values.iter().enumerate() {
            if w > 1e-14 {
                states.push(StateVector::new(e.vector(i))?);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        pure.push(achieve_value(&m, &states, &weights)?);
    }
    let s = ProductState::new(pure)?;
    let residual = (local_value(a, &s)? - target).norm();
    if residual > 1e-8 {
        return Err(Error::Convergence { what: "purify_product_value".into(), best_residual: residual });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::gates;
    use crate::matrixcore::random::{random_density_with, rng_from_seed};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example_one() -> PartitionedOperator {
        PartitionedOperator::new(CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)]), vec![2, 2]).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::from_real(&[1.0, 1.0]).unwrap()
    }

    fn minus_phi(weights: [f64; 2]) -> PartitionedOperator {
        let phi = StateVector::from_real(&[weights[0], 0.0, 0.0, weights[1]]).unwrap();
        let m = &CMatrix::identity(4) - &phi.projector().scale(c(2.0, 0.0));
        PartitionedOperator::new(m, vec![2, 2]).unwrap()
    }

    #[test]
    fn local_value_examples() {
        let id = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        let s = ProductState::new(vec![plus(), StateVector::basis(2, 1)]).unwrap();
        assert!((local_value(&id, &s).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let a = example_one();
        let s00 = ProductState::basis(&[2, 2], &[0, 0]).unwrap();
        assert_eq!(local_value(&a, &s00).unwrap(), c(1.0, 0.0));
        let pp = ProductState::new(vec![plus(), plus()]).unwrap();
        assert!((local_value(&a, &pp).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn local_value_matches_dense_bracket() {
        let mut rng = rng_from_seed(3);
        for seed in 0..20 {
            let u = crate::matrixcore::random_unitary(6, seed);
            let a = PartitionedOperator::new(u.clone(), vec![2, 3]).unwrap();
            let s = ProductState::new(vec![
                crate::matrixcore::random::random_state_with(2, &mut rng),
                crate::matrixcore::random::random_state_with(3, &mut rng),
            ])
            .unwrap();
            let dense = s.to_dense().unwrap();
            let want = u.bracket(dense.amplitudes(), dense.amplitudes());
            assert!((local_value(&a, &s).unwrap() - want).norm() < 1e-13);
        }
    }

    #[test]
    fn local_value_rejects_mismatched_dims() {
        let s = ProductState::basis(&[2, 3], &[0, 0]).unwrap();
        assert!(matches!(local_value(&example_one(), &s), Err(Error::Shape(_))));
    }

    #[test]
    fn min_abs_traceless_factor() {
        let a = PartitionedOperator::new(gates::sigma_z().tensor(&CMatrix::identity(2)).unwrap(), vec![2, 2]).unwrap();
        let m = min_abs_local(&a, 1, 4).unwrap();
        assert!(m.modulus() < 1e-12);
        assert!(m.state.party(0).phase_distance(&plus()) < 1e-8);
    }

    #[test]
    fn min_abs_example_one_is_half() {
        let m = min_abs_local(&example_one(), 7, 32).unwrap();
        assert!((m.modulus() - 0.5).abs() < 1e-6, "{}", m.modulus());
        for s in m.state.party_states() {
            for z in s.amplitudes() {
                assert!((z.norm() - FRAC_1_SQRT_2).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn min_abs_identity_is_one() {
        let a = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        assert!((min_abs_local(&a, 0, 4).unwrap().modulus() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_abs_is_deterministic() {
        let u = crate::matrixcore::random_unitary(4, 11);
        let a = PartitionedOperator::new(u, vec![2, 2]).unwrap();
        assert_eq!(min_abs_local(&a, 5, 6).unwrap(), min_abs_local(&a, 5, 6).unwrap());
    }

    #[test]
    fn interval_examples() {
        let zz = PartitionedOperator::new(gates::sigma_z().tensor(&gates::sigma_z()).unwrap(), vec![2, 2]).unwrap();
        let iv = hermitian_local_interval(&zz).unwrap();
        assert!((iv.lo + 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);

        let iv = hermitian_local_interval(&minus_phi([1.0, 1.0])).unwrap();
        assert!(iv.lo.abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);
        assert!(iv.lo_state.max_phase_distance(&ProductState::basis(&[2, 2], &[0, 0]).unwrap()) < 1e-12);

        let id = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        let iv = hermitian_local_interval(&id).unwrap();
        assert!((iv.lo - 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);

        assert!(matches!(hermitian_local_interval(&example_one()), Err(Error::Domain(_))));
    }

    #[test]
    fn isotropic_endpoint() {
        let iso = hermitian_local_isotropic(&minus_phi([1.0, 1.0])).unwrap();
        assert_eq!(iso.path, IsotropicPath::Endpoint);
        assert!(iso.state.max_phase_distance(&ProductState::basis(&[2, 2], &[0, 0]).unwrap()) < 1e-12);
    }

    #[test]
    fn isotropic_along_geodesic() {
        let a = minus_phi([0.75f64.sqrt(), 0.25f64.sqrt()]);
        let s00 = ProductState::basis(&[2, 2], &[0, 0]).unwrap();
        let s01 = ProductState::basis(&[2, 2], &[0, 1]).unwrap();
        assert!((local_value(&a, &s00).unwrap().re + 0.5).abs() < 1e-12);
        assert!((local_value(&a, &s01).unwrap().re - 1.0).abs() < 1e-12);
        let iso = hermitian_local_isotropic(&a).unwrap();
        assert!(local_value(&a, &iso.state).unwrap().norm() <= 1e-9);
        assert_ne!(iso.path, IsotropicPath::Endpoint);
    }

    #[test]
    fn isotropic_sigma_z_first_party() {
        let a = PartitionedOperator::new(gates::sigma_z().tensor(&CMatrix::identity(2)).unwrap(), vec![2, 2]).unwrap();
        let iso = hermitian_local_isotropic(&a).unwrap();
        let want = ProductState::new(vec![plus(), StateVector::basis(2, 0)]).unwrap();
        assert!(iso.state.max_phase_distance(&want) < 1e-8);
        assert_eq!(iso.path, IsotropicPath::Geodesic);
    }

    #[test]
    fn isotropic_requires_straddling_interval() {
        let id = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        assert!(matches!(hermitian_local_isotropic(&id), Err(Error::Domain(_))));
    }

    #[test]
    fn purify_examples() {
        let a = example_one();
        let rhos = [CMatrix::identity(2).scale(c(0.5, 0.0)), StateVector::basis(2, 0).projector()];
        let s = purify_product_value(&a, &rhos).unwrap();
        assert!((local_value(&a, &s).unwrap() - c(0.5, 0.5)).norm() <= 1e-8);

        let pure = [plus(), StateVector::basis(2, 1)];
        let rhos: Vec<_> = pure.iter().map(StateVector::projector).collect();
        let s = purify_product_value(&a, &rhos).unwrap();
        assert!(s.max_phase_distance(&ProductState::new(pure.to_vec()).unwrap()) < 1e-7);

        let id = PartitionedOperator::new(CMatrix::identity(6), vec![2, 3]).unwrap();
        let mut rng = rng_from_seed(1);
        let rhos = [random_density_with(2, &mut rng), random_density_with(3, &mut rng)];
        let s = purify_product_value(&id, &rhos).unwrap();
        assert!((local_value(&id, &s).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn purify_rejects_invalid_density() {
        let a = example_one();
        let bad = CMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(purify_product_value(&a, &[bad, CMatrix::identity(2).scale(c(0.5, 0.0))]), Err(Error::Domain(_))));
        let unnormalized = CMatrix::identity(2);
        assert!(matches!(purify_product_value(&a, &[unnormalized.clone(), unnormalized]), Err(Error::Domain(_))));
    }

    #[test]
    fn product_state_serde_round_trip() {
        let s = ProductState::new(vec![plus(), StateVector::basis(3, 2)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ProductState = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
