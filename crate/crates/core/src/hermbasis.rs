//! Hermitian rank-one bases, Hermiticity and phase canonicalization,
//! co-linearity of complex values, and the clock-and-shift twirl.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::localrange::{local_value, ProductState};
use crate::matrixcore::{schur_eig, total_dim, CMatrix, PartitionedOperator, StateVector};

/// Largest grid a lattice may have.
pub const LATTICE_CAP: usize = 10_000;
/// Values with modulus at or below this count as zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Default relative tolerance for co-linearity.
pub const COLINEAR_TOL: f64 = 1e-8;
/// Unitarity tolerance for phase canonicalization.
pub const UNITARY_TOL: f64 = 1e-8;

/// Maps an angle into [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// A nonzero complex number in polar form r·e^{iθ}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayValue {
    pub r: f64,
    pub theta: f64,
}

impl RayValue {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() || !theta.is_finite() {
            return Err(Error::Argument(format!("ray value needs r > 0 and finite θ, got r={r}, θ={theta}")));
        }
        Ok(RayValue { r, theta: normalize_angle(theta) })
    }

    pub fn from_complex(z: C64) -> Result<Self> {
        Self::new(z.norm(), z.arg())
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// The d² states |p⟩, then (|p⟩+|q⟩)/√2 and (|p⟩+i|q⟩)/√2 for each p < q.
/// Their projectors span the real space of d×d Hermitian matrices.
pub fn hermitian_basis(d: usize) -> Result<Vec<StateVector>> {
    if d == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<StateVector> = (0..d).map(|p| StateVector::basis(d, p)).collect();
    for p in 0..d {
        for q in p + 1..d {
            for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut amps = vec![C64::new(0.0, 0.0); d];
                amps[p] = C64::new(s, 0.0);
                amps[q] = phase * s;
                out.push(StateVector::new(amps)?);
            }
        }
    }
    Ok(out)
}

/// Real Gram matrix tr(ρ_a ρ_b) = |⟨a|b⟩|² of the projectors.
pub fn projector_gram(states: &[StateVector]) -> CMatrix {
    let n = states.len();
    let mut g = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            g[(a, b)] = C64::new(states[a].inner(&states[b]).norm_sqr(), 0.0);
        }
    }
    g
}

/// Outcome of testing Hermiticity through expectation values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisHermiticity {
    pub hermitian: bool,
    /// max_k |Im tr(A ρ_k)|.
    pub max_imag: f64,
    pub worst_index: usize,
}

/// A is Hermitian iff tr(Aρ) is real for every ρ in a Hermitian basis.
pub fn is_hermitian_via_basis(a: &CMatrix, basis: &[StateVector]) -> Result<BasisHermiticity> {
    let n = a.require_square()?;
    if let Some(s) = basis.iter().find(|s| s.dim() != n) {
        return Err(Error::Shape(format!("basis state of dimension {} for a {n}x{n} operator", s.dim())));
    }
    let (mut max_imag, mut worst_index) = (0.0, 0);
    for (k, s) in basis.iter().enumerate() {
        let v = a.bracket(s.amplitudes(), s.amplitudes()).im.abs();
        if v > max_imag {
            max_imag = v;
            worst_index = k;
        }
    }
    Ok(BasisHermiticity { hermitian: max_imag <= 1e-9, max_imag, worst_index })
}

/// ‖A − A†‖_F ≤ 1e-9·‖A‖_F.
pub fn is_hermitian_direct(a: &CMatrix) -> bool {
    a.hermiticity_defect() <= 1e-9 * a.frobenius_norm()
}

/// A = e^{iθ}H with H Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    pub theta: f64,
    pub hermitian: CMatrix,
}

/// Writes a unitary as e^{iθ}H when its spectrum sits on two antipodal
/// points (or one). θ is chosen so that tr H ≥ 0; when tr H vanishes, the
/// first nonzero diagonal entry of H is made positive, and failing that the
/// first nonzero entry gets a positive real part (imaginary part if real
/// part vanishes).
pub fn canonical_phase(a: &CMatrix) -> Result<Option<PhaseDecomposition>> {
    a.require_square()?;
    let defect = a.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::Domain(format!("operator is not unitary (residual {defect:e})")));
    }
    let eig = schur_eig(a);
    let first = eig.values[0] / eig.values[0].norm();
    if eig.values.iter().any(|&l| (l - first).norm() > UNITARY_TOL && (l + first).norm() > UNITARY_TOL) {
        return Ok(None);
    }
    // Squares of ±e^{iα} all equal e^{2iα}; averaging them pins α down.
    let sq: C64 = eig.values.iter().map(|l| l * l).sum();
    let alpha = 0.5 * sq.arg();
    let h_of = |theta: f64| a.scale(C64::from_polar(1.0, -theta)).hermitian_part();
    let mut theta = alpha;
    let h = h_of(theta);
    let scale = 1e-10 * (1.0 + a.frobenius_norm());
    let tr = h.trace().re;
    let flip = if tr.abs() > scale {
        tr < 0.0
    } else if let Some(k) = (0..h.rows()).find(|&k| h[(k, k)].re.abs() > scale) {
        h[(k, k)].re < 0.0
    } else {
        let z = h.data().iter().find(|z| z.norm() > scale).copied().unwrap_or(C64::new(1.0, 0.0));
        if z.re.abs() > scale {
            z.re < 0.0
        } else {
            z.im < 0.0
        }
    };
    if flip {
        theta += PI;
    }
    let theta = normalize_angle(theta);
    Ok(Some(PhaseDecomposition { theta, hermitian: h_of(theta) }))
}

/// Common ray angle of the nonzero values, if they share one. Values with
/// modulus ≤ 1e-10 are discarded first; an all-zero list yields angle 0.
pub fn colinear(values: &[C64], tol: f64) -> Option<f64> {
    let mut nonzero = values.iter().filter(|z| z.norm() > ZERO_TOL);
    let Some(first) = nonzero.next() else {
        return Some(0.0);
    };
    let theta = normalize_angle(first.arg());
    let rot = C64::from_polar(1.0, -theta);
    for z in nonzero {
        let w = rot * z;
        if w.im.abs() > tol * z.norm() || w.re <= 0.0 {
            return None;
        }
    }
    Some(theta)
}

/// Whether two nonzero values lie on one ray.
pub fn pair_colinear(z1: C64, z2: C64, tol: f64) -> bool {
    colinear(&[z1, z2], tol).is_some()
}

/// Largest number of clock-and-shift operators produced at once.
pub const PAULI_DIM_CAP: usize = 64;

fn clock_shift(d: usize, a: usize, b: usize) -> CMatrix {
    // X^a Z^b |j⟩ = ω^{bj} |j + a mod d⟩.
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let w = C64::from_polar(1.0, TAU * ((b * j) % d) as f64 / d as f64);
        m[((j + a) % d, j)] = w;
    }
    m
}

/// All tensor products of per-party X^a Z^b (b outer, a inner; party 1
/// slowest). For a qubit this is I, X, Z, XZ.
pub fn generalized_paulis(party_dims: &[usize]) -> Result<Vec<CMatrix>> {
    let dim = total_dim(party_dims)?;
    if dim > PAULI_DIM_CAP {
        return Err(Error::SizeLimit { requested: dim, cap: PAULI_DIM_CAP });
    }
    let mut out = vec![CMatrix::identity(1)];
    for &d in party_dims {
        let local: Vec<CMatrix> = (0..d).flat_map(|b| (0..d).map(move |a| clock_shift(d, a, b))).collect();
        out = out.iter().flat_map(|u| local.iter().map(move |v| u.tensor(v).expect("within cap"))).collect();
    }
    Ok(out)
}

/// (1/d²) Σ_k u_k† A u_k.
pub fn depolarize(a: &CMatrix, paulis: &[CMatrix]) -> Result<CMatrix> {
    let n = a.require_square()?;
    if paulis.is_empty() {
        return Err(Error::Argument("empty operator set".into()));
    }
    if let Some(u) = paulis.iter().find(|u| u.rows() != n || u.cols() != n) {
        return Err(Error::Shape(format!("{}x{} operator applied to a {n}x{n} matrix", u.rows(), u.cols())));
    }
    let mut acc = CMatrix::zeros(n, n);
    for u in paulis {
        acc = &acc + &(&(&u.adjoint() * a) * u);
    }
    Ok(acc.scale(C64::new(1.0 / paulis.len() as f64, 0.0)))
}

/// Values of A on every tuple of per-party Hermitian-basis states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisLattice {
    party_dims: Vec<usize>,
    bases: Vec<Vec<StateVector>>,
    /// Row-major over index tuples, party 1 slowest.
    values: Vec<C64>,
}

impl BasisLattice {
    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn bases(&self) -> &[Vec<StateVector>] {
        &self.bases
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-party basis sizes d_k².
    pub fn shape(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn flat_index(&self, tuple: &[usize]) -> Result<usize> {
        let shape = self.shape();
        if tuple.len() != shape.len() {
            return Err(Error::Shape(format!("index tuple of length {} for {} parties", tuple.len(), shape.len())));
        }
        let mut flat = 0;
        for (&i, &n) in tuple.iter().zip(&shape) {
            if i >= n {
                return Err(Error::Index { index: i, len: n });
            }
            flat = flat * n + i;
        }
        Ok(flat)
    }

    pub fn tuple(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        for k in (0..shape.len()).rev() {
            out[k] = flat % shape[k];
            flat /= shape[k];
        }
        out
    }

    pub fn value(&self, tuple: &[usize]) -> Result<C64> {
        Ok(self.values[self.flat_index(tuple)?])
    }

    pub fn product_state(&self, tuple: &[usize]) -> Result<ProductState> {
        self.flat_index(tuple)?;
        ProductState::new(tuple.iter().enumerate().map(|(k, &i)| self.bases[k][i].clone()).collect())
    }

    /// First grid point with |z| ≤ 1e-10.
    pub fn first_zero(&self) -> Option<usize> {
        self.values.iter().position(|z| z.norm() <= ZERO_TOL)
    }
}

pub fn build_lattice(a: &PartitionedOperator) -> Result<BasisLattice> {
    let mut size: usize = 1;
    for &d in a.party_dims() {
        size = size.saturating_mul(d.saturating_mul(d));
    }
    if size > LATTICE_CAP {
        return Err(Error::SizeLimit { requested: size, cap: LATTICE_CAP });
    }
    let bases: Vec<Vec<StateVector>> = a.party_dims().iter().map(|&d| hermitian_basis(d)).collect::<Result<_>>()?;
    let mut lattice = BasisLattice { party_dims: a.party_dims().to_vec(), bases, values: Vec::new() };
    let values: Vec<Result<C64>> = map_indexed(size, |flat| {
        let s = lattice.product_state(&lattice.tuple(flat))?;
        local_value(a, &s)
    });
    lattice.values = values.into_iter().collect::<Result<_>>()?;
    Ok(lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::gates;
    use crate::matrixcore::random::{gaussian, rng_from_seed};
    use crate::matrixcore::random_unitary;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = rng_from_seed(seed);
        CMatrix::from_vec(n, n, (0..n * n).map(|_| gaussian(&mut rng)).collect()).unwrap()
    }

    fn det(m: &CMatrix) -> f64 {
        m.to_nalgebra().determinant().re
    }

    #[test]
    fn qubit_basis() {
        let b = hermitian_basis(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(0.0, s)]];
        assert_eq!(b.len(), 4);
        for (got, want) in b.iter().zip(&want) {
            for (x, y) in got.amplitudes().iter().zip(want) {
                assert!((x - y).norm() < 1e-15);
            }
        }
        assert_eq!(hermitian_basis(1).unwrap(), vec![StateVector::basis(1, 0)]);
        assert!(hermitian_basis(0).is_err());
    }

    #[test]
    fn basis_projectors_are_independent() {
        for d in 1..=5 {
            let b = hermitian_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            assert!(det(&projector_gram(&b)).abs() > 1e-10, "d = {d}");
        }
    }

    #[test]
    fn hermiticity_examples() {
        let b = hermitian_basis(2).unwrap();
        assert!(is_hermitian_via_basis(&gates::sigma_z(), &b).unwrap().hermitian);
        let r = is_hermitian_via_basis(&CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0)]), &b).unwrap();
        assert!(!r.hermitian);
        assert_eq!(r.worst_index, 1);
        assert!((r.max_imag - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermiticity_tests_agree() {
        for seed in 0..200 {
            let n = [2, 3, 4][seed as usize % 3];
            let raw = random_matrix(n, seed);
            let a = if seed % 2 == 0 { raw.hermitian_part() } else { raw };
            let basis = hermitian_basis(n).unwrap();
            assert_eq!(is_hermitian_via_basis(&a, &basis).unwrap().hermitian, is_hermitian_direct(&a));
        }
    }

    #[test]
    fn phase_examples() {
        let p = canonical_phase(&CMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0)])).unwrap().unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-12);
        assert!(p.hermitian.max_diff(&gates::sigma_z()) < 1e-12);

        let a = CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        assert!(canonical_phase(&a).unwrap().is_none());

        let p = canonical_phase(&CMatrix::identity(3)).unwrap().unwrap();
        assert!(p.theta.abs() < 1e-12);
        assert!(p.hermitian.max_diff(&CMatrix::identity(3)) < 1e-12);

        assert!(matches!(canonical_phase(&CMatrix::from_real_diag(&[1.0, 2.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn phase_reconstructs_and_orients() {
        for seed in 0..50 {
            let v = random_unitary(4, seed);
            let d = CMatrix::from_real_diag(&[1.0, 1.0, -1.0, if seed % 2 == 0 { 1.0 } else { -1.0 }]);
            let h = &(&v * &d) * &v.adjoint();
            let phi = 0.37 * seed as f64;
            let a = h.scale(C64::from_polar(1.0, phi));
            let p = canonical_phase(&a).unwrap().unwrap();
            assert!((0.0..TAU).contains(&p.theta));
            assert!(p.hermitian.trace().re >= -1e-12);
            assert!(p.hermitian.hermiticity_defect() < 1e-10);
            assert!(p.hermitian.scale(C64::from_polar(1.0, p.theta)).max_diff(&a) < 1e-10);
        }
    }

    #[test]
    fn phase_traceless_uses_diagonal() {
        let p = canonical_phase(&gates::sigma_z().scale(c(-1.0, 0.0))).unwrap().unwrap();
        assert!(p.hermitian.max_diff(&gates::sigma_z()) < 1e-12);
        assert!((p.theta - PI).abs() < 1e-12);
        let p = canonical_phase(&gates::sigma_x().scale(c(-1.0, 0.0))).unwrap().unwrap();
        assert!(p.hermitian.max_diff(&gates::sigma_x()) < 1e-12);
    }

    #[test]
    fn colinear_examples() {
        assert_eq!(colinear(&[c(1.0, 0.0), c(2.0, 0.0), c(3.5, 0.0)], COLINEAR_TOL), Some(0.0));
        assert_eq!(colinear(&[c(1.0, 0.0), c(0.0, 1.0)], COLINEAR_TOL), None);
        assert_eq!(colinear(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], COLINEAR_TOL), Some(0.0));
        assert_eq!(colinear(&[c(1.0, 0.0), c(-1.0, 0.0)], COLINEAR_TOL), None);
        let t = colinear(&[c(0.0, -2.0), c(0.0, -0.5)], COLINEAR_TOL).unwrap();
        assert!((t - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn paulis_for_a_qubit() {
        let p = generalized_paulis(&[2]).unwrap();
        let xz = &gates::sigma_x() * &gates::sigma_z();
        let want = [CMatrix::identity(2), gates::sigma_x(), gates::sigma_z(), xz];
        for (got, want) in p.iter().zip(&want) {
            assert!(got.max_diff(want) < 1e-15);
        }
    }

    #[test]
    fn paulis_are_unitary_and_qutrit_relations_hold() {
        let p = generalized_paulis(&[2, 2]).unwrap();
        assert_eq!(p.len(), 16);
        assert!(p.iter().all(|u| u.unitarity_defect() < 1e-12));
        let (x, z) = (clock_shift(3, 1, 0), clock_shift(3, 0, 1));
        let cube = |m: &CMatrix| &(m * m) * m;
        assert!(cube(&x).max_diff(&CMatrix::identity(3)) < 1e-12);
        assert!(cube(&z).max_diff(&CMatrix::identity(3)) < 1e-12);
        let omega = C64::from_polar(1.0, TAU / 3.0);
        assert!((&z * &x).max_diff(&(&x * &z).scale(omega)) < 1e-12);
    }

    #[test]
    fn depolarizing_identity() {
        let id = depolarize(&CMatrix::identity(2), &generalized_paulis(&[2]).unwrap()).unwrap();
        assert!(id.max_diff(&CMatrix::identity(2)) < 1e-15);
        let z = depolarize(&gates::sigma_z(), &generalized_paulis(&[2]).unwrap()).unwrap();
        assert!(z.max_abs() < 1e-15);
        for (seed, dims) in [[2, 3].as_slice(), &[2], &[3], &[2, 2]].into_iter().enumerate() {
            let n = total_dim(dims).unwrap();
            let a = random_matrix(n, seed as u64);
            let got = depolarize(&a, &generalized_paulis(dims).unwrap()).unwrap();
            let want = CMatrix::identity(n).scale(a.trace() / n as f64);
            assert!(got.max_diff(&want) <= 1e-12);
        }
        assert!(depolarize(&CMatrix::identity(3), &generalized_paulis(&[2]).unwrap()).is_err());
    }

    #[test]
    fn lattice_examples() {
        let id = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
        let l = build_lattice(&id).unwrap();
        assert_eq!(l.len(), 16);
        assert!(l.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-14));

        let h = PartitionedOperator::new(random_matrix(6, 3).hermitian_part(), vec![2, 3]).unwrap();
        assert!(build_lattice(&h).unwrap().values().iter().all(|z| z.im.abs() < 1e-10));

        let a = PartitionedOperator::new(CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)]), vec![2, 2]).unwrap();
        let l = build_lattice(&a).unwrap();
        assert_eq!(l.value(&[0, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(l.value(&[1, 1]).unwrap(), c(-1.0, 0.0));
        assert_eq!(l.value(&[0, 1]).unwrap(), c(0.0, 1.0));
        assert_eq!(l.tuple(l.flat_index(&[3, 2]).unwrap()), vec![3, 2]);
    }

    #[test]
    fn lattice_size_cap() {
        let a = PartitionedOperator::new(CMatrix::identity(121), vec![11, 11]).unwrap();
        assert!(matches!(build_lattice(&a), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn ray_value_normalizes() {
        let r = RayValue::new(2.0, -PI / 2.0).unwrap();
        assert!((r.theta - 1.5 * PI).abs() < 1e-15);
        assert!(RayValue::new(0.0, 1.0).is_err());
        assert!((RayValue::from_complex(c(0.0, 3.0)).unwrap().value() - c(0.0, 3.0)).norm() < 1e-15);
    }
}
