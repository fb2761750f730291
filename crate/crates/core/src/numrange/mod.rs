//! The numerical range W(A) = {⟨ψ|A|ψ⟩ : ‖ψ‖ = 1}: boundary sampling,
//! support-function membership, and states realizing prescribed values.
//!
//! The support function of W(A) in direction φ is the top eigenvalue of
//! cos φ·H₁ + sin φ·H₂ where A = H₁ + iH₂. Boundary points come from the
//! matching top eigenvectors; convex combinations of realized values are
//! realized inside the span of their witnesses by walking a path along
//! which the imaginary part of the (affinely normalized) form vanishes.

mod planar;
mod search;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;

pub use search::SearchOptions;

use crate::error::{Error, Result};
use crate::matrixcore::{compress, eig_hermitian, lambda_max, CMatrix, StateVector};

/// Default number of support directions.
pub const DEFAULT_DIRECTIONS: usize = 720;
/// Residual contract for realized values and isotropic vectors.
pub const VALUE_TOL: f64 = 1e-9;
/// Membership slack used when certifying 0 ∈ W(B).
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Complex values of W(A) with the states that produce them.
#[derive(Clone, Debug)]
pub struct RangeSamples {
    pub values: Vec<C64>,
    pub witnesses: Vec<StateVector>,
    /// Support direction each sample was taken at.
    pub directions: Vec<f64>,
}

impl RangeSamples {
    /// Evaluates each witness against `a`.
    pub fn from_witnesses(a: &CMatrix, witnesses: Vec<StateVector>, directions: Vec<f64>) -> Result<Self> {
        a.require_square()?;
        let values = witnesses.iter().map(|w| a.bracket(w.amplitudes(), w.amplitudes())).collect();
        Ok(RangeSamples { values, witnesses, directions })
    }

    /// Largest |⟨w|A|w⟩ − value| over the stored pairs.
    pub fn max_deviation(&self, a: &CMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.witnesses)
            .map(|(z, w)| (a.bracket(w.amplitudes(), w.amplitudes()) - z).norm())
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Hermitian part of e^{−iφ}A, given A = H₁ + iH₂.
fn rotated(h1: &CMatrix, h2: &CMatrix, phi: f64) -> CMatrix {
    &h1.scale(C64::new(phi.cos(), 0.0)) + &h2.scale(C64::new(phi.sin(), 0.0))
}

fn boundary_point(a: &CMatrix, h1: &CMatrix, h2: &CMatrix, phi: f64) -> Result<(C64, StateVector)> {
    let e = eig_hermitian(&rotated(h1, h2, phi))?;
    let v = StateVector::new(e.vector(0))?;
    Ok((a.bracket(v.amplitudes(), v.amplitudes()), v))
}

/// Boundary points of W(A) at `samples` equally spaced support directions,
/// followed by refinement points.
///
/// Between neighbouring samples the support function is probed along the
/// normal of the chord joining them; when W(A) reaches past the chord the
/// new support point is kept and both halves are probed again. Corners a
/// uniform grid steps over are found this way. At most `samples` extra
/// points are added, and all points come back sorted by direction.
pub fn range_boundary(a: &CMatrix, samples: usize) -> Result<RangeSamples> {
    a.require_square()?;
    if samples < 3 {
        return Err(Error::Argument(format!("need at least 3 samples, got {samples}")));
    }
    let (h1, h2) = (a.hermitian_part(), a.skew_part());
    let directions: Vec<f64> = (0..samples).map(|j| TAU * j as f64 / samples as f64).collect();
    let points = crate::exec::map_indexed(samples, |j| boundary_point(a, &h1, &h2, directions[j]));
    let mut found: Vec<(f64, C64, StateVector)> = Vec::with_capacity(2 * samples);
    for (p, &phi) in points.into_iter().zip(&directions) {
        let (z, w) = p?;
        found.push((phi, z, w));
    }
    let gap_tol = 1e-12 * (1.0 + a.frobenius_norm());
    let mut queue: std::collections::VecDeque<(f64, C64, f64, C64)> = (0..samples)
        .map(|j| {
            let next = (j + 1) % samples;
            let end = if next == 0 { TAU } else { found[next].0 };
            (found[j].0, found[j].1, end, found[next].1)
        })
        .collect();
    let mut extra = 0;
    while let Some((lo, zl, hi, zh)) = queue.pop_front() {
        if extra >= samples {
            break;
        }
        let chord = zh - zl;
        if chord.norm() <= gap_tol {
            continue;
        }
        // Outward normal of the chord, which lies between the two directions.
        let psi = lo + (chord.arg() - FRAC_PI_2 - lo).rem_euclid(TAU);
        if !(psi > lo && psi < hi) {
            continue;
        }
        let (z, w) = boundary_point(a, &h1, &h2, psi)?;
        let reach = (C64::from_polar(1.0, -psi) * (z - zl)).re;
        if reach <= gap_tol {
            continue;
        }
        extra += 1;
        found.push((psi.rem_euclid(TAU), z, w));
        queue.push_back((lo, zl, psi, z));
        queue.push_back((psi, z, hi, zh));
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut values = Vec::with_capacity(found.len());
    let mut witnesses = Vec::with_capacity(found.len());
    let mut directions = Vec::with_capacity(found.len());
    for (phi, z, w) in found {
        directions.push(phi);
        values.push(z);
        witnesses.push(w);
    }
    Ok(RangeSamples { values, witnesses, directions })
}

/// Outcome of a support-function membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Direction with the largest value of Re(e^{−iφ}z) − h(φ).
    pub worst_direction: f64,
    /// That largest value; negative when z is strictly inside every half-plane.
    pub worst_violation: f64,
}

/// Support values h(φ_j) of W(A) on an equally spaced direction grid.
#[derive(Clone, Debug)]
pub struct SupportTable {
    directions: Vec<f64>,
    support: Vec<f64>,
}

impl SupportTable {
    pub fn new(a: &CMatrix, directions: usize) -> Result<Self> {
        a.require_square()?;
        let (h1, h2) = (a.hermitian_part(), a.skew_part());
        let directions: Vec<f64> = (0..directions.max(1)).map(|j| TAU * j as f64 / directions.max(1) as f64).collect();
        let support = crate::exec::map_indexed(directions.len(), |j| lambda_max(&rotated(&h1, &h2, directions[j])));
        Ok(SupportTable { directions, support })
    }

    pub fn contains(&self, z: C64, tol: f64) -> Membership {
        let mut worst = (0.0, f64::NEG_INFINITY);
        for (&phi, &h) in self.directions.iter().zip(&self.support) {
            let v = (C64::from_polar(1.0, -phi) * z).re - h;
            if v > worst.1 {
                worst = (phi, v);
            }
        }
        Membership { inside: worst.1 <= tol, worst_direction: worst.0, worst_violation: worst.1 }
    }
}

/// Over-approximating membership test for z ∈ W(A) with 720 directions.
pub fn in_range(a: &CMatrix, z: C64, tol: f64) -> Result<Membership> {
    in_range_with(a, z, tol, DEFAULT_DIRECTIONS)
}

pub fn in_range_with(a: &CMatrix, z: C64, tol: f64, directions: usize) -> Result<Membership> {
    if !(tol > 0.0) {
        return Err(Error::Argument("membership tolerance must be positive".into()));
    }
    Ok(SupportTable::new(a, directions)?.contains(z, tol))
}

/// Unit vector in span{u, v} whose value under `b` is
/// (1 − λ)·⟨u|B|u⟩ + λ·⟨v|B|v⟩, for λ ∈ [0, 1].
fn merge_pair(b: &CMatrix, u: &[C64], v: &[C64], lambda: f64) -> Vec<C64> {
    let wu = b.bracket(u, u);
    let wv = b.bracket(v, v);
    let n = b.rows();
    if (wv - wu).norm() <= 1e-15 * (1.0 + b.max_abs()) || lambda <= 0.0 {
        return u.to_vec();
    }
    if lambda >= 1.0 {
        return v.to_vec();
    }
    // Affine normalization: u ↦ 0, v ↦ 1.
    let shifted = b - &CMatrix::identity(n).scale(wu);
    let bp = shifted.scale(C64::new(1.0, 0.0) / (wv - wu));
    let kp = bp.skew_part();
    let c = kp.bracket(u, v);
    let gamma0 = if c.norm() > 1e-300 { FRAC_PI_2 - c.arg() } else { 0.0 };
    let ov: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let gamma = if (C64::from_polar(1.0, gamma0) * ov).re >= 0.0 { gamma0 } else { gamma0 + PI };
    let rot = C64::from_polar(1.0, gamma);
    let path = |t: f64| -> Vec<C64> { u.iter().zip(v).map(|(a, b)| a * t.cos() + rot * b * t.sin()).collect() };
    let f = |t: f64| search::rayleigh(&bp, &path(t)).re;
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = path(0.5 * (lo + hi));
    search::normalize(&mut x);
    x
}

fn validate_weights(states: &[StateVector], weights: &[f64]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Argument("no states given".into()));
    }
    if states.len() != weights.len() {
        return Err(Error::Argument(format!("{} states but {} weights", states.len(), weights.len())));
    }
    if weights.iter().any(|&w| !(w >= -1e-15)) {
        return Err(Error::Argument("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// A normalized state in span(`states`) whose value under `a` equals
/// Σ_k p_k ⟨ψ_k|A|ψ_k⟩.
pub fn achieve_value(a: &CMatrix, states: &[StateVector], weights: &[f64]) -> Result<StateVector> {
    achieve_value_with(a, states, weights, &SearchOptions::default())
}

pub fn achieve_value_with(
    a: &CMatrix,
    states: &[StateVector],
    weights: &[f64],
    opts: &SearchOptions,
) -> Result<StateVector> {
    validate_weights(states, weights)?;
    let values: Vec<C64> = states.iter().map(|s| a.bracket(s.amplitudes(), s.amplitudes())).collect();
    let target: C64 = values.iter().zip(weights).map(|(z, &p)| z * p).sum();
    let scale = 1.0 + a.max_abs();
    if let Some(k) = (0..states.len()).find(|&k| weights[k] > 0.0 && (values[k] - target).norm() <= 1e-15 * scale) {
        return Ok(states[k].clone().gauge_fixed());
    }

    let comp = compress(a, states)?;
    let b = &comp.matrix;
    let coords: Vec<Vec<C64>> = states.iter().map(|s| comp.coordinates(s)).collect();
    let mut order = (0..states.len()).filter(|&k| weights[k] > 0.0);
    let first = order.next().expect("weights sum to one");
    let mut current = coords[first].clone();
    let mut mass = weights[first];
    let mut partial = values[first];
    for k in order {
        let next_mass = mass + weights[k];
        let next_partial = (partial * mass + values[k] * weights[k]) / next_mass;
        let w = search::rayleigh(b, &current);
        let span = values[k] - w;
        if span.norm() > 1e-15 * scale {
            let lambda = ((next_partial - w) / span).re.clamp(0.0, 1.0);
            current = merge_pair(b, &current, &coords[k], lambda);
        }
        mass = next_mass;
        partial = next_partial;
    }
    let (mut x, mut residual) = search::polish(b, &current, target, 100);
    if residual > VALUE_TOL {
        let (y, r) = search::multistart(b, target, opts);
        if r < residual {
            x = y;
            residual = r;
        }
    }
    let lifted = StateVector::new(comp.lift(&x))?;
    let full_residual = (a.bracket(lifted.amplitudes(), lifted.amplitudes()) - target).norm();
    if residual > VALUE_TOL || full_residual > VALUE_TOL {
        return Err(Error::Convergence { what: "achieve_value".into(), best_residual: full_residual.max(residual) });
    }
    Ok(lifted.gauge_fixed())
}

/// A normalized x with |x†Bx| ≤ 1e-9. Requires 0 ∈ W(B).
pub fn isotropic_vector(b: &CMatrix) -> Result<StateVector> {
    isotropic_vector_with(b, &SearchOptions::default())
}

pub fn isotropic_vector_with(b: &CMatrix, opts: &SearchOptions) -> Result<StateVector> {
    let zero = C64::new(0.0, 0.0);
    let membership = in_range(b, zero, MEMBERSHIP_TOL)?;
    if !membership.inside {
        return Err(Error::Domain(format!(
            "0 is outside the numerical range (violation {:e} at direction {})",
            membership.worst_violation, membership.worst_direction
        )));
    }
    if let Some(x) = constructive_isotropic(b, opts)? {
        return Ok(x);
    }
    let (x, residual) = search::multistart(b, zero, opts);
    if residual > VALUE_TOL {
        return Err(Error::Convergence { what: "isotropic_vector".into(), best_residual: residual });
    }
    Ok(StateVector::new(x)?.gauge_fixed())
}

/// Convex weights over boundary samples that combine to 0, realized in the
/// span of their witnesses.
fn constructive_isotropic(b: &CMatrix, opts: &SearchOptions) -> Result<Option<StateVector>> {
    let samples = range_boundary(b, 64)?;
    let slack = 1e-15 * (1.0 + b.max_abs());
    let Some(weights) = planar::origin_weights(&samples.values, slack) else {
        return Ok(None);
    };
    let states: Vec<StateVector> = weights.iter().map(|&(k, _)| samples.witnesses[k].clone()).collect();
    let mut p: Vec<f64> = weights.iter().map(|&(_, w)| w).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|w| *w /= total);
    match achieve_value_with(b, &states, &p, opts) {
        Ok(x) => {
            let (y, residual) = search::polish(b, x.amplitudes(), C64::new(0.0, 0.0), 100);
            if residual <= VALUE_TOL {
                Ok(Some(StateVector::new(y)?.gauge_fixed()))
            } else {
                Ok(None)
            }
        }
        Err(Error::Convergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Point of W(A) closest to the origin with a realizing state.
#[derive(Clone, Debug)]
pub struct NearestPoint {
    pub value: C64,
    pub witness: StateVector,
    /// True when 0 ∈ W(A) was certified and an isotropic vector returned.
    pub isotropic: bool,
}

/// Minimizes |⟨x|A|x⟩| over unit x. When the support function stays above
/// −1e-8 everywhere an isotropic vector is sought; otherwise the nearest
/// boundary point is located by minimizing the support function and reading
/// off the closest point on the polygon of nearby boundary samples.
pub fn nearest_to_origin(a: &CMatrix, opts: &SearchOptions) -> Result<NearestPoint> {
    a.require_square()?;
    let (h1, h2) = (a.hermitian_part(), a.skew_part());
    let h = |phi: f64| lambda_max(&rotated(&h1, &h2, phi));
    let coarse = 72;
    let grid: Vec<f64> = (0..coarse).map(|j| TAU * j as f64 / coarse as f64).collect();
    let hv: Vec<f64> = grid.iter().map(|&p| h(p)).collect();
    let j = crate::exec::argmin_with_ties(&hv, 0.0).unwrap_or(0);
    let step = TAU / coarse as f64;
    let (mut lo, mut hi) = (grid[j] - step, grid[j] + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = h(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = h(d);
        }
    }
    let phi_star = 0.5 * (lo + hi);
    let h_min = h(phi_star).min(hv[j]);

    if h_min >= -MEMBERSHIP_TOL {
        match isotropic_vector_with(a, opts) {
            Ok(x) => {
                let value = a.bracket(x.amplitudes(), x.amplitudes());
                return Ok(NearestPoint { value, witness: x, isotropic: true });
            }
            Err(Error::Domain(_)) | Err(Error::Convergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let mut dirs = grid.clone();
    dirs.push(phi_star);
    for k in 2..=8 {
        let eps = 10f64.powi(-k);
        dirs.push(phi_star - eps);
        dirs.push(phi_star + eps);
    }
    let mut values = Vec::with_capacity(dirs.len());
    let mut witnesses = Vec::with_capacity(dirs.len());
    for &phi in &dirs {
        let (z, w) = boundary_point(a, &h1, &h2, phi)?;
        values.push(z);
        witnesses.push(w);
    }
    let (weights, _) = planar::nearest_to_origin(&values);
    let mut x = match weights.as_slice() {
        [(k, _)] => witnesses[*k].amplitudes().to_vec(),
        [(i, _), (k, t)] => merge_pair(a, witnesses[*i].amplitudes(), witnesses[*k].amplitudes(), *t),
        _ => unreachable!("nearest point uses at most two samples"),
    };
    // Keep the best single sample if the merge lost accuracy.
    let best_single = (0..values.len()).min_by(|&p, &q| values[p].norm().total_cmp(&values[q].norm())).unwrap_or(0);
    if values[best_single].norm() < search::rayleigh(a, &x).norm() {
        x = witnesses[best_single].amplitudes().to_vec();
    }
    let witness = StateVector::new(x)?.gauge_fixed();
    let value = a.bracket(witness.amplitudes(), witness.amplitudes());
    Ok(NearestPoint { value, witness, isotropic: false })
}

#[cfg(test)]
mod tests;
