//! Brute-force referees for tests and `verify --oracle`. Nothing here is used
//! by the planners, and nothing here reuses their search or hull code.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::localrange::ProductState;
use crate::matrixcore::{CMatrix, PartitionedOperator, StateVector, DENSE_CAP};

/// Hard ceiling on grid evaluations.
pub const MAX_BUDGET: u64 = 100_000_000;
/// Slack for hull containment.
pub const HULL_SLACK: f64 = 1e-10;
/// Continuous parameters the grid scan accepts.
pub const MAX_GRID_PARAMS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per angle parameter.
    pub resolution: usize,
    /// Evaluations allowed, at most `MAX_BUDGET`.
    pub budget: u64,
}

impl GridSpec {
    pub fn new(resolution: usize, budget: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Argument(format!("grid resolution {resolution} is below 2")));
        }
        if budget > MAX_BUDGET {
            return Err(Error::SizeLimit { requested: budget as usize, cap: MAX_BUDGET as usize });
        }
        Ok(GridSpec { resolution, budget })
    }

    /// Finest grid whose scan over `params` angles fits `MAX_BUDGET`.
    pub fn finest(params: usize) -> Self {
        let mut resolution = 2;
        while ((resolution + 1) as f64).powi(params as i32) <= MAX_BUDGET as f64 {
            resolution += 1;
        }
        GridSpec { resolution, budget: MAX_BUDGET }
    }
}

/// Exact Kronecker power A^{⊗N}.
pub fn dense_tensor_power(a: &CMatrix, n: usize) -> Result<CMatrix> {
    let d = a.require_square()?;
    if n == 0 {
        return Err(Error::Argument("tensor power needs N ≥ 1".into()));
    }
    let size = (d as f64).powi(n as i32);
    if size > DENSE_CAP as f64 {
        return Err(Error::SizeLimit { requested: size.min(usize::MAX as f64) as usize, cap: DENSE_CAP });
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = out.tensor_capped(a, DENSE_CAP)?;
    }
    Ok(out)
}

/// Angle parameters needed for one party.
fn party_params(d: usize) -> Result<usize> {
    match d {
        2 => Ok(2),
        3 => Ok(4),
        _ => Err(Error::Domain(format!("grid scan handles qubits and qutrits, got dimension {d}"))),
    }
}

/// Points of [lo, hi] including both ends.
fn closed(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Points of [0, 2π) without the repeated end.
fn periodic(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| TAU * k as f64 / n as f64)
}

/// Every grid state of one party. Qubits are (cos θ/2, e^{iφ} sin θ/2) with
/// θ ∈ [0, π]; qutrits are (cos a, e^{iφ₁} sin a cos b, e^{iφ₂} sin a sin b)
/// with a, b ∈ [0, π/2].
fn party_grid(d: usize, res: usize) -> Vec<Vec<C64>> {
    match d {
        2 => closed(0.0, PI, res)
            .flat_map(|t| periodic(res).map(move |p| vec![C64::new((t / 2.0).cos(), 0.0), C64::from_polar((t / 2.0).sin(), p)]))
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(res.pow(4));
            for a in closed(0.0, FRAC_PI_2, res) {
                for b in closed(0.0, FRAC_PI_2, res) {
                    for p1 in periodic(res) {
                        for p2 in periodic(res) {
                            out.push(vec![
                                C64::new(a.cos(), 0.0),
                                C64::from_polar(a.sin() * b.cos(), p1),
                                C64::from_polar(a.sin() * b.sin(), p2),
                            ]);
                        }
                    }
                }
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub value: f64,
    pub state: ProductState,
    pub spec: GridSpec,
    pub evaluations: u64,
    /// Largest step between neighbouring grid angles.
    pub spacing: f64,
    /// 2‖A‖ times the largest state displacement to the nearest grid point;
    /// the true minimum is at least `value − lipschitz_bound`.
    pub lipschitz_bound: f64,
}

/// ⟨x|M|x⟩ for a small dense matrix.
fn quad(m: &CMatrix, x: &[C64]) -> C64 {
    m.bracket(x, x)
}

/// Minimum of |⟨s|A|s⟩| over the last parties, given the leading ones fixed.
fn scan_rest(a: &PartitionedOperator, grids: &[Vec<Vec<C64>>]) -> Result<(f64, Vec<usize>)> {
    if grids.len() == 1 {
        let mut best = (f64::INFINITY, 0);
        for (i, x) in grids[0].iter().enumerate() {
            let v = quad(a.matrix(), x).norm();
            if v < best.0 {
                best = (v, i);
            }
        }
        return Ok((best.0, vec![best.1]));
    }
    let mut best = (f64::INFINITY, Vec::new());
    for (i, x) in grids[0].iter().enumerate() {
        let reduced = a.contract_party(0, &StateVector::new(x.clone())?)?;
        let (v, mut idx) = scan_rest(&reduced, &grids[1..])?;
        if v < best.0 {
            idx.insert(0, i);
            best = (v, idx);
        }
    }
    Ok(best)
}

/// Exhaustive grid minimum of |⟨s|A|s⟩| over product states.
pub fn grid_min_local(a: &PartitionedOperator, spec: &GridSpec) -> Result<GridMinimum> {
    let dims = a.party_dims();
    let params: usize = dims.iter().map(|&d| party_params(d)).sum::<Result<usize>>()?;
    if params > MAX_GRID_PARAMS {
        return Err(Error::Domain(format!("{params} angle parameters exceed the grid limit of {MAX_GRID_PARAMS}")));
    }
    let evaluations = (spec.resolution as f64).powi(params as i32);
    if evaluations > spec.budget.min(MAX_BUDGET) as f64 {
        return Err(Error::SizeLimit { requested: evaluations as usize, cap: spec.budget.min(MAX_BUDGET) as usize });
    }
    let res = spec.resolution;
    let grids: Vec<Vec<Vec<C64>>> = dims.iter().map(|&d| party_grid(d, res)).collect();
    let outer = &grids[0];
    let per_first: Vec<Result<(f64, Vec<usize>)>> = map_indexed(outer.len(), |i| {
        let x = &outer[i];
        if grids.len() == 1 {
            return Ok((quad(a.matrix(), x).norm(), vec![i]));
        }
        let reduced = a.contract_party(0, &StateVector::new(x.clone())?)?;
        let (v, mut idx) = scan_rest(&reduced, &grids[1..])?;
        idx.insert(0, i);
        Ok((v, idx))
    });
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in per_first {
        let (v, idx) = r?;
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, idx));
        }
    }
    let (value, idx) = best.expect("grid is nonempty");
    let parts = idx.iter().zip(&grids).map(|(&i, g)| StateVector::new(g[i].clone())).collect::<Result<Vec<_>>>()?;
    let spacing = dims
        .iter()
        .map(|&d| if d == 2 { (PI / (res - 1) as f64).max(TAU / res as f64) } else { (FRAC_PI_2 / (res - 1) as f64).max(TAU / res as f64) })
        .fold(0.0, f64::max);
    // Each angle moves the state by at most |∂ψ/∂t| ≤ 1 per radian, and the
    // nearest grid point is within half a step in every angle.
    let displacement = params as f64 * spacing / 2.0;
    let norm = a.matrix().frobenius_norm();
    Ok(GridMinimum {
        value,
        state: ProductState::new(parts)?,
        spec: *spec,
        evaluations: evaluations as u64,
        spacing,
        lipschitz_bound: 2.0 * norm * displacement,
    })
}

/// Distance from z to the segment [p, q].
fn segment_distance(z: C64, p: C64, q: C64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let t = (((z - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (p + d * t)).norm()
}

/// Whether every point lies in a closed half-plane through z with a gap of
/// more than π between consecutive directions, i.e. z is outside the hull.
fn strictly_separated(points: &[C64], z: C64) -> bool {
    let mut angles: Vec<f64> = points.iter().map(|p| (p - z).arg()).collect();
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + TAU - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap > PI
}

/// Euclidean distance from z to the convex hull of `points` (0 inside).
pub fn hull_distance(points: &[C64], z: C64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Argument("hull of an empty point set".into()));
    }
    let nearest_point = points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
    if nearest_point == 0.0 || !strictly_separated(points, z) {
        return Ok(0.0);
    }
    let mut best = nearest_point;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            best = best.min(segment_distance(z, p, q));
        }
    }
    Ok(best)
}

/// z ∈ Co(points) up to `HULL_SLACK`.
pub fn hull_membership(points: &[C64], z: C64) -> Result<bool> {
    Ok(hull_distance(points, z)? <= HULL_SLACK)
}

/// Hausdorff distance between the hulls of two finite point sets.
pub fn hull_hausdorff(a: &[C64], b: &[C64]) -> Result<f64> {
    let one_way = |from: &[C64], to: &[C64]| -> Result<f64> {
        from.iter().try_fold(0.0f64, |acc, &z| Ok(acc.max(hull_distance(to, z)?)))
    };
    Ok(one_way(a, b)?.max(one_way(b, a)?))
}
