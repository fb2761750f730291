//! Local solvers for the quadratic-form equation x†Bx / x†x = target.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::matrixcore::random::{gaussian, party_seed, rng_from_seed};
use crate::matrixcore::CMatrix;

/// Multistart settings shared by every randomized search in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_iter: usize,
    pub step_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { seed: 0, starts: 64, max_iter: 10_000, step_tol: 1e-12 }
    }
}

impl SearchOptions {
    pub fn with_seed(seed: u64) -> Self {
        SearchOptions { seed, ..Self::default() }
    }
}

pub(crate) fn rayleigh(b: &CMatrix, x: &[C64]) -> C64 {
    let n: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    b.bracket(x, x) / n
}

pub(crate) fn normalize(x: &mut [C64]) {
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in x.iter_mut() {
        *z /= n;
    }
}

/// Levenberg–Marquardt on the two real equations Re/Im of
/// rayleigh(B, x) − target, minimum-norm steps in R^{2n}.
pub(crate) fn polish(b: &CMatrix, x0: &[C64], target: C64, iters: usize) -> (Vec<C64>, f64) {
    let n = x0.len();
    let bh = b.adjoint();
    let mut x = x0.to_vec();
    normalize(&mut x);
    let mut g = rayleigh(b, &x) - target;
    let mut mu = 1e-12;
    let floor = 1e-16 * (1.0 + b.max_abs());
    for _ in 0..iters {
        if g.norm() <= floor {
            break;
        }
        let bx = b.mul_vec(&x);
        let bhx = bh.mul_vec(&x);
        let q = rayleigh(b, &x);
        // Jacobian columns: d/d re_j then d/d im_j.
        let mut jac: Vec<C64> = Vec::with_capacity(2 * n);
        for j in 0..n {
            let dq = bx[j] + bhx[j].conj();
            jac.push(dq - q * (2.0 * x[j].re));
        }
        for j in 0..n {
            let dq = C64::new(0.0, -1.0) * bx[j] + C64::new(0.0, 1.0) * bhx[j].conj();
            jac.push(dq - q * (2.0 * x[j].im));
        }
        // J Jᵀ as a 2×2 real matrix.
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        for d in &jac {
            a11 += d.re * d.re;
            a12 += d.re * d.im;
            a22 += d.im * d.im;
        }
        let mut improved = false;
        for _attempt in 0..30 {
            let scale = mu * (a11 + a22).max(1e-300);
            let (m11, m22) = (a11 + scale, a22 + scale);
            let det = m11 * m22 - a12 * a12;
            if det.abs() <= 1e-300 {
                mu *= 10.0;
                continue;
            }
            let w1 = (m22 * g.re - a12 * g.im) / det;
            let w2 = (m11 * g.im - a12 * g.re) / det;
            let mut trial = x.clone();
            for j in 0..n {
                let dre = -(jac[j].re * w1 + jac[j].im * w2);
                let dim = -(jac[n + j].re * w1 + jac[n + j].im * w2);
                trial[j] += C64::new(dre, dim);
            }
            normalize(&mut trial);
            let gt = rayleigh(b, &trial) - target;
            if gt.norm() < g.norm() {
                x = trial;
                g = gt;
                mu = (mu * 0.1).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, g.norm())
}

/// Nelder–Mead on a function of R^k.
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    step_tol: f64,
    f_stop: f64,
) -> (Vec<f64>, f64) {
    let k = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..k {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[0] <= f_stop {
            break;
        }
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= step_tol {
            break;
        }
        let centroid: Vec<f64> =
            (0..k).map(|j| simplex[..k].iter().map(|v| v[j]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[k]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[k] = xe;
                vals[k] = fe;
            } else {
                simplex[k] = xr;
                vals[k] = fr;
            }
        } else if fr < vals[k - 1] {
            simplex[k] = xr;
            vals[k] = fr;
        } else {
            let (xc, fc) = if fr < vals[k] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < vals[k].min(fr) {
                simplex[k] = xc;
                vals[k] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=k {
                    simplex[i] = simplex[i].iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=k).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (simplex[best].clone(), vals[best])
}

fn unpack(y: &[f64]) -> Vec<C64> {
    let n = y.len() / 2;
    (0..n).map(|j| C64::new(y[j], y[n + j])).collect()
}

/// Seeded multistart: gradient-free search over the unnormalized real
/// vector in R^{2n}, each start finished with [`polish`]. Returns the best
/// vector (lowest residual, ties by start index).
pub(crate) fn multistart(b: &CMatrix, target: C64, opts: &SearchOptions) -> (Vec<C64>, f64) {
    let n = b.rows();
    let results = exec::map_indexed(opts.starts.max(1), |start| {
        let mut rng = rng_from_seed(party_seed(opts.seed, start as u64));
        let x0: Vec<C64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let mut y0: Vec<f64> = x0.iter().map(|z| z.re).collect();
        y0.extend(x0.iter().map(|z| z.im));
        let objective = |y: &[f64]| -> f64 {
            let x = unpack(y);
            let nn: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            if nn <= 1e-300 {
                return f64::INFINITY;
            }
            (rayleigh(b, &x) - target).norm_sqr()
        };
        let (y, _) = nelder_mead(&objective, &y0, 0.5, opts.max_iter, opts.step_tol, 1e-30);
        let mut x = unpack(&y);
        normalize(&mut x);
        polish(b, &x, target, 100)
    });
    let keys: Vec<f64> = results.iter().map(|r| r.1).collect();
    let best = exec::argmin_with_ties(&keys, 0.0).unwrap_or(0);
    results.into_iter().nth(best).expect("nonempty")
}
