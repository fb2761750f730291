//! Convex geometry in the complex plane used to turn boundary samples into
//! convex weights.

use num_complex::Complex64 as C64;

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull vertex indices, counter-clockwise, collinear points removed.
pub(crate) fn hull(points: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i].re.total_cmp(&points[j].re).then(points[i].im.total_cmp(&points[j].im)).then(i.cmp(&j))
    });
    idx.dedup_by(|a, b| (points[*a] - points[*b]).norm() <= 1e-14);
    if idx.len() <= 2 {
        return idx;
    }
    let scale = points.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let eps = 1e-13 * scale * scale;
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[i]) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[i]) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 2 {
        // Everything collapsed onto one point.
        lower.truncate(1);
    }
    lower
}

/// Closest point to the origin on segment [a, b] as (t, point) with
/// point = (1 − t)a + t·b.
fn nearest_on_segment(a: C64, b: C64) -> (f64, C64) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 <= 1e-300 {
        return (0.0, a);
    }
    let t = (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0);
    (t, a + ab * t)
}

/// Convex weights (at most three nonzero) over `points` whose combination is
/// the origin, or `None` when the origin lies outside their hull.
pub(crate) fn origin_weights(points: &[C64], slack: f64) -> Option<Vec<(usize, f64)>> {
    if let Some(k) = points.iter().position(|z| z.norm() <= slack) {
        return Some(vec![(k, 1.0)]);
    }
    let h = hull(points);
    match h.len() {
        0 | 1 => None,
        2 => {
            let (t, p) = nearest_on_segment(points[h[0]], points[h[1]]);
            (p.norm() <= slack).then(|| vec![(h[0], 1.0 - t), (h[1], t)])
        }
        _ => {
            let apex = points[h[0]];
            for w in h[1..].windows(2) {
                let (b, c) = (points[w[0]], points[w[1]]);
                let area = cross(apex, b, c);
                if area <= 0.0 {
                    continue;
                }
                let zero = C64::new(0.0, 0.0);
                let la = cross(zero, b, c) / area;
                let lb = cross(apex, zero, c) / area;
                let lc = cross(apex, b, zero) / area;
                let tol = -1e-12;
                if la >= tol && lb >= tol && lc >= tol {
                    let (la, lb, lc) = (la.max(0.0), lb.max(0.0), lc.max(0.0));
                    let s = la + lb + lc;
                    return Some(vec![(h[0], la / s), (w[0], lb / s), (w[1], lc / s)]);
                }
            }
            // The origin may sit on the hull boundary within slack.
            let (pair, t, p) = nearest_on_boundary(points, &h);
            (p.norm() <= slack).then(|| vec![(pair.0, 1.0 - t), (pair.1, t)])
        }
    }
}

fn nearest_on_boundary(points: &[C64], h: &[usize]) -> ((usize, usize), f64, C64) {
    let mut best = ((h[0], h[0]), 0.0, points[h[0]]);
    for k in 0..h.len() {
        let (i, j) = (h[k], h[(k + 1) % h.len()]);
        let (t, p) = nearest_on_segment(points[i], points[j]);
        if p.norm() < best.2.norm() {
            best = ((i, j), t, p);
        }
    }
    best
}

/// Point of the hull of `points` closest to the origin, written as a convex
/// combination of at most two input points. Assumes the origin is outside.
pub(crate) fn nearest_to_origin(points: &[C64]) -> (Vec<(usize, f64)>, C64) {
    let h = hull(points);
    if h.len() == 1 {
        return (vec![(h[0], 1.0)], points[h[0]]);
    }
    let ((i, j), t, p) = nearest_on_boundary(points, &h);
    if i == j {
        (vec![(i, 1.0)], p)
    } else {
        (vec![(i, 1.0 - t), (j, t)], p)
    }
}
