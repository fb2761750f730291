use super::*;
use crate::matrixcore::random::{random_state_with, rng_from_seed};
use crate::matrixcore::{gates, random_unitary};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dist_to_segment(z: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

#[test]
fn boundary_of_hermitian_is_its_spectral_segment() {
    let s = range_boundary(&gates::sigma_z(), 16).unwrap();
    assert!(s.max_deviation(&gates::sigma_z()) <= 1e-12);
    for z in &s.values {
        assert!(dist_to_segment(*z, c(-1.0, 0.0), c(1.0, 0.0)) <= 1e-8);
    }
    let reached = |w: C64| s.values.iter().any(|z| (z - w).norm() <= 1e-8);
    assert!(reached(c(1.0, 0.0)) && reached(c(-1.0, 0.0)));
}

#[test]
fn boundary_of_normal_operator_hits_every_vertex() {
    let a = CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
    let s = range_boundary(&a, 360).unwrap();
    for v in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)] {
        assert!(s.values.iter().any(|z| (z - v).norm() <= 1e-6));
    }
    for z in &s.values {
        let d = [
            dist_to_segment(*z, c(1.0, 0.0), c(0.0, 1.0)),
            dist_to_segment(*z, c(0.0, 1.0), c(-1.0, 0.0)),
            dist_to_segment(*z, c(-1.0, 0.0), c(1.0, 0.0)),
        ];
        assert!(d.iter().cloned().fold(f64::INFINITY, f64::min) <= 1e-6);
    }
}

#[test]
fn nilpotent_boundary_is_a_circle_of_radius_half() {
    let a = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
    // Oracle: modulus of ⟨ψ|A|ψ⟩ over random states never exceeds the radius
    // and gets arbitrarily close to it.
    let mut rng = rng_from_seed(17);
    let sampled_max = (0..100_000)
        .map(|_| {
            let psi = random_state_with(2, &mut rng);
            a.bracket(psi.amplitudes(), psi.amplitudes()).norm()
        })
        .fold(0.0, f64::max);
    assert!(sampled_max <= 0.5 + 1e-12 && sampled_max >= 0.499);
    let s = range_boundary(&a, 64).unwrap();
    for z in &s.values {
        assert!((z.norm() - 0.5).abs() <= 1e-6);
    }
}

#[test]
fn boundary_refinement_finds_a_vertex_between_grid_directions() {
    // The apex's normal cone spans about half a degree and contains no
    // multiple of 1°, so the uniform grid alone never returns it.
    let tilt = C64::from_polar(1.0, 0.5f64.to_radians());
    let apex = c(0.3, 0.004) * tilt;
    let eigs = [c(-1.0, 0.0) * tilt, apex, c(1.0, 0.0) * tilt];
    let v = random_unitary(3, 21);
    let a = &(&v * &CMatrix::from_diag(&eigs)) * &v.adjoint();
    let b = range_boundary(&a, 360).unwrap();
    assert!(b.values.iter().any(|z| (z - apex).norm() < 1e-9));
    assert!(b.len() > 360 && b.len() <= 720);
    assert!(b.directions.windows(2).all(|w| w[0] <= w[1]));
    assert!(b.max_deviation(&a) < 1e-12);
}

#[test]
fn boundary_needs_three_samples() {
    assert!(range_boundary(&gates::sigma_z(), 2).is_err());
    assert!(range_boundary(&CMatrix::zeros(2, 3), 8).is_err());
}

#[test]
fn membership_examples() {
    let m = in_range(&gates::sigma_z(), c(0.0, 0.0), 1e-8).unwrap();
    assert!(m.inside);
    let m = in_range(&gates::sigma_z(), c(2.0, 0.0), 1e-8).unwrap();
    assert!(!m.inside);
    assert_eq!(m.worst_direction, 0.0);
    assert!((m.worst_violation - 1.0).abs() < 1e-12);
    assert!(in_range(&gates::sigma_z(), c(0.0, 0.0), 0.0).is_err());
}

#[test]
fn achieve_value_symmetric_midpoint() {
    let states = [StateVector::basis(2, 0), StateVector::basis(2, 1)];
    let psi = achieve_value(&gates::sigma_z(), &states, &[0.5, 0.5]).unwrap();
    let plus = StateVector::from_real(&[1.0, 1.0]).unwrap();
    // (|0⟩ + e^{iα}|1⟩)/√2: equal moduli.
    assert!((psi.amplitudes()[0].norm() - psi.amplitudes()[1].norm()).abs() < 1e-9);
    assert!(gates::sigma_z().bracket(psi.amplitudes(), psi.amplitudes()).norm() <= 1e-9);
    assert!(psi.phase_distance(&plus) < 1e-6);
}

#[test]
fn achieve_value_degenerate_weights_returns_first_state() {
    let psi1 = StateVector::from_real(&[0.6, 0.8]).unwrap();
    let psi2 = StateVector::basis(2, 1);
    let out = achieve_value(&gates::sigma_x(), &[psi1.clone(), psi2], &[1.0, 0.0]).unwrap();
    assert!(out.phase_distance(&psi1) < 1e-12);
}

#[test]
fn achieve_value_complex_target() {
    let a = CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
    let states = [StateVector::basis(2, 0), StateVector::basis(2, 1)];
    let psi = achieve_value(&a, &states, &[0.5, 0.5]).unwrap();
    let v = a.bracket(psi.amplitudes(), psi.amplitudes());
    assert!((v - c(0.5, 0.5)).norm() <= 1e-9);
}

#[test]
fn achieve_value_stays_in_span_for_random_instances() {
    let mut rng = rng_from_seed(5);
    for seed in 0..40 {
        let a = &random_unitary(5, seed) + &random_unitary(5, seed + 99).scale(c(0.3, 0.8));
        let states: Vec<_> = (0..3).map(|_| random_state_with(5, &mut rng)).collect();
        let w = [0.2, 0.5, 0.3];
        let psi = achieve_value(&a, &states, &w).unwrap();
        let target: C64 = states.iter().zip(&w).map(|(s, p)| a.bracket(s.amplitudes(), s.amplitudes()) * p).sum();
        assert!((a.bracket(psi.amplitudes(), psi.amplitudes()) - target).norm() <= 1e-9);
        let comp = compress(&CMatrix::identity(5), &states).unwrap();
        let inside: f64 = comp.coordinates(&psi).iter().map(|z| z.norm_sqr()).sum();
        assert!((inside - 1.0).abs() < 1e-10, "left the span: {inside}");
    }
}

#[test]
fn achieve_value_rejects_bad_weights() {
    let states = [StateVector::basis(2, 0), StateVector::basis(2, 1)];
    assert!(achieve_value(&gates::sigma_z(), &states, &[0.7, 0.7]).is_err());
    assert!(achieve_value(&gates::sigma_z(), &states, &[1.5, -0.5]).is_err());
    assert!(achieve_value(&gates::sigma_z(), &states, &[1.0]).is_err());
    assert!(achieve_value(&gates::sigma_z(), &[], &[]).is_err());
}

#[test]
fn isotropic_for_sigma_z() {
    let x = isotropic_vector(&gates::sigma_z()).unwrap();
    assert!(gates::sigma_z().bracket(x.amplitudes(), x.amplitudes()).norm() <= 1e-12);
    assert!((x.amplitudes()[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
}

#[test]
fn isotropic_in_phi_frame_of_worked_plan() {
    let x = isotropic_vector(&CMatrix::from_real_diag(&[-1.0, 1.0])).unwrap();
    let want = StateVector::from_real(&[1.0, 1.0]).unwrap();
    assert!((x.amplitudes()[0] - want.amplitudes()[0]).norm() < 1e-9);
    assert!((x.amplitudes()[1] - want.amplitudes()[1]).norm() < 1e-9);
}

#[test]
fn isotropic_for_cube_roots_of_unity() {
    let w = TAU / 3.0;
    let b = CMatrix::from_diag(&[c(1.0, 0.0), C64::from_polar(1.0, w), C64::from_polar(1.0, 2.0 * w)]);
    let x = isotropic_vector(&b).unwrap();
    assert!(b.bracket(x.amplitudes(), x.amplitudes()).norm() <= 1e-12);
    let k = 1.0 / 3f64.sqrt();
    for z in x.amplitudes() {
        assert!((z - c(k, 0.0)).norm() < 1e-9, "{:?}", x);
    }
}

#[test]
fn isotropic_requires_zero_in_range() {
    let b = CMatrix::from_real_diag(&[1.0, 2.0]);
    assert!(matches!(isotropic_vector(&b), Err(Error::Domain(_))));
}

#[test]
fn isotropic_for_random_traceless() {
    for seed in 0..30 {
        let u = random_unitary(4, seed);
        let shift = u.trace() / 4.0;
        let b = &u - &CMatrix::identity(4).scale(shift);
        let x = isotropic_vector(&b).unwrap();
        assert!(b.bracket(x.amplitudes(), x.amplitudes()).norm() <= 1e-9);
    }
}

#[test]
fn nearest_point_outside() {
    // Segment from g to g·i: closest point is the midpoint at |g|/√2.
    let g = c(0.3, 0.4);
    let a = CMatrix::from_diag(&[g, g * c(0.0, 1.0)]);
    let near = nearest_to_origin(&a, &SearchOptions::default()).unwrap();
    assert!(!near.isotropic);
    assert!((near.value.norm() - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    // Disc of radius 1/2 centred at 2: closest point 1.5.
    let b = CMatrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]).unwrap();
    let near = nearest_to_origin(&b, &SearchOptions::default()).unwrap();
    assert!((near.value.norm() - 1.5).abs() < 1e-12, "{}", near.value);
    assert!((near.value - c(1.5, 0.0)).norm() < 1e-6, "{}", near.value);
}

#[test]
fn nearest_point_inside_is_isotropic() {
    let near = nearest_to_origin(&gates::sigma_x(), &SearchOptions::default()).unwrap();
    assert!(near.isotropic && near.value.norm() <= 1e-12);
}
