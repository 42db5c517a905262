use cmc_core::barriers::Psi;
use cmc_core::field::{FieldRole, ScalarField};
use cmc_core::geometry::{curvature_convert, hyperbolic_mean_curvature};
use cmc_core::mesh::{build_mesh, DomainSpec};
use cmc_core::solver::{initial_guess, solve_from, SolveOptions};
use cmc_core::{Exact, Mesh};
use proptest::prelude::*;

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refined_vertices_stay_on_the_sphere(eps in 0.05..0.95f64, level in 0u32..5) {
        let m: Mesh = build_mesh(&DomainSpec::cap(eps, level)).unwrap();
        for p in m.vertices() {
            prop_assert!((p.norm() - 1.0).abs() <= 1e-12);
            prop_assert!(p.z >= eps - 1e-12);
        }
    }

    #[test]
    fn ball_vertices_stay_on_the_sphere(theta in 0.0..0.8f64, phi in 0.0..6.28f64, r in 0.1..0.6f64, level in 0u32..4) {
        let m: Mesh = build_mesh(&DomainSpec::ball(unit(theta, phi), r, level)).unwrap();
        prop_assert!(m.vertices().iter().all(|p| (p.norm() - 1.0).abs() <= 1e-12 && p.z > 0.0));
    }

    #[test]
    fn boundary_distance_is_lipschitz(eps in 0.1..0.9f64, level in 1u32..5) {
        let m: Mesh = build_mesh(&DomainSpec::cap(eps, level)).unwrap();
        let d = m.distance_field().unwrap();
        for e in m.edges() {
            let (a, b) = (e.v[0], e.v[1]);
            prop_assert!((d[a] - d[b]).abs() <= m.vertex(a).angle_to(m.vertex(b)) + 1e-12);
        }
        for i in m.boundary_vertices() {
            prop_assert_eq!(d[i], 0.0);
        }
    }

    #[test]
    fn curvature_conversion_is_affine(u in 0.01..5.0f64, k1 in -3.0..3.0f64, k2 in -3.0..3.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64, nu in -1.0..1.0f64) {
        let lhs = curvature_convert(u, a * k1 + b * k2, nu).unwrap();
        let rhs = a * curvature_convert(u, k1, 0.0).unwrap() + b * curvature_convert(u, k2, 0.0).unwrap() + nu;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn psi_is_increasing_and_concave(k in 16.0..2048.0f64, m in 0.0..4.0f64, s in 0.0..1.0f64) {
        let psi = Psi::new(k, m);
        let t = s * psi.delta();
        prop_assert!(psi.d1(t) > 0.0 && psi.d2(t) < 0.0);
        prop_assert!(psi.value(t + 1e-3 * psi.delta()) > psi.value(t));
    }

    #[test]
    fn exact_solutions_have_curvature_of_their_sign(h in -0.9..0.9f64) {
        prop_assume!(h.abs() > 0.05);
        let m: Mesh = build_mesh(&DomainSpec::cap(0.4, 4)).unwrap();
        let est = hyperbolic_mean_curvature(&m, &Exact::new(h, 0.0).unwrap().eval(&m)).unwrap();
        let interior = m.interior_vertices();
        let mean = interior.iter().map(|&i| est.values[i]).sum::<f64>() / interior.len() as f64;
        prop_assert!(mean.signum() == h.signum() && (mean - h).abs() < 0.05 * h.abs().max(0.1));
    }
}

#[test]
fn curvature_is_invariant_under_dilation() {
    let mut prev = f64::INFINITY;
    for level in 3..=5 {
        let m: Mesh = build_mesh(&DomainSpec::cap(0.4, level)).unwrap();
        let v: Vec<f64> = m.vertices().iter().map(|z| 0.3 * z.x * z.y + 0.2 * z.z * z.z).collect();
        let shifted: Vec<f64> = v.iter().map(|x| x + 1.7).collect();
        let a = hyperbolic_mean_curvature(&m, &ScalarField::new(v, FieldRole::LogHeight)).unwrap();
        let b = hyperbolic_mean_curvature(&m, &ScalarField::new(shifted, FieldRole::LogHeight)).unwrap();
        let diff = m.interior_vertices().iter().fold(0.0f64, |d, &i| d.max((a.values[i] - b.values[i]).abs()));
        assert!(diff <= 10.0 * m.max_edge_length() && diff <= prev + 1e-12, "level {level}: {diff:e}");
        prev = diff;
    }
}

#[test]
fn different_initial_guesses_converge_to_the_same_solution() {
    let m: Mesh = build_mesh(&DomainSpec::cap(0.35, 4)).unwrap();
    let phi = ScalarField::new(m.vertices().iter().map(|z| 0.5 * (2.0 * z.y.atan2(z.x)).cos()).collect(), FieldRole::LogHeight);
    let opts = SolveOptions::default();
    let a = solve_from(&m, &phi, 0.6, &opts, initial_guess(&m, &phi, 0.6, 2).unwrap()).unwrap();
    let wild: Vec<f64> = m.vertices().iter().map(|z| 0.8 * (5.0 * z.x).sin() - 0.4).collect();
    let b = solve_from(&m, &phi, 0.6, &opts, wild).unwrap();
    assert!(a.v.max_diff(&b.v, None) <= 1e-8);
    assert!(b.energy_history.windows(2).all(|w| w[1] < w[0]));
}
