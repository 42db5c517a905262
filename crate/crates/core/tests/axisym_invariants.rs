use cmc_core::axisym::*;
use cmc_core::field::{FieldRole, ScalarField};
use cmc_core::mesh::{build_mesh, DomainSpec};
use cmc_core::solver::{solve_dirichlet, SolveOptions};
use cmc_core::{Exact, Mesh};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_matches_closed_form_in_every_dimension(n in 2u32..6, h in -0.85..0.85f64, c in -1.0..1.0f64, eps in 0.3..0.8f64) {
        let ex = Exact::new(h, c).unwrap();
        let p = AxisymProblem::on_cap(n, h, eps, ex.at_height(eps), 256);
        let s = solve_axisym(&p).unwrap();
        prop_assert!(s.residual <= 1e-10);
        for (&t, &v) in s.theta.iter().zip(&s.v) {
            prop_assert!((v - ex.at_colatitude(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn minimal_first_integral_vanishes(n in 2u32..6, c in -2.0..2.0f64) {
        let p = AxisymProblem::on_cap(n, 0.0, 0.4, c, 128);
        let s = solve_axisym(&p).unwrap();
        let flux = flux_first_integral(&p, &s);
        prop_assert!(flux.iter().all(|f| f.abs() <= 1e-10));
    }
}

#[test]
fn two_dimensional_solver_agrees_with_the_oracle() {
    let (eps, h, c) = (0.3, 0.5, 0.25);
    let o = solve_axisym(&AxisymProblem::on_cap(2, h, eps, c, 512)).unwrap();
    let errs: Vec<f64> = (3..=5)
        .map(|level| {
            let m: Mesh = build_mesh(&DomainSpec::cap(eps, level)).unwrap();
            let phi = ScalarField::constant(m.n_vertices(), c, FieldRole::LogHeight);
            let r = solve_dirichlet(&m, &phi, h, &SolveOptions::default()).unwrap();
            m.vertices().iter().zip(&r.v.values).fold(0.0f64, |a, (z, v)| a.max((v - o.value(z.z.min(1.0).acos())).abs()))
        })
        .collect();
    assert!(errs[2] < 5e-3 && errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn profile_csv_has_header_and_rows() {
    let s = solve_axisym(&AxisymProblem::on_cap(2, 0.3, 0.5, 0.0, 64)).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("theta,v,dv\n"));
    assert_eq!(text.lines().count(), 66);
}
