//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cmc_core::axisym::*;
use cmc_core::barriers::{boundary_barriers, cone_mean_curvature};
use cmc_core::energy::*;
use cmc_core::field::{FieldRole, ScalarField};
use cmc_core::geometry::hyperbolic_mean_curvature;
use cmc_core::mesh::{build_mesh, DomainSpec};
use cmc_core::rearrange::*;
use cmc_core::scalar::ExactScalar;
use cmc_core::solver::*;
use cmc_core::vec3::Vec3;
use cmc_core::{Exact, ExactGrid, Field, Grid, Mesh};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn cap(eps: f64, level: u32) -> Mesh {
    build_mesh(&DomainSpec::cap(eps, level)).unwrap()
}

fn pole_w(m: &Mesh, v: &Field) -> f64 {
    gradient_bound_monitor(m, v, m.nearest_vertex(Vec3::up()), 0.05).unwrap().w
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Exact-solution recovery on cap(0.3). Also returns the centre `W` at the last two levels.
fn exact_recovery() -> (Outcome, Vec<(f64, f64)>) {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut ws = Vec::new();
    for h in [-0.7, 0.0, 0.5, 0.9] {
        let ex = Exact::new(h, 0.0).unwrap();
        let mut errs = Vec::new();
        let mut slowest = Duration::ZERO;
        let mut w = Vec::new();
        for level in 3..=5 {
            let m = cap(0.3, level);
            let t = Instant::now();
            let r = solve_dirichlet(&m, &ex.eval(&m), h, &SolveOptions::default()).unwrap();
            slowest = slowest.max(t.elapsed());
            errs.push(r.v.max_diff(&ex.eval(&m), None));
            w.push(pole_w(&m, &r.v));
        }
        ws.push((w[1], w[2]));
        let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
        let pass = if h == 0.0 {
            errs.iter().all(|e| *e <= 1e-10)
        } else {
            errs[2] <= 1e-3 && ratios.iter().all(|r| (3.0..=5.0).contains(r))
        };
        ok &= pass && slowest.as_secs_f64() <= 60.0;
        detail.push(format!("H={h}: err5={:.2e} ratios={:.2}/{:.2} t={:.2}s", errs[2], ratios[0], ratios[1], slowest.as_secs_f64()));
    }
    ((ok, detail.join("; ")), ws)
}

fn trivial_cmc() -> Outcome {
    let m = cap(0.3, 5);
    let c = 0.7;
    let phi = ScalarField::constant(m.n_vertices(), c, FieldRole::LogHeight);
    let r = solve_dirichlet(&m, &phi, 0.0, &SolveOptions::default()).unwrap();
    let dev = r.v.values.iter().fold(0.0f64, |a, v| a.max((v - c).abs()));
    let hest = hyperbolic_mean_curvature(&m, &r.v).unwrap();
    let hmax = m.interior_vertices().iter().fold(0.0f64, |a, &i| a.max(hest.values[i].abs()));
    (dev <= 1e-10 && hmax <= 1e-2, format!("|v-c|={dev:.1e} max|H_est|={hmax:.1e}"))
}

fn energy_quadrature() -> Outcome {
    let eps = 0.5;
    let (a_ref, k_ref) = (2.0 * PI * (1.0 / eps - 1.0), PI * (1.0 / (eps * eps) - 1.0));
    let levels: Vec<u32> = (3..=6).collect();
    let errs: Vec<(f64, f64)> = levels
        .iter()
        .map(|&l| {
            let m = cap(eps, l);
            ((weighted_area(&m, 2) - a_ref).abs() / a_ref, (volume_weight(&m, 2) - k_ref).abs() / k_ref)
        })
        .collect();
    let orders: Vec<(f64, f64)> = errs.windows(2).map(|w| ((w[0].0 / w[1].0).log2(), (w[0].1 / w[1].1).log2())).collect();
    let (ea, ek) = errs[2];
    let ok = ea <= 5e-3 && ek <= 5e-3 && orders.iter().all(|(a, k)| (a - 2.0).abs() <= 0.25 && (k - 2.0).abs() <= 0.25);
    let last = orders.last().unwrap();
    (ok, format!("level 5: A rel err {ea:.2e}, k rel err {ek:.2e}; orders (last pair) {:.2}/{:.2}", last.0, last.1))
}

fn derivative_consistency() -> Outcome {
    let m = cap(0.45, 2);
    let h = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = m.vertices().iter().map(|z| 0.4 * (2.0 * z.x).sin() + 0.3 * z.y * z.z + rng.gen_range(-0.1..0.1)).collect();
    let g = assemble_gradient(&m, &v, 2, h);
    let nv = m.n_vertices();
    let step = 1e-6;
    let mut gerr = 0.0f64;
    let gscale = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for i in 0..nv {
        let (mut vp, mut vm) = (v.clone(), v.clone());
        vp[i] += step;
        vm[i] -= step;
        let fd = (assemble_energy(&m, &vp, 2, h).unwrap().total - assemble_energy(&m, &vm, 2, h).unwrap().total) / (2.0 * step);
        gerr = gerr.max((fd - g[i]).abs() / gscale);
    }
    let hess = assemble_hessian(&m, &v, 2);
    let hscale = hess.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut herr = 0.0f64;
    let hstep = 1e-5;
    for j in 0..nv {
        let (mut vp, mut vm) = (v.clone(), v.clone());
        vp[j] += hstep;
        vm[j] -= hstep;
        let (gp, gm) = (assemble_gradient(&m, &vp, 2, h), assemble_gradient(&m, &vm, 2, h));
        for i in 0..nv {
            herr = herr.max(((gp[i] - gm[i]) / (2.0 * hstep) - hess.get(i, j)).abs() / hscale);
        }
    }
    let dense = hess.to_dense();
    let min_eig = SymmetricEigen::new(DMatrix::from_fn(nv, nv, |i, j| dense[i][j])).eigenvalues.min();
    (
        gerr <= 1e-6 && herr <= 1e-5 && min_eig >= -1e-10,
        format!("{nv} vertices: grad rel err {gerr:.1e}, hessian rel err {herr:.1e}, min eigenvalue {min_eig:.2e}"),
    )
}

fn comparison_principle() -> Outcome {
    let m = cap(0.4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for h in [-0.5, 0.0, 0.5] {
        for _ in 0..50 {
            let (a, k, ph) = (rng.gen_range(0.0..1.0), rng.gen_range(1..5) as f64, rng.gen_range(0.0..2.0 * PI));
            let b = rng.gen_range(0.0..0.5);
            let low: Vec<f64> = m.vertices().iter().map(|z| a * (k * z.y.atan2(z.x) + ph).sin()).collect();
            let high: Vec<f64> = low.iter().zip(m.vertices()).map(|(x, z)| x + b * (1.0 + (3.0 * z.x).cos()) * 0.5).collect();
            let out = comparison_test(
                &m,
                &ScalarField::new(high, FieldRole::LogHeight),
                &ScalarField::new(low, FieldRole::LogHeight),
                h,
                &SolveOptions::default(),
            )
            .unwrap();
            worst = worst.min(out.min_gap);
            count += 1;
        }
    }
    (worst >= -1e-8, format!("{count} pairs, min(v1 - v2) = {worst:.2e}"))
}

fn barrier_suite() -> Outcome {
    let m = cap(0.6, 5);
    let h_ref = 0.36 / (2.0 * 0.8) + 0.8;
    let mut ok = true;
    let mut detail = Vec::new();
    for h in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let cone = cone_mean_curvature(&m, h).unwrap();
        let hdev = cone.h.iter().fold(0.0f64, |a, x| a.max((x - h_ref).abs() / h_ref));
        let phi = Exact::new(h, 0.2).unwrap().eval(&m);
        let pair = match boundary_barriers(&m, &phi, h, 0.0) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                detail.push(format!("H={h}: {e}"));
                continue;
            }
        };
        let r = solve_dirichlet(&m, &phi, h, &SolveOptions::default()).unwrap();
        let sandwich = (0..m.n_vertices())
            .all(|i| r.v.values[i] >= pair.lower.values[i] - 1e-6 && r.v.values[i] <= pair.upper.values[i] + 1e-6);
        let residual_ok = pair.upper_residual <= pair.tolerance && pair.lower_residual >= -pair.tolerance;
        let pass = cone.margin > 0.0 && hdev <= 0.02 && pair.k <= 2f64.powi(20) && residual_ok && sandwich;
        ok &= pass;
        detail.push(format!(
            "H={h}: margin {:.3} h dev {:.2}% K={} residuals {:.2e}/{:.2e} sandwich {sandwich}",
            cone.margin,
            100.0 * hdev,
            pair.k,
            pair.upper_residual,
            pair.lower_residual
        ));
    }
    (ok, detail.join("; "))
}

fn rearrangement_grid<S: ExactScalar>(level: u32) -> ProductGrid<S> {
    ProductGrid::from_mesh(&cap(0.4, level), 1.0, 0.25, 2).unwrap()
}

fn rearrangement_random<S: ExactScalar>(g: &ProductGrid<S>, seed: u64) -> (bool, bool, bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut vol_ok, mut f_ok, mut sub_ok) = (true, true, true);
    let mut cases = 0;
    for h in [-0.5, 0.0, 0.5] {
        for _ in 0..500 {
            let d = rng.gen_range(0.05..0.95);
            let e = random_set(g, &mut rng, d);
            let (_, r) = rearrange(g, &e).unwrap();
            vol_ok &= (0..g.columns()).all(|c| r.count(c) == e.count(c)) && volume(g, &r).unwrap() == volume(g, &e).unwrap();
            f_ok &= functional(g, &r, h).unwrap() <= functional(g, &e, h).unwrap();
            let d2 = rng.gen_range(0.05..0.95);
            let e2 = random_set(g, &mut rng, d2);
            sub_ok &= submodularity_check(g, &e, &e2).unwrap().holds;
            cases += 1;
        }
    }
    (vol_ok, f_ok, sub_ok, cases)
}

fn rearrangement_suite() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for level in [0, 1] {
        let gf: Grid = rearrangement_grid(level);
        let (v, f, s, n) = rearrangement_random(&gf, 100 + u64::from(level));
        ok &= v && f && s;
        detail.push(format!("f64 {} columns, {n} sets: volume {v} F-decrease {f} submodular {s}", gf.columns()));
    }
    let gq: ExactGrid = rearrangement_grid(0);
    let (v, f, s, n) = rearrangement_random(&gq, 7);
    ok &= v && f && s;
    detail.push(format!("rational {} columns, {n} sets: volume {v} F-decrease {f} submodular {s}", gq.columns()));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_gap = 0.0f64;
    for per_unit in [1, 2, 4, 8] {
        let g: Grid = ProductGrid::from_mesh(&cap(0.4, 1), 1.0, 1.0 / f64::from(per_unit), 2).unwrap();
        for h in [-0.5, 0.0, 0.5] {
            for _ in 0..50 {
                let top = g.t_levels() - 1;
                let u: Vec<f64> = (0..g.columns()).map(|_| rng.gen_range(-top..=top) as f64 / f64::from(per_unit)).collect();
                worst_gap = worst_gap.max(subgraph_energy_identity(&g, &u, h).unwrap().gap);
            }
        }
    }
    ok &= worst_gap <= 1e-12;
    detail.push(format!("identity gap {worst_gap:.1e}"));

    let gq: ExactGrid = ProductGrid::from_mesh(&cap(0.4, 0), 2.0, 0.5, 2).unwrap();
    let mut ties = 0;
    let mut subgraph = true;
    let mut agree = true;
    for h in [-0.5, 0.0, 0.5] {
        let lower = subgraph_set(&gq, &vec![-3; gq.columns()]).unwrap();
        let upper = subgraph_set(&gq, &vec![3; gq.columns()]).unwrap();
        let wide = minimize_between(&gq, &lower, &upper, h).unwrap();
        subgraph &= wide.minimal.is_subgraph() && wide.maximal.is_subgraph();
        ties += usize::from(!wide.unique);
        let lower = subgraph_set(&gq, &vec![-1; gq.columns()]).unwrap();
        let upper = subgraph_set(&gq, &vec![1; gq.columns()]).unwrap();
        let a = minimize_between(&gq, &lower, &upper, h).unwrap();
        let b = minimize_exhaustive(&gq, &lower, &upper, h).unwrap();
        agree &= a == b;
        subgraph &= b.minimal.is_subgraph() && b.maximal.is_subgraph();
        ties += usize::from(!b.unique);
    }
    ok &= subgraph && agree;
    detail.push(format!("toy minimization: subgraph {subgraph}, min-cut = enumeration {agree}, ties {ties}"));
    (ok, detail.join("; "))
}

fn axisym_cross_validation() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (eps, h) in [(0.3, -0.7), (0.3, 0.5), (0.5, 0.9)] {
        let c = 0.25;
        let o = solve_axisym(&AxisymProblem::on_cap(2, h, eps, c, 512)).unwrap();
        let errs: Vec<f64> = (3..=5)
            .map(|level| {
                let m = cap(eps, level);
                let phi = ScalarField::constant(m.n_vertices(), c, FieldRole::LogHeight);
                let r = solve_dirichlet(&m, &phi, h, &SolveOptions::default()).unwrap();
                m.vertices().iter().zip(&r.v.values).fold(0.0f64, |a, (z, v)| a.max((v - o.value(z.z.min(1.0).acos())).abs()))
            })
            .collect();
        ok &= errs[2] <= 5e-3 && errs[1] < errs[0] && errs[2] < errs[1];
        detail.push(format!("eps={eps} H={h}: err5={:.2e}", errs[2]));
    }
    let mut min_order = f64::INFINITY;
    for h in [-0.7, 0.0, 0.5, 0.9] {
        let p = AxisymProblem::on_cap(2, h, 0.3, 0.1, 64);
        let (order, e1, _) = self_convergence(&p).unwrap();
        if e1 > 1e-13 {
            min_order = min_order.min(order);
        }
    }
    ok &= min_order >= 2.0;
    let p = AxisymProblem::on_cap(3, 0.0f64, 0.3, 0.6, 256);
    let flux = flux_first_integral(&p, &solve_axisym(&p).unwrap());
    let spread = flux.iter().fold(0.0f64, |a, f| a.max((f - flux[0]).abs()));
    ok &= spread <= 1e-10;
    detail.push(format!("self-convergence order >= {min_order:.2}; H=0 flux spread {spread:.1e}"));
    (ok, detail.join("; "))
}

fn asymptotic_exhaustion() -> (Outcome, (f64, f64)) {
    let h = 0.5;
    let run = solve_asymptotic(|_| 0.0, h, &[0.4, 0.2, 0.1, 0.05], 4, &SolveOptions::default()).unwrap();
    let diffs: Vec<f64> = run.steps.iter().filter_map(|s| s.sup_diff_prev).collect();
    let target = Exact::vanishing_at_equator(h).unwrap();
    let errs = run.errors_against(|y| target.at_height(y));
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    let last = *diffs.last().unwrap();
    let err = *errs.last().unwrap();
    let n = run.steps.len();
    let ws = (
        pole_w(&run.steps[n - 2].mesh, &run.steps[n - 2].report.v),
        pole_w(&run.steps[n - 1].mesh, &run.steps[n - 1].report.v),
    );
    (
        (
            decreasing && last <= 5e-3 && err <= 1e-2,
            format!("sup diffs {:?}, final err vs closed form {err:.2e}", diffs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()),
        ),
        ws,
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (c1, w1) = exact_recovery();
    let (c9, w9) = asymptotic_exhaustion();
    let mut worst_w = w1.iter().map(|&(a, b)| relative_change(a, b)).fold(0.0f64, f64::max);
    worst_w = worst_w.max(relative_change(w9.0, w9.1));
    let c10 = (worst_w <= 0.01, format!("max relative change of W at the centre {worst_w:.2e}"));
    let results = [
        ("exact-solution recovery", c1),
        ("trivial CMC check", trivial_cmc()),
        ("energy quadrature", energy_quadrature()),
        ("derivative consistency", derivative_consistency()),
        ("comparison principle", comparison_principle()),
        ("barrier suite", barrier_suite()),
        ("rearrangement suite", rearrangement_suite()),
        ("axisymmetric cross-validation", axisym_cross_validation()),
        ("asymptotic exhaustion", c9),
        ("gradient-bound monitoring", c10),
    ];
    let mut all = true;
    for (i, (name, (ok, detail))) in results.iter().enumerate() {
        all &= ok;
        println!("{} {:>2} {name}: {detail}", if *ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
