//! Command implementations. Each writes `report.txt` plus command-specific CSV files to the output
//! directory.

use std::fs;
use std::path::Path;

use cmc_core::axisym::{energy_1d, self_convergence, solve_axisym, AxisymProblem, Profile};
use cmc_core::barriers::{boundary_barriers, cone_mean_curvature};
use cmc_core::field::{FieldRole, ScalarField};
use cmc_core::geometry::{hyperbolic_mean_curvature, w_field};
use cmc_core::mesh::{build_mesh, write_mesh, DomainSpec};
use cmc_core::rearrange::{self as lab, ProductGrid};
use cmc_core::record::Record;
use cmc_core::scalar::ExactScalar;
use cmc_core::solver::{solve_asymptotic, solve_dirichlet, write_solution_csv, BoundaryMode, SolveOptions, SolveReport};
use cmc_core::vec3::{exp_map, tangent_frame};
use cmc_core::{BigRational, Error, Exact, Field, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::{CliError, Status};

type Res = Result<Status, CliError>;

pub fn run(name: &str, cfg: &Config, out: &Path) -> Res {
    match name {
        "mesh" => mesh(cfg, out),
        "solve" => solve(cfg, out),
        "verify-exact" => verify_exact(cfg, out),
        "barrier-check" => barrier_check(cfg, out),
        "rearrange" => rearrange(cfg, out),
        "asymptotic" => asymptotic(cfg, out),
        "oracle" => oracle(cfg, out),
        "convergence" => convergence(cfg, out),
        _ => Err(CliError::Usage(format!("unknown command {name}"))),
    }
}

fn write(out: &Path, file: &str, contents: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(out.join(file), contents)?;
    Ok(())
}

fn write_record(out: &Path, r: &Record) -> Result<(), CliError> {
    write(out, "report.txt", r.to_string().as_bytes())
}

fn build(spec: &DomainSpec) -> Result<Mesh, CliError> {
    Ok(build_mesh(spec)?)
}

fn solver_options(cfg: &Config) -> Result<SolveOptions<f64>, CliError> {
    let mut o = SolveOptions::default();
    o.grad_tol = cfg.get("grad_tol", o.grad_tol)?;
    o.max_newton = cfg.get("max_newton", o.max_newton)?;
    o.mode = match cfg.raw("mode").unwrap_or("strong") {
        "strong" => BoundaryMode::Strong,
        "penalty" => BoundaryMode::Penalty,
        m => return Err(CliError::Usage(format!("mode must be strong or penalty, got '{m}'"))),
    };
    Ok(o)
}

/// Boundary data and, for closed-form data, the closed form itself.
fn boundary_data(cfg: &Config, mesh: &Mesh, h: f64) -> Result<(Field, Option<Exact>), CliError> {
    let spec = cfg.raw("data").unwrap_or("exact-trace");
    let c: f64 = cfg.get("c", 0.0)?;
    let (kind, arg) = spec.split_once(':').map_or((spec, None), |(k, a)| (k, Some(a)));
    let parse = |a: &str| a.parse::<f64>().map_err(|_| CliError::Usage(format!("invalid data '{spec}'")));
    match (kind, arg) {
        ("constant", Some(a)) => Ok((ScalarField::constant(mesh.n_vertices(), parse(a)?, FieldRole::LogHeight), None)),
        ("exact-trace", a) => {
            let ex = Exact::new(h, a.map(parse).transpose()?.unwrap_or(c))?;
            Ok((ex.eval(mesh), Some(ex)))
        }
        ("samples", Some(file)) => Ok((read_samples(Path::new(file), mesh)?, None)),
        _ => Err(CliError::Usage(format!("data must be constant:C, exact-trace[:C] or samples:FILE, got '{spec}'"))),
    }
}

/// `vertex_id,value` lines covering every boundary vertex; other vertices default to 0.
fn read_samples(path: &Path, mesh: &Mesh) -> Result<Field, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut values = vec![0.0; mesh.n_vertices()];
    let mut seen = vec![false; mesh.n_vertices()];
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("vertex_id") {
            continue;
        }
        let bad = || CliError::Usage(format!("{}:{}: expected vertex_id,value", path.display(), ln + 1));
        let (i, v) = line.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        if i >= values.len() || !v.is_finite() {
            return Err(bad());
        }
        values[i] = v;
        seen[i] = true;
    }
    if let Some(i) = mesh.boundary_vertices().into_iter().find(|&i| !seen[i]) {
        return Err(CliError::Usage(format!("samples file has no value for boundary vertex {i}")));
    }
    Ok(ScalarField::new(values, FieldRole::LogHeight))
}

/// `(r, v)` along the geodesic from the domain centre in the first tangent direction.
fn meridian_csv(mesh: &Mesh, v: &Field) -> String {
    let mut s = String::from("r,v\n");
    let Some(disk) = mesh.disk() else { return s };
    let (e1, _) = tangent_frame(disk.center);
    for k in 0..=100 {
        let r = disk.radius * f64::from(k) / 100.0;
        let p = if k == 100 { disk.snap_to_boundary(exp_map(disk.center, e1 * r)) } else { exp_map(disk.center, e1 * r) };
        if let Some(val) = mesh.interpolate(&v.values, p) {
            s.push_str(&format!("{r:e},{val:e}\n"));
        }
    }
    s
}

fn solution_files(out: &Path, mesh: &Mesh, report: &SolveReport<f64>) -> Result<(), CliError> {
    let w = w_field(mesh, &report.v)?;
    let hh = hyperbolic_mean_curvature(mesh, &report.v)?;
    let mut buf = Vec::new();
    write_solution_csv(mesh, &report.v, &w, &hh, &mut buf)?;
    write(out, "solution.csv", &buf)?;
    write(out, "meridian.csv", meridian_csv(mesh, &report.v).as_bytes())
}

fn mesh(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["domain", "level", "out"])?;
    let m = build(&cfg.domain(cfg.get("level", 4)?)?)?;
    let mut buf = Vec::new();
    write_mesh(&m, &mut buf)?;
    write(out, "mesh.txt", &buf)?;
    let mut r = Record::new();
    r.push("vertices", m.n_vertices())
        .push("triangles", m.n_triangles())
        .push("boundary_vertices", m.boundary_vertices().len())
        .push("mean_edge_length", m.mean_edge_length())
        .push("area", m.total_area());
    write_record(out, &r)?;
    Ok(Status::Pass)
}

const SOLVE_KEYS: [&str; 9] = ["domain", "level", "H", "data", "c", "mode", "grad_tol", "max_newton", "out"];

fn solve(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&SOLVE_KEYS)?;
    let h = cfg.curvature(None)?;
    let m = build(&cfg.domain(cfg.get("level", 4)?)?)?;
    let (phi, exact) = boundary_data(cfg, &m, h)?;
    let report = solve_dirichlet(&m, &phi, h, &solver_options(cfg)?)?;
    let mut r = report.record();
    r.push("H", h).push("vertices", m.n_vertices());
    if let Some(ex) = exact {
        r.push("linf_error", report.v.max_diff(&ex.eval(&m), None));
    }
    solution_files(out, &m, &report)?;
    write_record(out, &r)?;
    Ok(Status::Pass)
}

fn verify_exact(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["domain", "level", "H", "c", "tol", "mode", "grad_tol", "max_newton", "out"])?;
    let h = cfg.curvature(None)?;
    let tol: f64 = cfg.get("tol", 1e-3)?;
    let m = build(&cfg.domain(cfg.get("level", 5)?)?)?;
    let ex = Exact::new(h, cfg.get("c", 0.0)?)?;
    let report = solve_dirichlet(&m, &ex.eval(&m), h, &solver_options(cfg)?)?;
    let err = report.v.max_diff(&ex.eval(&m), None);
    let hh = hyperbolic_mean_curvature(&m, &report.v)?;
    let interior = m.interior_vertices();
    let dev: Vec<f64> = interior.iter().map(|&i| (hh.values[i] - h).abs()).collect();
    let mean_dev = dev.iter().sum::<f64>() / dev.len().max(1) as f64;
    let max_dev = dev.iter().copied().fold(0.0, f64::max);
    let mut r = report.record();
    r.push("H", h)
        .push("linf_error", err)
        .push("tolerance", tol)
        .push("curvature_mean_abs_deviation", mean_dev)
        .push("curvature_max_abs_deviation", max_dev)
        .push("pass", err <= tol);
    let mut buf = Vec::new();
    hh.write_csv(&m, &mut buf)?;
    write(out, "curvature.csv", &buf)?;
    solution_files(out, &m, &report)?;
    write_record(out, &r)?;
    Ok(Status::from_bool(err <= tol))
}

fn barrier_check(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["domain", "level", "H", "data", "c", "margin", "out"])?;
    let h = cfg.curvature(None)?;
    let m = build(&parse_default_domain(cfg, "cap:0.6", cfg.get("level", 5)?)?)?;
    let cone = cone_mean_curvature(&m, h)?;
    let mut buf = Vec::new();
    cone.write_csv(&mut buf)?;
    write(out, "cone.csv", &buf)?;
    let mut r = cone.record();
    let (phi, _) = boundary_data(cfg, &m, h)?;
    let pair = match boundary_barriers(&m, &phi, h, cfg.get("margin", 0.0)?) {
        Ok(p) => p,
        Err(e @ (Error::SolvabilityViolated { .. } | Error::BarrierSearchFailed { .. })) => {
            r.push("barriers", e.to_string()).push("pass", false);
            write_record(out, &r)?;
            return Ok(Status::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    let sol = solve_dirichlet(&m, &phi, h, &SolveOptions::default())?;
    let sandwich = (0..m.n_vertices())
        .all(|i| sol.v.values[i] >= pair.lower.values[i] - 1e-6 && sol.v.values[i] <= pair.upper.values[i] + 1e-6);
    let residual_ok = pair.upper_residual <= pair.tolerance && pair.lower_residual >= -pair.tolerance;
    let ok = cone.margin > 0.0 && residual_ok && sandwich;
    for (k, v) in pair.record().entries() {
        r.push(k, v);
    }
    r.push("sandwich", sandwich).push("pass", ok);
    let mut csv = String::from("vertex_id,lower,v,upper\n");
    for i in 0..m.n_vertices() {
        csv.push_str(&format!("{i},{:e},{:e},{:e}\n", pair.lower.values[i], sol.v.values[i], pair.upper.values[i]));
    }
    write(out, "barriers.csv", csv.as_bytes())?;
    write_record(out, &r)?;
    Ok(Status::from_bool(ok))
}

fn parse_default_domain(cfg: &Config, default: &str, level: u32) -> Result<DomainSpec, CliError> {
    crate::config::parse_domain(cfg.raw("domain").unwrap_or(default), level)
}

fn rearrange(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["domain", "level", "T", "dw", "H", "seed", "samples", "exact", "input", "minimize", "out"])?;
    let h = cfg.curvature(Some(0.0))?;
    let m = build(&parse_default_domain(cfg, "cap:0.4", cfg.get("level", 1)?)?)?;
    let (t, dw): (f64, f64) = (cfg.get("T", 1.0)?, cfg.get("dw", 0.25)?);
    if cfg.get("exact", false)? {
        let g: ProductGrid<BigRational> = ProductGrid::from_mesh(&m, t, dw, 2)?;
        rearrange_on(&g, cfg, out, h)
    } else {
        let g: ProductGrid<f64> = ProductGrid::from_mesh(&m, t, dw, 2)?;
        rearrange_on(&g, cfg, out, h)
    }
}

fn rearrange_on<S: ExactScalar>(g: &ProductGrid<S>, cfg: &Config, out: &Path, h: f64) -> Res {
    let mut r = Record::new();
    r.push("columns", g.columns()).push("levels", g.levels()).push("H", h);
    let mut ok = true;
    if let Some(file) = cfg.raw("input") {
        let text = fs::read_to_string(file).map_err(|e| CliError::Usage(format!("cannot read {file}: {e}")))?;
        let e = lab::read_rle(&text, g)?;
        let (u, re) = lab::rearrange(g, &e)?;
        let (f0, f1) = (lab::functional(g, &e, h)?, lab::functional(g, &re, h)?);
        let (v0, v1) = (lab::volume(g, &e)?, lab::volume(g, &re)?);
        ok &= f1 <= f0 && v0 == v1;
        r.push("F_before", f0.to_f64())
            .push("F_after", f1.to_f64())
            .push("volume_before", v0.to_f64())
            .push("volume_after", v1.to_f64())
            .push("u_levels", u.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
        write(out, "rearranged.rle", lab::write_rle(&re).as_bytes())?;
    } else {
        let samples: usize = cfg.get("samples", 100)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.get("seed", 0)?);
        let (mut vol_bad, mut f_bad, mut sub_bad) = (0, 0, 0);
        let mut min_slack = f64::INFINITY;
        for _ in 0..samples {
            let d1 = rng.gen_range(0.05..0.95);
            let e = lab::random_set(g, &mut rng, d1);
            let d2 = rng.gen_range(0.05..0.95);
            let e2 = lab::random_set(g, &mut rng, d2);
            let (_, re) = lab::rearrange(g, &e)?;
            vol_bad += usize::from(lab::volume(g, &re)? != lab::volume(g, &e)?);
            f_bad += usize::from(lab::functional(g, &re, h)? > lab::functional(g, &e, h)?);
            let s = lab::submodularity_check(g, &e, &e2)?;
            sub_bad += usize::from(!s.holds);
            min_slack = min_slack.min(s.slack.to_f64());
        }
        ok &= vol_bad + f_bad + sub_bad == 0;
        r.push("samples", samples)
            .push("volume_violations", vol_bad)
            .push("f_increase_violations", f_bad)
            .push("submodularity_violations", sub_bad)
            .push("min_submodularity_slack", min_slack);
    }
    if cfg.get("minimize", false)? {
        let top = g.t_levels() - 1;
        let lower = lab::subgraph_set(g, &vec![-top; g.columns()])?;
        let upper = lab::subgraph_set(g, &vec![top; g.columns()])?;
        let best = lab::minimize_between(g, &lower, &upper, h)?;
        ok &= best.minimal.is_subgraph();
        r.push("min_value", best.value.to_f64())
            .push("min_unique", best.unique)
            .push("min_is_subgraph", best.minimal.is_subgraph() && best.maximal.is_subgraph());
        write(out, "minimizer.rle", lab::write_rle(&best.minimal).as_bytes())?;
    }
    r.push("pass", ok);
    write_record(out, &r)?;
    Ok(Status::from_bool(ok))
}

fn asymptotic(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["H", "schedule", "base_level", "gamma", "out"])?;
    let h = cfg.curvature(Some(0.5))?;
    let schedule: Vec<f64> = cfg.list("schedule", "0.4,0.2,0.1,0.05")?;
    let gamma: f64 = cfg.get("gamma", 0.0)?;
    let run = solve_asymptotic(|_| gamma, h, &schedule, cfg.get("base_level", 4)?, &SolveOptions::default())?;
    let target = Exact::vanishing_at_equator(h)?;
    let errs = run.errors_against(|y| target.at_height(y) + gamma);
    let mut csv = String::from("eps,level,vertices,sup_diff_prev,error_closed_form\n");
    for (s, e) in run.steps.iter().zip(&errs) {
        let d = s.sup_diff_prev.map_or(String::from(""), |d| format!("{d:e}"));
        csv.push_str(&format!("{},{},{},{d},{e:e}\n", s.eps, s.mesh.level(), s.mesh.n_vertices()));
    }
    write(out, "asymptotic.csv", csv.as_bytes())?;
    let diffs: Vec<f64> = run.steps.iter().filter_map(|s| s.sup_diff_prev).collect();
    let mut r = Record::new();
    r.push("H", h)
        .push("steps", run.steps.len())
        .push("sup_diffs_decreasing", diffs.windows(2).all(|w| w[1] < w[0]))
        .push("final_sup_diff", diffs.last().copied().unwrap_or(f64::NAN))
        .push("final_error_closed_form", errs.last().copied().unwrap_or(f64::NAN));
    write_record(out, &r)?;
    Ok(Status::Pass)
}

fn oracle(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["n", "H", "eps", "c", "grid", "out"])?;
    let h = cfg.curvature(None)?;
    let eps: f64 = cfg.get("eps", 0.3)?;
    let p = AxisymProblem::on_cap(cfg.get("n", 2)?, h, eps, cfg.get("c", 0.0)?, cfg.get("grid", 512)?);
    let sol = solve_axisym(&p)?;
    let mut buf = Vec::new();
    sol.write_csv(&mut buf)?;
    write(out, "profile.csv", &buf)?;
    let shift = p.boundary_value - Exact::new(h, 0.0)?.at_height(eps);
    let ex = Exact::new(h, shift)?;
    let err = sol.theta.iter().zip(&sol.v).fold(0.0f64, |a, (&t, &v)| a.max((v - ex.at_colatitude(t)).abs()));
    let energy = energy_1d(&p, &sol)?;
    let mut r = sol.record();
    for (k, v) in energy.record().entries() {
        r.push(k, v);
    }
    r.push("linf_error_closed_form", err).push("value_at_pole", sol.value(0.0));
    if p.grid_points <= 1024 {
        let (order, _, _) = self_convergence(&AxisymProblem { grid_points: p.grid_points.min(256), ..p })?;
        r.push("self_convergence_order", order);
    }
    write_record(out, &r)?;
    Ok(Status::Pass)
}

fn convergence(cfg: &Config, out: &Path) -> Res {
    cfg.restrict(&["domain", "H", "levels", "c", "mode", "grad_tol", "max_newton", "out"])?;
    let h = cfg.curvature(None)?;
    let (lo, hi) = cfg.range("levels", "3..6")?;
    let ex = Exact::new(h, cfg.get("c", 0.0)?)?;
    let opts = solver_options(cfg)?;
    let mut csv = String::from("level,h,linf_error,ratio\n");
    let mut prev: Option<f64> = None;
    let mut r = Record::new();
    r.push("H", h);
    for level in lo..=hi {
        let m = build(&cfg.domain(level)?)?;
        let report = solve_dirichlet(&m, &ex.eval(&m), h, &opts)?;
        let err = report.v.max_diff(&ex.eval(&m), None);
        let ratio = prev.map_or(String::new(), |p| format!("{:.4}", p / err));
        csv.push_str(&format!("{level},{:e},{err:e},{ratio}\n", m.max_edge_length()));
        r.push(&format!("linf_error_level_{level}"), err);
        prev = Some(err);
    }
    write(out, "convergence.csv", csv.as_bytes())?;
    write_record(out, &r)?;
    Ok(Status::Pass)
}

