//! Newton minimization of the discrete energy under Dirichlet data, plus the experiments built on
//! top of it: comparison, minimizer consistency, cap exhaustion and the gradient monitor.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barriers::global_barriers;
use crate::energy::{
    assemble_energy, assemble_gradient, assemble_hessian, boundary_penalty, boundary_weights, energy_unchecked,
    EnergyBreakdown,
};
use crate::error::{check_curvature, Error, Result};
use crate::field::{check_values, FieldRole, ScalarField};
use crate::geometry::{vertex_gradients, ExactSolution};
use crate::mesh::{build_mesh, DomainSpec, SphericalMesh};
use crate::record::Record;
use crate::scalar::{lit, Real};
use crate::sparse::{conjugate_gradient, dot, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Boundary values fixed to the data; only interior values are unknowns.
    Strong,
    /// All values free, with the boundary penalty `∫_{∂Ω} |v − φ| y^{-n}` added to the energy.
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub grad_tol: T,
    pub max_newton: usize,
    pub backtrack: T,
    pub sufficient_decrease: T,
    pub cg_tol: T,
    /// CG iteration cap as a multiple of the number of unknowns.
    pub cg_max_factor: usize,
    pub mode: BoundaryMode,
    pub n: u32,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            grad_tol: lit(1e-10),
            max_newton: 60,
            backtrack: lit(0.5),
            sufficient_decrease: lit(1e-4),
            cg_tol: lit(1e-12),
            cg_max_factor: 10,
            mode: BoundaryMode::Strong,
            n: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub v: ScalarField<T>,
    pub iterations: usize,
    pub final_grad_norm: T,
    pub energy: EnergyBreakdown<T>,
    pub residual_divform: T,
    /// Whether the solution lies between the global barriers for its boundary data.
    pub sandwich_ok: bool,
    /// Energy after each accepted Newton step, starting with the initial guess.
    pub energy_history: Vec<T>,
    pub cg_iterations: usize,
}

impl<T: Real> SolveReport<T> {
    pub fn record(&self) -> Record {
        let mut r = self.energy.record();
        r.push("iterations", self.iterations)
            .push("final_grad_norm", self.final_grad_norm)
            .push("residual_divform", self.residual_divform)
            .push("sandwich_ok", self.sandwich_ok)
            .push("cg_iterations", self.cg_iterations);
        r
    }
}

/// Smoothing parameters for the penalty mode, from coarse to fine.
const PENALTY_SMOOTHING: [f64; 5] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];

struct Problem<'a, T> {
    mesh: &'a SphericalMesh<T>,
    h: T,
    n: u32,
    phi: &'a [T],
    /// Boundary penalty weights and smoothing, penalty mode only.
    penalty: Option<(Vec<T>, T)>,
}

impl<T: Real> Problem<'_, T> {
    fn value(&self, v: &[T]) -> T {
        let mut e = energy_unchecked(self.mesh, v, self.n, self.h).total;
        if let Some((w, eta)) = &self.penalty {
            for i in self.mesh.boundary_vertices() {
                let x = v[i] - self.phi[i];
                e += w[i] * ((x * x + *eta * *eta).sqrt() - *eta);
            }
        }
        e
    }

    fn gradient(&self, v: &[T]) -> Vec<T> {
        let mut g = assemble_gradient(self.mesh, v, self.n, self.h);
        if let Some((w, eta)) = &self.penalty {
            for i in self.mesh.boundary_vertices() {
                let x = v[i] - self.phi[i];
                g[i] += w[i] * x / (x * x + *eta * *eta).sqrt();
            }
        }
        g
    }

    fn hessian(&self, v: &[T]) -> CsrMatrix<T> {
        let mut m = assemble_hessian(self.mesh, v, self.n);
        if let Some((w, eta)) = &self.penalty {
            for i in self.mesh.boundary_vertices() {
                let x = v[i] - self.phi[i];
                let r2 = x * x + *eta * *eta;
                m.add(i, i, w[i] * *eta * *eta / (r2 * r2.sqrt()));
            }
        }
        m
    }
}

struct NewtonOutcome<T> {
    v: Vec<T>,
    iterations: usize,
    grad_norm: T,
    history: Vec<T>,
    cg_iterations: usize,
}

fn max_abs_on<T: Real>(g: &[T], free: &[usize]) -> T {
    free.iter().fold(T::zero(), |m, &i| m.max(g[i].abs()))
}

/// `|g_i| ≤ tol`, widened by the gradient change caused by one rounding of `v_i`. The widening is
/// negligible except on boundary rows of a sharply smoothed penalty, where the diagonal is huge.
fn converged<T: Real>(g: &[T], v: &[T], diag: &[T], free: &[usize], tol: T) -> bool {
    let ulp = T::epsilon() * lit(4.0);
    free.iter().enumerate().all(|(k, &i)| g[i].abs() <= tol + ulp * v[i].abs().max(T::one()) * diag[k].abs())
}

fn newton<T: Real>(p: &Problem<T>, free: &[usize], mut v: Vec<T>, opts: &SolveOptions<T>) -> Result<NewtonOutcome<T>> {
    let mut energy = p.value(&v);
    let mut history = vec![energy];
    let mut g = p.gradient(&v);
    let mut gnorm = max_abs_on(&g, free);
    let mut cg_total = 0;
    let roundoff = T::epsilon() * lit(64.0);
    for it in 0..opts.max_newton {
        let hess = p.hessian(&v).submatrix(free);
        if converged(&g, &v, &hess.diagonal(), free, opts.grad_tol) {
            return Ok(NewtonOutcome { v, iterations: it, grad_norm: gnorm, history, cg_iterations: cg_total });
        }
        let rhs: Vec<T> = free.iter().map(|&i| -g[i]).collect();
        let (d, info) = conjugate_gradient(&hess, &rhs, opts.cg_tol, opts.cg_max_factor * free.len().max(1));
        cg_total += info.iterations;
        let slope = -dot(&d, &rhs);
        if !(slope < T::zero()) {
            return Err(Error::NewtonNotConverged { iterations: it, grad_norm: gnorm.to_f64_lossy() });
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = v.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += t * d[k];
            }
            let e_trial = p.value(&trial);
            let armijo = energy + opts.sufficient_decrease * t * slope;
            if e_trial <= armijo {
                accepted = Some((trial, e_trial, None));
                break;
            }
            // Near the minimizer the predicted decrease drops below the rounding level of the
            // energy; there a step is accepted when it reduces the gradient instead.
            if (opts.sufficient_decrease * t * slope).abs() <= roundoff * energy.abs() {
                let g_trial = p.gradient(&trial);
                if max_abs_on(&g_trial, free) < gnorm {
                    accepted = Some((trial, e_trial, Some(g_trial)));
                    break;
                }
            }
            t *= opts.backtrack;
        }
        let Some((trial, e_trial, g_trial)) = accepted else {
            return Err(Error::LineSearchFailed(it));
        };
        v = trial;
        energy = e_trial;
        history.push(energy);
        g = g_trial.unwrap_or_else(|| p.gradient(&v));
        gnorm = max_abs_on(&g, free);
    }
    let diag = p.hessian(&v).submatrix(free).diagonal();
    if converged(&g, &v, &diag, free, opts.grad_tol) {
        return Ok(NewtonOutcome { v, iterations: opts.max_newton, grad_norm: gnorm, history, cg_iterations: cg_total });
    }
    Err(Error::NewtonNotConverged { iterations: opts.max_newton, grad_norm: gnorm.to_f64_lossy() })
}

fn check_boundary_data<T: Real>(mesh: &SphericalMesh<T>, phi: &ScalarField<T>) -> Result<()> {
    if phi.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch { expected: mesh.n_vertices(), found: phi.len() });
    }
    for i in mesh.boundary_vertices() {
        if !phi.values[i].is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    Ok(())
}

fn boundary_sup<T: Real>(mesh: &SphericalMesh<T>, phi: &[T]) -> T {
    mesh.boundary_vertices().iter().fold(T::zero(), |m, &i| m.max(phi[i].abs()))
}

/// Harmonic-type extension of the boundary data for the weighted stiffness `y^{-n}`, clamped
/// between the global barriers.
pub fn initial_guess<T: Real>(mesh: &SphericalMesh<T>, phi: &ScalarField<T>, h: T, n: u32) -> Result<Vec<T>> {
    check_curvature(h.to_f64_lossy())?;
    check_boundary_data(mesh, phi)?;
    let nv = mesh.n_vertices();
    let mut v = vec![T::zero(); nv];
    for i in mesh.boundary_vertices() {
        v[i] = phi.values[i];
    }
    let interior = mesh.interior_vertices();
    if !interior.is_empty() {
        let k = assemble_hessian(mesh, &vec![T::zero(); nv], n);
        let kb = k.mul_vec(&v);
        let rhs: Vec<T> = interior.iter().map(|&i| -kb[i]).collect();
        let (x, _) = conjugate_gradient(&k.submatrix(&interior), &rhs, lit(1e-12), 10 * interior.len());
        for (k, &i) in interior.iter().enumerate() {
            v[i] = x[k];
        }
    }
    let (lower, upper) = global_barriers(h, boundary_sup(mesh, &phi.values), mesh)?;
    for i in interior {
        v[i] = v[i].max(lower.values[i]).min(upper.values[i]);
    }
    Ok(v)
}

/// Minimize the discrete energy with boundary data `phi` (boundary entries are read).
pub fn solve_dirichlet<T: Real>(
    mesh: &SphericalMesh<T>,
    phi: &ScalarField<T>,
    h: T,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>> {
    let init = initial_guess(mesh, phi, h, opts.n)?;
    solve_from(mesh, phi, h, opts, init)
}

/// As [`solve_dirichlet`] but starting from `init`. In strong mode the boundary entries of
/// `init` are replaced by the data.
pub fn solve_from<T: Real>(
    mesh: &SphericalMesh<T>,
    phi: &ScalarField<T>,
    h: T,
    opts: &SolveOptions<T>,
    mut init: Vec<T>,
) -> Result<SolveReport<T>> {
    check_curvature(h.to_f64_lossy())?;
    check_boundary_data(mesh, phi)?;
    check_values(&init, mesh.n_vertices())?;
    let phi = &phi.values;
    let out = match opts.mode {
        BoundaryMode::Strong => {
            for i in mesh.boundary_vertices() {
                init[i] = phi[i];
            }
            let p = Problem { mesh, h, n: opts.n, phi, penalty: None };
            newton(&p, &mesh.interior_vertices(), init, opts)?
        }
        BoundaryMode::Penalty => {
            let free: Vec<usize> = (0..mesh.n_vertices()).collect();
            let w = boundary_weights(mesh, opts.n);
            let mut v = init;
            let mut total = NewtonOutcome { v: Vec::new(), iterations: 0, grad_norm: T::zero(), history: Vec::new(), cg_iterations: 0 };
            for eta in PENALTY_SMOOTHING {
                let p = Problem { mesh, h, n: opts.n, phi, penalty: Some((w.clone(), lit(eta))) };
                let o = newton(&p, &free, v, opts)?;
                total.iterations += o.iterations;
                total.cg_iterations += o.cg_iterations;
                total.history.extend(o.history);
                total.grad_norm = o.grad_norm;
                v = o.v;
            }
            total.v = v;
            total
        }
    };
    let v = out.v;
    let mut energy = assemble_energy(mesh, &v, opts.n, h)?;
    if opts.mode == BoundaryMode::Penalty {
        energy = EnergyBreakdown::new(energy.area, energy.volume, boundary_penalty(mesh, &v, phi, opts.n), opts.n, h);
    }
    let residual = residual_divergence_form(mesh, &v, h, opts.n);
    let (lower, upper) = global_barriers(h, boundary_sup(mesh, phi), mesh)?;
    let slack = lit::<T>(1e-6);
    let sandwich_ok = v
        .iter()
        .zip(lower.values.iter().zip(&upper.values))
        .all(|(x, (lo, hi))| *x >= *lo - slack && *x <= *hi + slack);
    Ok(SolveReport {
        v: ScalarField::new(v, FieldRole::LogHeight),
        iterations: out.iterations,
        final_grad_norm: out.grad_norm,
        energy,
        residual_divform: residual,
        sandwich_ok,
        energy_history: out.history,
        cg_iterations: out.cg_iterations,
    })
}

/// `max_i |∂I/∂v_i| / m_i` over interior vertices, with `m_i` the lumped spherical area: a
/// pointwise estimate of the strong residual `div(y^{-n}∇v/W) − nH y^{-(n+1)}`.
pub fn residual_divergence_form<T: Real>(mesh: &SphericalMesh<T>, v: &[T], h: T, n: u32) -> T {
    let g = assemble_gradient(mesh, v, n, h);
    let m = mesh.lumped_area();
    mesh.interior_vertices().iter().fold(T::zero(), |acc, &i| acc.max((g[i] / m[i]).abs()))
}

/// Nodal field with the trace of a closed-form solution (the whole field is filled).
pub fn exact_trace<T: Real>(mesh: &SphericalMesh<T>, sol: &ExactSolution<T>) -> ScalarField<T> {
    sol.eval(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOutcome<T> {
    pub holds: bool,
    /// `max (v2 − v1)`; non-positive when the ordering holds.
    pub max_violation: T,
    /// `min (v1 − v2)` over interior vertices.
    pub min_gap: T,
}

/// Solve with ordered data `phi1 ≥ phi2` and check `v1 ≥ v2 − 1e-8` everywhere.
pub fn comparison_test<T: Real>(
    mesh: &SphericalMesh<T>,
    phi1: &ScalarField<T>,
    phi2: &ScalarField<T>,
    h: T,
    opts: &SolveOptions<T>,
) -> Result<ComparisonOutcome<T>> {
    for i in mesh.boundary_vertices() {
        if phi1.values[i] < phi2.values[i] {
            return Err(Error::UnorderedBoundaryData(i));
        }
    }
    let v1 = solve_dirichlet(mesh, phi1, h, opts)?.v;
    let v2 = solve_dirichlet(mesh, phi2, h, opts)?.v;
    let max_violation = v1.values.iter().zip(&v2.values).fold(T::neg_infinity(), |m, (a, b)| m.max(*b - *a));
    let min_gap = mesh
        .interior_vertices()
        .iter()
        .fold(T::infinity(), |m, &i| m.min(v1.values[i] - v2.values[i]));
    Ok(ComparisonOutcome { holds: max_violation <= lit(1e-8), max_violation, min_gap })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyOutcome<T> {
    pub holds: bool,
    /// Smallest `I(w) − I(v)` over the sampled competitors.
    pub min_margin: T,
}

/// Compare `I(v)` against `samples` random smooth perturbations of `v` vanishing on the boundary.
pub fn minimizer_consistency<T: Real>(
    mesh: &SphericalMesh<T>,
    v: &ScalarField<T>,
    h: T,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<ConsistencyOutcome<T>> {
    v.check(mesh)?;
    let base = assemble_energy(mesh, &v.values, n, h)?.total;
    let d = mesh.distance_field()?;
    let interior = mesh.interior_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = T::infinity();
    for _ in 0..samples {
        let w = random_bump(mesh, &v.values, &d, &interior, &mut rng);
        let e = assemble_energy(mesh, &w, n, h)?.total;
        min_margin = min_margin.min(e - base);
    }
    Ok(ConsistencyOutcome { holds: min_margin >= lit(-1e-10), min_margin })
}

/// `v + a d(z) exp(−|z − c|²/s²)` with random centre, width and amplitude.
fn random_bump<T: Real>(
    mesh: &SphericalMesh<T>,
    v: &[T],
    d: &[T],
    interior: &[usize],
    rng: &mut ChaCha8Rng,
) -> Vec<T> {
    let c = mesh.vertex(interior[rng.gen_range(0..interior.len())]);
    let s: T = lit(rng.gen_range(0.1..0.6));
    let a: T = lit(rng.gen_range(-0.3..0.3));
    v.iter()
        .enumerate()
        .map(|(i, x)| *x + a * d[i] * (-(mesh.vertex(i) - c).norm2() / (s * s)).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientMonitor<T> {
    pub w: T,
    pub rho: T,
}

/// `W(P) = √(1 + |∇v(P)|²)` at vertex `p`, after checking that `B_ρ(P)` stays inside the domain.
pub fn gradient_bound_monitor<T: Real>(
    mesh: &SphericalMesh<T>,
    v: &ScalarField<T>,
    p: usize,
    rho: T,
) -> Result<GradientMonitor<T>> {
    v.check(mesh)?;
    let d = mesh.distance_field()?;
    if !(d[p] > rho) {
        return Err(Error::BallExitsDomain { vertex: p, radius: rho.to_f64_lossy() });
    }
    let g = vertex_gradients(mesh, &v.values)[p];
    Ok(GradientMonitor { w: (T::one() + g.norm2()).sqrt(), rho })
}

/// One cap of the exhaustion sequence.
#[derive(Debug, Clone)]
pub struct AsymptoticStep<T> {
    pub eps: T,
    pub mesh: SphericalMesh<T>,
    pub report: SolveReport<T>,
    /// Values interpolated at the vertices of the first (smallest) cap.
    pub on_compact: Vec<T>,
    /// Sup-difference from the previous cap on the compact `{y ≥ eps_0}`.
    pub sup_diff_prev: Option<T>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticRun<T> {
    pub steps: Vec<AsymptoticStep<T>>,
}

impl<T: Real> AsymptoticRun<T> {
    /// The compact `{y ≥ eps_0}` is discretized by the first cap's mesh.
    pub fn compact(&self) -> &SphericalMesh<T> {
        &self.steps[0].mesh
    }

    /// Sup-distance on the compact between each solution and `f`.
    pub fn errors_against(&self, f: impl Fn(T) -> T) -> Vec<T> {
        let ys = self.compact().heights();
        self.steps
            .iter()
            .map(|s| s.on_compact.iter().zip(&ys).fold(T::zero(), |m, (v, y)| m.max((*v - f(*y)).abs())))
            .collect()
    }
}

/// Boundary data on `{y = eps}` for equator data `gamma` (a function of azimuth): the data
/// transported inward along the equidistant-sphere profile, `γ(a) + v*(ε) − v*(0)`. It lies
/// between the global barriers through `inf γ` and `sup γ` at the equator and is exact when `γ` is
/// constant.
pub fn cap_boundary_data<T: Real>(
    mesh: &SphericalMesh<T>,
    gamma: &impl Fn(T) -> T,
    h: T,
    eps: T,
) -> Result<ScalarField<T>> {
    let s = ExactSolution::new(h, T::zero())?;
    let shift = s.at_height(eps) - s.at_height(T::zero());
    let values = mesh
        .vertices()
        .iter()
        .map(|z| gamma(z.y.atan2(z.x)) + shift)
        .collect();
    Ok(ScalarField::new(values, FieldRole::LogHeight))
}

/// Solve on the caps `{y > ε}` for a strictly decreasing schedule and measure how consecutive
/// solutions differ on the compact `{y ≥ ε_0}`.
///
/// The cap for `ε` is refined `base_level + round(log2(ε_0/ε))` times, so boundary elements keep
/// roughly the same size in the hyperbolic metric `|dz|/y` along the schedule.
pub fn solve_asymptotic<T: Real>(
    gamma: impl Fn(T) -> T,
    h: T,
    schedule: &[T],
    base_level: u32,
    opts: &SolveOptions<T>,
) -> Result<AsymptoticRun<T>> {
    check_curvature(h.to_f64_lossy())?;
    if schedule.is_empty()
        || schedule.iter().any(|e| !(*e > T::zero() && *e < T::one()))
        || schedule.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::BadSchedule);
    }
    let mut steps: Vec<AsymptoticStep<T>> = Vec::with_capacity(schedule.len());
    let eps0 = schedule[0].to_f64_lossy();
    for &eps in schedule {
        let extra = (eps0 / eps.to_f64_lossy()).log2().round() as u32;
        let mesh: SphericalMesh<T> = build_mesh(&DomainSpec::cap(eps.to_f64_lossy(), base_level + extra))?;
        let phi = cap_boundary_data(&mesh, &gamma, h, eps)?;
        let report = solve_dirichlet(&mesh, &phi, h, opts)?;
        let on_compact = match steps.first() {
            None => report.v.values.clone(),
            Some(first) => first
                .mesh
                .vertices()
                .iter()
                .map(|p| {
                    mesh.interpolate(&report.v.values, *p)
                        .ok_or_else(|| Error::InvalidMesh("compact point outside a larger cap".into()))
                })
                .collect::<Result<_>>()?,
        };
        let sup_diff_prev = steps
            .last()
            .map(|prev| prev.on_compact.iter().zip(&on_compact).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())));
        steps.push(AsymptoticStep { eps, mesh, report, on_compact, sup_diff_prev });
    }
    Ok(AsymptoticRun { steps })
}

/// Solution table with columns `vertex_id,x,y,z,v,W,H_estimate`.
pub fn write_solution_csv<T: Real, W: Write>(
    mesh: &SphericalMesh<T>,
    v: &ScalarField<T>,
    w_field: &ScalarField<T>,
    h_estimate: &ScalarField<T>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "vertex_id,x,y,z,v,W,H_estimate")?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            p.x, p.y, p.z, v.values[i], w_field.values[i], h_estimate.values[i]
        )?;
    }
    Ok(())
}
