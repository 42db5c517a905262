//! Rotationally symmetric reference solutions on caps.
//!
//! For `v = v(θ)`, `θ` the colatitude, the equation reduces to the flux form
//!
//! `(s(θ) v′/√(1+v′²))′ = nH sin^{n−1}θ cos^{−(n+1)}θ`, `s(θ) = sin^{n−1}θ cos^{−n}θ`,
//!
//! solved on `[0, θ_max]` with `v′(0) = 0` and `v(θ_max)` prescribed. The discretization divides by
//! `s`, uses fourth-order central differences with even reflection across the pole, and a
//! one-sided six-point stencil at the last interior node. At the pole the equation becomes
//! `n v″(0) = nH`.

mod banded;
mod quadrature;

pub use banded::Banded;
pub use quadrature::integrate;

use std::io::Write;

use crate::dense;
use crate::energy::EnergyBreakdown;
use crate::error::{check_curvature, Error, Result};
use crate::record::Record;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymProblem<T> {
    pub n: u32,
    pub h: T,
    pub theta_max: T,
    pub boundary_value: T,
    /// Number of intervals on `[0, θ_max]`.
    pub grid_points: usize,
}

impl<T: Real> AxisymProblem<T> {
    /// Problem on the cap `{y > ε}`.
    pub fn on_cap(n: u32, h: T, eps: T, boundary_value: T, grid_points: usize) -> Self {
        Self { n, h, theta_max: eps.acos(), boundary_value, grid_points }
    }

    pub fn validate(&self) -> Result<()> {
        check_curvature(self.h.to_f64_lossy())?;
        if self.n < 2 {
            return Err(Error::InvalidDomain(format!("n = {} must be at least 2", self.n)));
        }
        if !(self.theta_max > T::zero() && self.theta_max < T::FRAC_PI_2()) {
            return Err(Error::InvalidDomain("theta_max must lie in (0, pi/2)".into()));
        }
        if self.grid_points < 64 {
            return Err(Error::InvalidDomain(format!("grid_points = {} must be at least 64", self.grid_points)));
        }
        if !self.boundary_value.is_finite() {
            return Err(Error::NonFinite(self.grid_points));
        }
        Ok(())
    }

    fn step(&self) -> T {
        self.theta_max / T::from_usize(self.grid_points).unwrap()
    }

    /// `s′/s = (n−1) cot θ + n tan θ`.
    fn log_weight_slope(&self, theta: T) -> T {
        let n = T::from_u32(self.n).unwrap();
        (n - T::one()) / theta.tan() + n * theta.tan()
    }
}

/// A profile `v(θ)` with its derivative.
pub trait Profile<T> {
    fn value(&self, theta: T) -> T;
    fn slope(&self, theta: T) -> T;
}

/// Profile given by closures.
pub struct FnProfile<F, G>(pub F, pub G);

impl<T, F: Fn(T) -> T, G: Fn(T) -> T> Profile<T> for FnProfile<F, G> {
    fn value(&self, theta: T) -> T {
        (self.0)(theta)
    }
    fn slope(&self, theta: T) -> T {
        (self.1)(theta)
    }
}

/// Nodal values on the uniform grid `θ_i = i θ_max / N`, interpolated by cubic Hermite splines.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymSolution<T> {
    pub theta: Vec<T>,
    pub v: Vec<T>,
    pub dv: Vec<T>,
    /// Max-norm of the discrete equation at the unknown nodes.
    pub residual: T,
    pub newton_iterations: usize,
}

impl<T: Real> Profile<T> for AxisymSolution<T> {
    fn value(&self, theta: T) -> T {
        self.hermite(theta).0
    }
    fn slope(&self, theta: T) -> T {
        self.hermite(theta).1
    }
}

impl<T: Real> AxisymSolution<T> {
    fn hermite(&self, theta: T) -> (T, T) {
        let n = self.theta.len() - 1;
        let h = self.theta[1] - self.theta[0];
        let x = (theta / h).max(T::zero());
        let i = x.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = x - T::from_usize(i).unwrap();
        let (p0, p1, m0, m1) = (self.v[i], self.v[i + 1], self.dv[i] * h, self.dv[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let v = (two * t3 - three * t2 + T::one()) * p0 + (t3 - two * t2 + t) * m0 + (three * t2 - two * t3) * p1 + (t3 - t2) * m1;
        let six = lit::<T>(6.0);
        let d = (six * t2 - six * t) * p0 + (three * t2 - lit::<T>(4.0) * t + T::one()) * m0 + (six * t - six * t2) * p1 + (three * t2 - two * t) * m1;
        (v, d / h)
    }

    /// `(θ, v, v′)` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,v,dv")?;
        for ((t, v), d) in self.theta.iter().zip(&self.v).zip(&self.dv) {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", t.to_f64_lossy(), v.to_f64_lossy(), d.to_f64_lossy())?;
        }
        Ok(())
    }

    pub fn record(&self) -> Record {
        let mut r = Record::new();
        r.push("grid_points", self.theta.len() - 1)
            .push("residual", format!("{:e}", self.residual.to_f64_lossy()))
            .push("newton_iterations", self.newton_iterations);
        r
    }
}

/// Finite-difference weights for derivative `order` at 0 from the given integer offsets.
fn fd_weights<T: Real>(offsets: &[i32], order: usize) -> Vec<T> {
    let m = offsets.len();
    let rows: Vec<Vec<T>> = (0..m)
        .map(|p| offsets.iter().map(|&o| T::from_i32(o).unwrap().powi(p as i32)).collect())
        .collect();
    let mut rhs = vec![T::zero(); m];
    rhs[order] = (1..=order).fold(T::one(), |f, k| f * T::from_usize(k).unwrap());
    dense::solve(rows, rhs).expect("distinct offsets")
}

/// Stencils for `v′` and `v″` at each node `0..N`, as `(node, d1 weight, d2 weight)` with
/// reflected and boundary nodes already resolved to indices in `0..=N`.
fn stencils<T: Real>(nn: usize, h: T) -> Vec<Vec<(usize, T, T)>> {
    let central: [i32; 5] = [-2, -1, 0, 1, 2];
    let c1: Vec<T> = fd_weights(&central, 1);
    let c2: Vec<T> = fd_weights(&central, 2);
    let last: [i32; 6] = [-4, -3, -2, -1, 0, 1];
    let l1: Vec<T> = fd_weights(&last, 1);
    let l2: Vec<T> = fd_weights(&last, 2);
    let b: [i32; 6] = [-5, -4, -3, -2, -1, 0];
    let b1: Vec<T> = fd_weights(&b, 1);
    let b2: Vec<T> = fd_weights(&b, 2);
    (0..=nn)
        .map(|i| {
            let (offs, w1, w2): (&[i32], &[T], &[T]) = if i == nn {
                (&b, &b1, &b2)
            } else if i + 1 == nn {
                (&last, &l1, &l2)
            } else {
                (&central, &c1, &c2)
            };
            let mut out: Vec<(usize, T, T)> = Vec::new();
            for ((&o, &a), &c) in offs.iter().zip(w1).zip(w2) {
                let j = (i as i64 + o as i64).unsigned_abs() as usize;
                match out.iter_mut().find(|e| e.0 == j) {
                    Some(e) => {
                        e.1 += a / h;
                        e.2 += c / (h * h);
                    }
                    None => out.push((j, a / h, c / (h * h))),
                }
            }
            out
        })
        .collect()
}

fn psi<T: Real>(p: T) -> (T, T, T) {
    let q = T::one() + p * p;
    let r = q.sqrt();
    (p / r, T::one() / (q * r), -lit::<T>(3.0) * p / (q * q * r))
}

/// Residual and, when asked, Jacobian of the discrete equation for `w = v − boundary_value`.
fn system<T: Real>(p: &AxisymProblem<T>, st: &[Vec<(usize, T, T)>], w: &[T], jac: bool) -> (Vec<T>, Option<Banded<T>>) {
    let nn = p.grid_points;
    let n = T::from_u32(p.n).unwrap();
    let h = p.step();
    let mut r = vec![T::zero(); nn];
    let mut j = jac.then(|| Banded::zeros(nn, 4, 2));
    for i in 0..nn {
        let (mut d1, mut d2) = (T::zero(), T::zero());
        for &(k, a, c) in &st[i] {
            d1 += a * w[k];
            d2 += c * w[k];
        }
        if i == 0 {
            r[0] = n * d2 - n * p.h;
            if let Some(j) = j.as_mut() {
                for &(k, _, c) in &st[0] {
                    j.add(0, k, n * c);
                }
            }
            continue;
        }
        let theta = h * T::from_usize(i).unwrap();
        let g = p.log_weight_slope(theta);
        let (ps, ps1, ps2) = psi(d1);
        r[i] = g * ps + ps1 * d2 - n * p.h / theta.cos();
        if let Some(j) = j.as_mut() {
            let dp = g * ps1 + ps2 * d2;
            for &(k, a, c) in &st[i] {
                if k < nn {
                    j.add(i, k, dp * a + ps1 * c);
                }
            }
        }
    }
    (r, j)
}

fn max_abs<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Newton solve of the collocation system, damped on the residual norm.
pub fn solve_axisym<T: Real>(p: &AxisymProblem<T>) -> Result<AxisymSolution<T>> {
    p.validate()?;
    let nn = p.grid_points;
    let h = p.step();
    let st = stencils(nn, h);
    let mut w = vec![T::zero(); nn + 1];
    let (mut r, _) = system(p, &st, &w, false);
    let mut rn = max_abs(&r);
    let mut iterations = 0;
    while iterations < 60 {
        let (_, jac) = system(p, &st, &w, true);
        let delta = jac
            .expect("jacobian requested")
            .solve(r.iter().map(|&x| -x).collect())
            .ok_or_else(|| Error::OracleFailed("singular Newton matrix".into()))?;
        iterations += 1;
        let mut t = T::one();
        let accepted = loop {
            let trial: Vec<T> = w.iter().enumerate().map(|(i, &x)| if i < nn { x + t * delta[i] } else { x }).collect();
            let (tr, _) = system(p, &st, &trial, false);
            let tn = max_abs(&tr);
            if tn.is_finite() && tn < rn {
                w = trial;
                r = tr;
                rn = tn;
                break true;
            }
            t *= lit(0.5);
            if t < lit(1e-6) {
                break false;
            }
        };
        let step = max_abs(&delta) * t;
        if !accepted || step <= T::epsilon() * lit::<T>(4.0) * (T::one() + max_abs(&w)) {
            break;
        }
    }
    if !(rn <= lit(1e-8)) {
        return Err(Error::OracleFailed(format!("residual {:e} after {iterations} Newton steps", rn.to_f64_lossy())));
    }
    let theta: Vec<T> = (0..=nn).map(|i| h * T::from_usize(i).unwrap()).collect();
    let dv: Vec<T> = st.iter().map(|s| s.iter().fold(T::zero(), |a, &(k, c, _)| a + c * w[k])).collect();
    let v = w.iter().map(|&x| x + p.boundary_value).collect();
    Ok(AxisymSolution { theta, v, dv, residual: rn, newton_iterations: iterations })
}

/// `|S^{k}|`, the measure of the unit `k`-sphere.
pub fn sphere_measure<T: Real>(k: u32) -> T {
    match k {
        0 => lit(2.0),
        1 => T::PI() * lit(2.0),
        _ => T::PI() * lit(2.0) / T::from_u32(k - 1).unwrap() * sphere_measure::<T>(k - 2),
    }
}

/// Weighted area, volume and energy of a profile on `[0, θ_max]`, to relative accuracy `1e-10`.
pub fn energy_1d<T: Real>(p: &AxisymProblem<T>, profile: &impl Profile<T>) -> Result<EnergyBreakdown<T>> {
    p.validate()?;
    let n = p.n as i32;
    let omega = sphere_measure::<T>(p.n - 1);
    let rel = lit(1e-10);
    let area = integrate(
        |t: T| {
            let d = profile.slope(t);
            (T::one() + d * d).sqrt() * t.sin().powi(n - 1) / t.cos().powi(n)
        },
        T::zero(),
        p.theta_max,
        rel,
    );
    let volume = integrate(|t: T| profile.value(t) * t.sin().powi(n - 1) / t.cos().powi(n + 1), T::zero(), p.theta_max, rel);
    Ok(EnergyBreakdown::new(area * omega, volume * omega, T::zero(), p.n, p.h))
}

/// `s(θ) v′/√(1+v′²) − nH ∫₀^θ sin^{n−1} cos^{−(n+1)}` at every node; constant (zero) along an
/// exact solution.
pub fn flux_first_integral<T: Real>(p: &AxisymProblem<T>, sol: &AxisymSolution<T>) -> Vec<T> {
    let n = p.n as i32;
    let nh = T::from_u32(p.n).unwrap() * p.h;
    let f = |t: T| t.sin().powi(n - 1) / t.cos().powi(n + 1);
    let mut acc = T::zero();
    let mut prev = T::zero();
    sol.theta
        .iter()
        .zip(&sol.dv)
        .map(|(&t, &d)| {
            if p.h != T::zero() && t > prev {
                acc += integrate(f, prev, t, lit(1e-13));
            }
            prev = t;
            let s = t.sin().powi(n - 1) / t.cos().powi(n);
            s * psi(d).0 - nh * acc
        })
        .collect()
}

/// Self-convergence of the nodal values under grid doubling: `log₂(e₁/e₂)` with `e₁ = ‖v_N − v_{2N}‖`
/// and `e₂ = ‖v_{2N} − v_{4N}‖` on the coarse nodes. Also returns `(e₁, e₂)`.
pub fn self_convergence<T: Real>(p: &AxisymProblem<T>) -> Result<(T, T, T)> {
    let coarse = solve_axisym(p)?;
    let mid = solve_axisym(&AxisymProblem { grid_points: 2 * p.grid_points, ..*p })?;
    let fine = solve_axisym(&AxisymProblem { grid_points: 4 * p.grid_points, ..*p })?;
    let e1 = (0..=p.grid_points).fold(T::zero(), |m, i| m.max((coarse.v[i] - mid.v[2 * i]).abs()));
    let e2 = (0..=p.grid_points).fold(T::zero(), |m, i| m.max((mid.v[2 * i] - fine.v[4 * i]).abs()));
    Ok(((e1 / e2).log2(), e1, e2))
}
