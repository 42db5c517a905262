//! Barriers for the Dirichlet problem.
//!
//! Global barriers are shifted equidistant solutions. Boundary barriers have the form
//! `φ ± ψ(d)` on the band `N_δ = {d < δ}`, with `d` the distance to the boundary and
//! `ψ(t) = log(1 + βt)/K`, `β = K² e^{MK}`, `δ = K^{-2}`. They are checked against the
//! nondivergence operator
//!
//! `Mv = (1/W)(σ^{ij} − v^i v^j/W²) v_{ij} − (n/y) e·∇v/W`
//!
//! through the residual `Mv − nH/y`: supersolutions have residual `≤ 0`, subsolutions `≥ 0`.

use std::io::Write;

use crate::dense::least_squares;
use crate::error::{check_curvature, Error, Result};
use crate::field::{FieldRole, ScalarField};
use crate::geometry::ExactSolution;
use crate::mesh::{Disk, SphericalMesh};
use crate::record::Record;
use crate::scalar::{lit, Real};
use crate::vec3::{exp_map, log_map, tangent_frame, Vec3};

/// Dimension of the hemisphere carrying the meshes.
const N: u32 = 2;

/// Offsets `(lo, hi)` such that `−M + v* − lo` and `M + v* − hi` bound every solution with
/// `|φ| ≤ M`, where `v*` is the equidistant solution with `c = 0`.
///
/// `v*` is monotone in `y`, so its extremes over the closed hemisphere are at `y = 0` and
/// `y = 1`. For `H ≥ 0` this reduces to the lower barrier `−M + v*` and the upper barrier
/// `lower + 2M − log(1 − H)`; for `H < 0` the offsets are mirrored.
pub fn global_barrier_offsets<T: Real>(h: T) -> Result<(T, T)> {
    let s = ExactSolution::new(h, T::zero())?;
    let (a, b) = (s.at_height(T::zero()), s.at_height(T::one()));
    Ok((a.max(b).max(T::zero()), a.min(b)))
}

/// Global sub- and supersolutions `(lower, upper)` for boundary data bounded by `m_bound`.
pub fn global_barriers<T: Real>(
    h: T,
    m_bound: T,
    mesh: &SphericalMesh<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    if !(m_bound >= T::zero()) {
        return Err(Error::InvalidDomain(format!("bound M = {m_bound} must be non-negative")));
    }
    let s = ExactSolution::new(h, T::zero())?;
    let (lo, hi) = global_barrier_offsets(h)?;
    let (mut lower, mut upper) = (Vec::with_capacity(mesh.n_vertices()), Vec::with_capacity(mesh.n_vertices()));
    for z in mesh.vertices() {
        let v = s.at_height(z.z);
        lower.push(-m_bound + v - lo);
        upper.push(m_bound + v - hi);
    }
    Ok((ScalarField::new(lower, FieldRole::Barrier), ScalarField::new(upper, FieldRole::Barrier)))
}

/// Discrete geometry of the boundary at one vertex.
#[derive(Debug, Clone, Copy)]
struct BoundaryPoint<T> {
    vertex: usize,
    /// Geodesic curvature from the turning angle, positive when the boundary bends inward.
    curvature: T,
    /// Interior unit normal, tangent to the sphere.
    normal: Vec3<T>,
}

fn boundary_points<T: Real>(mesh: &SphericalMesh<T>) -> Result<Vec<BoundaryPoint<T>>> {
    let loops = mesh.boundary_loops();
    if loops.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut out = Vec::with_capacity(mesh.boundary_vertices().len());
    for lp in loops {
        if lp.len() < 3 {
            return Err(Error::DegenerateBoundaryLoop(lp.len()));
        }
        let m = lp.len();
        for k in 0..m {
            let (a, b, c) = (mesh.vertex(lp[(k + m - 1) % m]), mesh.vertex(lp[k]), mesh.vertex(lp[(k + 1) % m]));
            let t_in = -log_map(b, a).normalized();
            let t_out = log_map(b, c).normalized();
            // Loops keep the interior on the left, so a left turn bends toward the interior.
            let turn = b.dot(t_in.cross(t_out)).atan2(t_in.dot(t_out));
            let len = (a.angle_to(b) + b.angle_to(c)) * lit(0.5);
            let tangent = (t_in + t_out).normalized();
            out.push(BoundaryPoint { vertex: lp[k], curvature: turn / len, normal: b.cross(tangent) });
        }
    }
    Ok(out)
}

/// Hyperbolic mean curvature of the radial cone over the boundary, per boundary vertex.
#[derive(Debug, Clone)]
pub struct ConeCurvatureReport<T> {
    pub vertices: Vec<usize>,
    /// `h = ((n−1)/n) y H_∂ + e·N`.
    pub h: Vec<T>,
    /// Discrete geodesic curvature `H_∂` of the boundary.
    pub boundary_curvature: Vec<T>,
    /// `min h − |H|`.
    pub margin: T,
    pub mean_curvature: T,
}

impl<T: Real> ConeCurvatureReport<T> {
    pub fn min_h(&self) -> T {
        self.h.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn record(&self) -> Record {
        let mut r = Record::new();
        r.push("H", self.mean_curvature)
            .push("min_h", self.min_h())
            .push("margin", self.margin)
            .push("boundary_vertices", self.vertices.len());
        r
    }

    /// Columns `vertex_id,h,margin`, with the per-vertex margin `h − |H|`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "vertex_id,h,margin")?;
        for (&i, &h) in self.vertices.iter().zip(&self.h) {
            writeln!(out, "{i},{h},{}", h - self.mean_curvature.abs())?;
        }
        Ok(())
    }
}

/// Cone curvature `h` from turning angles of the boundary loops and its margin over `|H|`.
pub fn cone_mean_curvature<T: Real>(mesh: &SphericalMesh<T>, h: T) -> Result<ConeCurvatureReport<T>> {
    check_curvature(h.to_f64_lossy())?;
    let pts = boundary_points(mesh)?;
    let factor = lit::<T>(f64::from(N - 1) / f64::from(N));
    let hs: Vec<T> = pts
        .iter()
        .map(|p| factor * mesh.height(p.vertex) * p.curvature + p.normal.z)
        .collect();
    let margin = hs.iter().copied().fold(T::infinity(), T::min) - h.abs();
    Ok(ConeCurvatureReport {
        vertices: pts.iter().map(|p| p.vertex).collect(),
        h: hs,
        boundary_curvature: pts.iter().map(|p| p.curvature).collect(),
        margin,
        mean_curvature: h,
    })
}

/// Per boundary vertex, whether `H_∂ > −(n/2)(−|H| + √(H² + 4y²/(n(n−1))))`.
pub fn sharpened_condition<T: Real>(mesh: &SphericalMesh<T>, h: T) -> Result<Vec<(usize, bool)>> {
    check_curvature(h.to_f64_lossy())?;
    let n = lit::<T>(f64::from(N));
    Ok(boundary_points(mesh)?
        .iter()
        .map(|p| {
            let y = mesh.height(p.vertex);
            let root = (h * h + lit::<T>(4.0) * y * y / (n * (n - T::one()))).sqrt();
            let threshold = -(n / lit(2.0)) * (root - h.abs());
            (p.vertex, p.curvature > threshold)
        })
        .collect())
}

/// The profile `ψ(t) = log(1 + βt)/K` with `β = K² e^{MK}` and `δ = K^{-2}`, evaluated in log
/// space so that large `K` does not overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi<T> {
    pub k: T,
    pub m: T,
}

fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl<T: Real> Psi<T> {
    pub fn new(k: T, m: T) -> Self {
        Self { k, m }
    }

    /// `log β = 2 log K + MK`.
    pub fn ln_beta(&self) -> T {
        lit::<T>(2.0) * self.k.ln() + self.m * self.k
    }

    /// `β`, possibly `+∞` in floating point.
    pub fn beta(&self) -> T {
        self.ln_beta().exp()
    }

    pub fn delta(&self) -> T {
        T::one() / (self.k * self.k)
    }

    pub fn value(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        softplus(self.ln_beta() + t.ln()) / self.k
    }

    /// `ψ'(t) = 1/(K(t + 1/β))`.
    pub fn d1(&self, t: T) -> T {
        T::one() / (self.k * (t + (-self.ln_beta()).exp()))
    }

    /// `ψ'' = −K ψ'²`.
    pub fn d2(&self, t: T) -> T {
        let p = self.d1(t);
        -self.k * p * p
    }
}

/// First and second derivatives of a scalar at a point, in an orthonormal tangent frame
/// `(e1, e2)` there.
#[derive(Debug, Clone, Copy)]
struct Jet<T> {
    e1: Vec3<T>,
    e2: Vec3<T>,
    grad: [T; 2],
    hess: [[T; 2]; 2],
}

/// Quadratic least-squares fit of nodal `values` in log-map coordinates about vertex `base`
/// over its two-ring, differentiated at `at`. At the vertex itself the fit interpolates the
/// vertex value (five unknowns); elsewhere the constant is fitted too (six unknowns).
fn fit_jet<T: Real>(mesh: &SphericalMesh<T>, values: &[T], base: usize, at: Vec3<T>, sample: usize) -> Result<Jet<T>> {
    let b = mesh.vertex(base);
    let (e1, e2) = tangent_frame(b);
    let ring: Vec<usize> = mesh.k_ring(base, 2);
    let coords: Vec<(T, T)> = ring
        .iter()
        .map(|&j| {
            let u = log_map(b, mesh.vertex(j));
            (u.dot(e1), u.dot(e2))
        })
        .collect();
    let scale = coords.iter().map(|(x, y)| (*x * *x + *y * *y).sqrt()).fold(T::zero(), T::max);
    let pinned = (at - b).norm() == T::zero();
    let (needed, found) = if pinned { (5, ring.len() - 1) } else { (6, ring.len()) };
    if found < needed || scale == T::zero() {
        return Err(Error::TooFewNeighbors { sample, found, needed });
    }
    let half = lit::<T>(0.5);
    let mut rows = Vec::with_capacity(ring.len());
    let mut rhs = Vec::with_capacity(ring.len());
    for (&j, &(x, y)) in ring.iter().zip(&coords) {
        if pinned && j == base {
            continue;
        }
        let (x, y) = (x / scale, y / scale);
        let mut row = vec![x, y, half * x * x, x * y, half * y * y];
        if pinned {
            rhs.push(values[j] - values[base]);
        } else {
            row.push(T::one());
            rhs.push(values[j]);
        }
        rows.push(row);
    }
    let c = least_squares(&rows, &rhs).ok_or(Error::TooFewNeighbors { sample, found, needed })?;
    let u0 = log_map(b, at);
    let (x0, y0) = (u0.dot(e1) / scale, u0.dot(e2) / scale);
    let hess = [[c[2], c[3]], [c[3], c[4]]];
    let gx = c[0] + hess[0][0] * x0 + hess[0][1] * y0;
    let gy = c[1] + hess[1][0] * x0 + hess[1][1] * y0;
    let s2 = scale * scale;
    Ok(Jet {
        e1,
        e2,
        grad: [gx / scale, gy / scale],
        hess: [[hess[0][0] / s2, hess[0][1] / s2], [hess[1][0] / s2, hess[1][1] / s2]],
    })
}

/// `Mv − nH/y` from the gradient `(q, r)` and Hessian `(hgg, hgs, hss)` of `v` in an orthonormal
/// frame `(g, g⊥)`, where `(e_g, e_s)` are the frame components of `e`.
///
/// Uses `tr D − pᵀDp/W² = (hgg(1 + r²) + hss(1 + q²) − 2qr hgs)/W²`, which stays accurate when
/// one gradient component is huge.
#[allow(clippy::too_many_arguments)]
fn operator_residual<T: Real>(q: T, r: T, hgg: T, hgs: T, hss: T, e_g: T, e_s: T, y: T, h: T) -> T {
    let n = lit::<T>(f64::from(N));
    let w2 = T::one() + q * q + r * r;
    let w = w2.sqrt();
    let num = hgg * (T::one() + r * r) + hss * (T::one() + q * q) - lit::<T>(2.0) * q * r * hgs;
    num / (w2 * w) - n / y * (e_g * q + e_s * r) / w - n * h / y
}

/// Residual `Mv − nH/y` of a nodal field at interior vertices with boundary distance below
/// `region`, from quadratic fits. `None` when no interior vertex lies in the region. A field is
/// accepted as a supersolution when the result is at most `1e-3` times the mean edge length.
pub fn verify_supersolution<T: Real>(
    mesh: &SphericalMesh<T>,
    field: &ScalarField<T>,
    h: T,
    region: T,
) -> Result<Option<T>> {
    check_curvature(h.to_f64_lossy())?;
    field.check(mesh)?;
    let d = mesh.distance_field()?;
    let mut worst: Option<T> = None;
    for i in mesh.interior_vertices().into_iter().filter(|&i| d[i] < region) {
        let z = mesh.vertex(i);
        let jet = fit_jet(mesh, &field.values, i, z, i)?;
        let e = Vec3::up();
        let r = operator_residual(
            jet.grad[0],
            jet.grad[1],
            jet.hess[0][0],
            jet.hess[0][1],
            jet.hess[1][1],
            e.dot(jet.e1),
            e.dot(jet.e2),
            z.z,
            h,
        );
        worst = Some(worst.map_or(r, |w| w.max(r)));
    }
    Ok(worst)
}

/// Supersolution tolerance `1e-3 · (mean edge length)`.
pub fn supersolution_tolerance<T: Real>(mesh: &SphericalMesh<T>) -> T {
    lit::<T>(1e-3) * mesh.mean_edge_length()
}

/// Extremes of the residual `Mv − nH/y` over the band samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandResidual<T> {
    pub max: T,
    pub min: T,
    pub samples: usize,
}

/// Analytic distance jet of a disk at `x`: `d`, the unit gradient `g` and the curvature term
/// `D²d(g⊥, g⊥) = −cot ρ` where `ρ` is the distance to the centre.
fn disk_distance_jet<T: Real>(disk: &Disk<T>, x: Vec3<T>) -> (T, Vec3<T>, T) {
    let rho = disk.center.angle_to(x);
    let g = log_map(x, disk.center).normalized();
    (disk.radius - rho, g, -T::one() / rho.tan())
}

/// Residual of `v = φ + s ψ(d)` on the band `N_δ`, with `s = ±1`.
///
/// Samples are the points at distance `δ/4, δ/2, 3δ/4` along the interior normal of every
/// boundary vertex, together with interior vertices inside the band. Derivatives of `φ` come
/// from quadratic fits, those of `d` and `ψ` are exact.
pub fn verify_barrier<T: Real>(
    mesh: &SphericalMesh<T>,
    phi: &ScalarField<T>,
    h: T,
    psi: &Psi<T>,
    sign: T,
) -> Result<BandResidual<T>> {
    check_curvature(h.to_f64_lossy())?;
    phi.check(mesh)?;
    let disk = *mesh
        .disk()
        .ok_or_else(|| Error::InvalidMesh("band verification needs a disk domain".into()))?;
    let delta = psi.delta();
    let mut samples: Vec<(usize, Vec3<T>)> = Vec::new();
    for b in mesh.boundary_vertices() {
        let z = mesh.vertex(b);
        let normal = log_map(z, disk.center).normalized();
        for f in [0.25, 0.5, 0.75] {
            samples.push((b, exp_map(z, normal * (delta * lit(f)))));
        }
    }
    for i in mesh.interior_vertices() {
        if disk.distance_to_boundary(mesh.vertex(i)) < delta {
            samples.push((i, mesh.vertex(i)));
        }
    }
    let mut out = BandResidual { max: T::neg_infinity(), min: T::infinity(), samples: samples.len() };
    for (k, (base, x)) in samples.into_iter().enumerate() {
        let jet = fit_jet(mesh, &phi.values, base, x, k)?;
        let (t, g, curv) = disk_distance_jet(&disk, x);
        // Frame (g, g⊥) at x, expressed in the fit frame at the base vertex.
        let g2 = {
            let (a, b) = (g.dot(jet.e1), g.dot(jet.e2));
            let n = (a * a + b * b).sqrt();
            [a / n, b / n]
        };
        let s2 = [-g2[1], g2[0]];
        let dot = |u: [T; 2], v: [T; 2]| u[0] * v[0] + u[1] * v[1];
        let quad = |u: [T; 2], v: [T; 2]| {
            u[0] * (jet.hess[0][0] * v[0] + jet.hess[0][1] * v[1]) + u[1] * (jet.hess[1][0] * v[0] + jet.hess[1][1] * v[1])
        };
        let (p1, p2) = (psi.d1(t), psi.d2(t));
        let q = dot(jet.grad, g2) + sign * p1;
        let r = dot(jet.grad, s2);
        let hgg = quad(g2, g2) + sign * p2;
        let hgs = quad(g2, s2);
        let hss = quad(s2, s2) + sign * p1 * curv;
        let e = Vec3::up();
        let g_perp = x.cross(g);
        let res = operator_residual(q, r, hgg, hgs, hss, e.dot(g), e.dot(g_perp), x.z, h);
        out.max = out.max.max(res);
        out.min = out.min.min(res);
    }
    Ok(out)
}

/// Upper and lower boundary barriers with the accepted constant `K`.
#[derive(Debug, Clone)]
pub struct BarrierPair<T> {
    pub upper: ScalarField<T>,
    pub lower: ScalarField<T>,
    pub k: T,
    pub ln_beta: T,
    pub beta: T,
    pub delta: T,
    /// `2 sup |φ|`.
    pub m: T,
    /// Largest residual of the upper barrier on the band (must be `≤ tolerance`).
    pub upper_residual: T,
    /// Smallest residual of the lower barrier on the band (must be `≥ −tolerance`).
    pub lower_residual: T,
    pub tolerance: T,
}

impl<T: Real> BarrierPair<T> {
    pub fn psi(&self) -> Psi<T> {
        Psi::new(self.k, self.m)
    }

    pub fn record(&self) -> Record {
        let mut r = Record::new();
        r.push("K", self.k)
            .push("ln_beta", self.ln_beta)
            .push("delta", self.delta)
            .push("M", self.m)
            .push("upper_residual", self.upper_residual)
            .push("lower_residual", self.lower_residual)
            .push("tolerance", self.tolerance);
        r
    }
}

pub const K_START: f64 = 16.0;
pub const K_MAX: f64 = 1_048_576.0;

/// Build `φ ± ψ(d)` and search `K = 16, 32, …, 2^20` until both barriers verify on the band.
/// Outside the band the fields are extended by `sup_∂ φ + ψ(δ)` and `inf_∂ φ − ψ(δ)`.
pub fn boundary_barriers<T: Real>(
    mesh: &SphericalMesh<T>,
    phi: &ScalarField<T>,
    h: T,
    margin_required: T,
) -> Result<BarrierPair<T>> {
    phi.check(mesh)?;
    let cone = cone_mean_curvature(mesh, h)?;
    if !(cone.margin > T::zero() && cone.margin >= margin_required) {
        return Err(Error::SolvabilityViolated {
            margin: cone.margin.to_f64_lossy(),
            required: margin_required.to_f64_lossy(),
        });
    }
    let disk = *mesh
        .disk()
        .ok_or_else(|| Error::InvalidMesh("boundary barriers need a disk domain".into()))?;
    let m = lit::<T>(2.0) * phi.max_abs();
    let tol = supersolution_tolerance(mesh);
    let boundary = mesh.boundary_vertices();
    let sup = boundary.iter().map(|&i| phi.values[i]).fold(T::neg_infinity(), T::max);
    let inf = boundary.iter().map(|&i| phi.values[i]).fold(T::infinity(), T::min);
    let mut k = lit::<T>(K_START);
    let mut last = T::infinity();
    while k <= lit(K_MAX) {
        let psi = Psi::new(k, m);
        let up = verify_barrier(mesh, phi, h, &psi, T::one())?;
        let lo = verify_barrier(mesh, phi, h, &psi, -T::one())?;
        if up.max <= tol && lo.min >= -tol {
            let delta = psi.delta();
            let cap = psi.value(delta);
            let (mut upper, mut lower) = (Vec::new(), Vec::new());
            for (i, z) in mesh.vertices().iter().enumerate() {
                let d = if mesh.is_boundary(i) { T::zero() } else { disk.distance_to_boundary(*z) };
                if d < delta {
                    upper.push(phi.values[i] + psi.value(d));
                    lower.push(phi.values[i] - psi.value(d));
                } else {
                    upper.push(sup + cap);
                    lower.push(inf - cap);
                }
            }
            return Ok(BarrierPair {
                upper: ScalarField::new(upper, FieldRole::Barrier),
                lower: ScalarField::new(lower, FieldRole::Barrier),
                k,
                ln_beta: psi.ln_beta(),
                beta: psi.beta(),
                delta,
                m,
                upper_residual: up.max,
                lower_residual: lo.min,
                tolerance: tol,
            });
        }
        last = up.max.max(-lo.min);
        k *= lit(2.0);
    }
    Err(Error::BarrierSearchFailed { k_max: K_MAX, last_residual: last.to_f64_lossy() })
}
