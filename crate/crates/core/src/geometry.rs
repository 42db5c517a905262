//! Radial graphs `X = e^{v(z)} z` over the upper hemisphere and their hyperbolic mean curvature.
//!
//! Normals follow the Euclidean outward convention `ν = (z − ∇v)/W`, `W = √(1+|∇v|²)`. With it
//! the sphere of Euclidean radius `R` centred at `−HR e` has hyperbolic mean curvature `H` for
//! either sign of `H`, and the hemispheres `v ≡ c` have curvature zero.

use crate::error::{check_curvature, Error, Result};
use crate::field::{check_values, FieldRole, ScalarField};
use crate::mesh::SphericalMesh;
use crate::scalar::{lit, Real};
use crate::vec3::Vec3;

/// The equidistant-sphere solutions `v*(z) = c + log(√(H²y² + 1 − H²) − Hy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution<T> {
    pub h: T,
    pub c: T,
}

impl<T: Real> ExactSolution<T> {
    pub fn new(h: T, c: T) -> Result<Self> {
        check_curvature(h.to_f64_lossy())?;
        Ok(Self { h, c })
    }

    /// The member whose trace on the equator `y = 0` vanishes: `c = −log √(1 − H²)`.
    pub fn vanishing_at_equator(h: T) -> Result<Self> {
        check_curvature(h.to_f64_lossy())?;
        let c = -(T::one() - h * h).sqrt().ln();
        Ok(Self { h, c })
    }

    fn root(&self, y: T) -> T {
        (self.h * self.h * y * y + T::one() - self.h * self.h).sqrt()
    }

    /// Value at height `y`.
    pub fn at_height(&self, y: T) -> T {
        // √(H²y²+1−H²) − Hy written as (1−H²)/(√(·)+Hy) when Hy > 0 avoids cancellation.
        let r = self.root(y);
        let hy = self.h * y;
        let arg = if hy > T::zero() { (T::one() - self.h * self.h) / (r + hy) } else { r - hy };
        self.c + arg.ln()
    }

    /// `dv*/dy = −H / √(H²y² + 1 − H²)`.
    pub fn d_dy(&self, y: T) -> T {
        -self.h / self.root(y)
    }

    /// Value at colatitude `θ` (so `y = cos θ`).
    pub fn at_colatitude(&self, theta: T) -> T {
        self.at_height(theta.cos())
    }

    /// `dv*/dθ = H sin θ / √(1 − H² sin²θ)`.
    pub fn d_dtheta(&self, theta: T) -> T {
        let s = theta.sin();
        self.h * s / (T::one() - self.h * self.h * s * s).sqrt()
    }

    /// Spherical gradient at `z`: `v*'(y) (e − y z)`.
    pub fn gradient(&self, z: Vec3<T>) -> Vec3<T> {
        (Vec3::up() - z * z.z) * self.d_dy(z.z)
    }

    /// `W = √(1 + |∇v*|²)` at `z`.
    pub fn w(&self, z: Vec3<T>) -> T {
        let g = self.d_dy(z.z);
        (T::one() + g * g * (T::one() - z.z * z.z)).sqrt()
    }

    /// Vertical component `ν·e = (y − v*'(y)(1 − y²))/W` of the outward normal.
    pub fn normal_vertical(&self, z: Vec3<T>) -> T {
        let y = z.z;
        (y - self.d_dy(y) * (T::one() - y * y)) / self.w(z)
    }

    pub fn eval(&self, mesh: &SphericalMesh<T>) -> ScalarField<T> {
        ScalarField::new(mesh.vertices().iter().map(|z| self.at_height(z.z)).collect(), FieldRole::LogHeight)
    }
}

/// Piecewise-constant gradient of a nodal field on each triangle.
pub fn triangle_gradients<T: Real>(mesh: &SphericalMesh<T>, v: &[T]) -> Vec<Vec3<T>> {
    mesh.triangles()
        .iter()
        .zip(mesh.geometry())
        .map(|(t, g)| g.grad[0] * v[t[0]] + g.grad[1] * v[t[1]] + g.grad[2] * v[t[2]])
        .collect()
}

/// Vertex gradients: spherical-area weighted mean of the incident triangle gradients, projected
/// onto the tangent plane at the vertex.
pub fn vertex_gradients<T: Real>(mesh: &SphericalMesh<T>, v: &[T]) -> Vec<Vec3<T>> {
    let tg = triangle_gradients(mesh, v);
    (0..mesh.n_vertices())
        .map(|i| {
            let mut acc = Vec3::zero();
            let mut area = T::zero();
            for &t in mesh.vertex_triangles(i) {
                let a = mesh.geometry()[t].area;
                acc += tg[t] * a;
                area += a;
            }
            (acc / area).reject(mesh.vertex(i))
        })
        .collect()
}

/// `W = √(1 + |∇v|²)` at each vertex.
pub fn w_field<T: Real>(mesh: &SphericalMesh<T>, v: &ScalarField<T>) -> Result<ScalarField<T>> {
    v.check(mesh)?;
    let g = vertex_gradients(mesh, &v.values);
    Ok(ScalarField::new(g.iter().map(|g| (T::one() + g.norm2()).sqrt()).collect(), FieldRole::Other))
}

/// Outward unit normal `ν = (z − ∇v)/W` of the radial graph at each vertex.
pub fn outward_normals<T: Real>(mesh: &SphericalMesh<T>, v: &ScalarField<T>) -> Result<Vec<Vec3<T>>> {
    v.check(mesh)?;
    let g = vertex_gradients(mesh, &v.values);
    Ok(mesh
        .vertices()
        .iter()
        .zip(&g)
        .map(|(z, g)| {
            let n = *z - *g;
            n / n.norm()
        })
        .collect())
}

/// Hyperbolic from Euclidean principal or mean curvature: `u κ̃ + ν^{n+1}`.
pub fn curvature_convert<T: Real>(u: T, kappa_e: T, nu_vertical: T) -> Result<T> {
    if !(u > T::zero()) {
        return Err(Error::InvalidDomain(format!("u = {u} must be positive")));
    }
    Ok(u * kappa_e + nu_vertical)
}

/// Per-vertex hyperbolic mean curvature of the radial graph of `v` (n = 2).
///
/// The graph is embedded as `X_i = e^{v_i} z_i`. The Euclidean mean curvature is
/// `H_E = ½ ΔX·ν` with the cotangent Laplacian over mixed Voronoi areas, and the hyperbolic value
/// is `u H_E + ν·e` with `u = X·e`. Boundary vertices, where the one-ring is incomplete, take the
/// mean of their interior neighbours.
pub fn hyperbolic_mean_curvature<T: Real>(mesh: &SphericalMesh<T>, v: &ScalarField<T>) -> Result<ScalarField<T>> {
    v.check(mesh)?;
    let nv = mesh.n_vertices();
    let x: Vec<Vec3<T>> = mesh.vertices().iter().zip(&v.values).map(|(z, &vi)| *z * vi.exp()).collect();
    let normals = outward_normals(mesh, v)?;
    let half = lit::<T>(0.5);
    let mut lap = vec![Vec3::zero(); nv];
    let mut area = vec![T::zero(); nv];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = [x[tri[0]], x[tri[1]], x[tri[2]]];
        let twice = (p[1] - p[0]).cross(p[2] - p[0]).norm();
        if twice * half < lit(1e-14) {
            return Err(Error::DegenerateTriangle { triangle: t, area: (twice * half).to_f64_lossy() });
        }
        let mut cot = [T::zero(); 3];
        for k in 0..3 {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            cot[k] = (b - a).dot(c - a) / twice;
        }
        for k in 0..3 {
            // Edge opposite corner k joins corners k+1 and k+2.
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let w = cot[k] * half;
            lap[i] += (x[j] - x[i]) * w;
            lap[j] += (x[i] - x[j]) * w;
        }
        let obtuse = (0..3).find(|&k| cot[k] < T::zero());
        let tri_area = twice * half;
        match obtuse {
            None => {
                for k in 0..3 {
                    let (b, c) = ((k + 1) % 3, (k + 2) % 3);
                    let lb = (p[c] - p[k]).norm2();
                    let lc = (p[b] - p[k]).norm2();
                    area[tri[k]] += (lb * cot[b] + lc * cot[c]) / lit(8.0);
                }
            }
            Some(o) => {
                for k in 0..3 {
                    area[tri[k]] += if k == o { tri_area * half } else { tri_area * lit(0.25) };
                }
            }
        }
    }
    let mut h = vec![T::zero(); nv];
    for i in mesh.interior_vertices() {
        let delta = lap[i] / area[i];
        let he = delta.dot(normals[i]) * half;
        let u = x[i].z;
        h[i] = curvature_convert(u, he, normals[i].z)?;
    }
    for i in mesh.boundary_vertices() {
        let inner: Vec<usize> = mesh.neighbors(i).iter().copied().filter(|&j| !mesh.is_boundary(j)).collect();
        if !inner.is_empty() {
            h[i] = inner.iter().map(|&j| h[j]).sum::<T>() / T::from_usize(inner.len()).unwrap();
        }
    }
    check_values(&h, nv)?;
    Ok(ScalarField::new(h, FieldRole::Curvature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec};

    fn cap(eps: f64, level: u32) -> SphericalMesh<f64> {
        build_mesh(&DomainSpec::cap(eps, level)).unwrap()
    }

    #[test]
    fn exact_solution_special_values() {
        for h in [-0.7f64, -0.2, 0.3, 0.5, 0.9] {
            let s = ExactSolution::new(h, 0.0).unwrap();
            assert!((s.at_height(1.0) - (1.0 - h).ln()).abs() < 1e-15);
        }
        let s = ExactSolution::new(0.0, 0.25).unwrap();
        assert_eq!(s.at_height(0.3), 0.25);
        let s = ExactSolution::new(0.5, 0.0).unwrap();
        let direct = ((0.25f64 * 0.36 + 0.75).sqrt() - 0.3).ln();
        assert!((s.at_height(0.6) - direct).abs() < 1e-15);
        assert!(ExactSolution::new(1.0, 0.0).is_err());
        assert!(ExactSolution::new(-1.2, 0.0).is_err());
    }

    #[test]
    fn exact_solution_is_the_shifted_sphere() {
        // e^{v*} z lies on the unit sphere centred at -H e.
        let s = ExactSolution::new(-0.4, 0.0).unwrap();
        for y in [0.05f64, 0.3, 0.7, 1.0] {
            let r = s.at_height(y).exp();
            let z = Vec3::new((1.0 - y * y).sqrt(), 0.0, y);
            let p = z * r + Vec3::up() * (-0.4);
            assert!((p.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = ExactSolution::new(0.6, 0.1).unwrap();
        let step = 1e-6;
        for t in [0.2f64, 0.7, 1.2] {
            let fd = (s.at_colatitude(t + step) - s.at_colatitude(t - step)) / (2.0 * step);
            assert!((fd - s.d_dtheta(t)).abs() < 1e-8);
            let y = t.cos();
            let fd = (s.at_height(y + step) - s.at_height(y - step)) / (2.0 * step);
            assert!((fd - s.d_dy(y)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_field_has_radial_normal() {
        let m = cap(0.4, 3);
        let v = ScalarField::constant(m.n_vertices(), 0.7, FieldRole::LogHeight);
        let n = outward_normals(&m, &v).unwrap();
        for (z, n) in m.vertices().iter().zip(&n) {
            assert!((*z - *n).norm() < 1e-12);
        }
    }

    #[test]
    fn normals_are_unit_and_match_closed_form() {
        let s = ExactSolution::new(0.5, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for level in [3, 4, 5] {
            let m = cap(0.3, level);
            let n = outward_normals(&m, &s.eval(&m)).unwrap();
            let mut err = 0.0f64;
            for (i, z) in m.vertices().iter().enumerate() {
                assert!((n[i].norm() - 1.0).abs() < 1e-12);
                err = err.max((n[i].z - s.normal_vertical(*z)).abs());
            }
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 5e-3, "normal error {prev}");
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(curvature_convert(1.0, 0.0, 0.3).unwrap(), 0.3);
        // Sphere of radius rho about the origin: u = rho y, kappa = -1/rho, nu_vert = y.
        let (rho, y) = (2.5f64, 0.37f64);
        assert!(curvature_convert(rho * y, -1.0 / rho, y).unwrap().abs() < 1e-15);
        assert!(curvature_convert(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hemisphere_is_totally_geodesic() {
        let m = cap(0.3, 5);
        let v = ScalarField::constant(m.n_vertices(), 0.4, FieldRole::LogHeight);
        let h = hyperbolic_mean_curvature(&m, &v).unwrap();
        let worst = m.interior_vertices().iter().fold(0.0f64, |a, &i| a.max(h.values[i].abs()));
        assert!(worst <= 1e-2, "max |H| = {worst}");
    }

    #[test]
    fn exact_solutions_have_their_curvature() {
        for hv in [0.5f64, -0.7] {
            let s = ExactSolution::new(hv, 0.0).unwrap();
            let mut prev = f64::INFINITY;
            for level in [3, 4, 5] {
                let m = cap(0.3, level);
                let h = hyperbolic_mean_curvature(&m, &s.eval(&m)).unwrap();
                let err = m.interior_vertices().iter().fold(0.0f64, |a, &i| a.max((h.values[i] - hv).abs()));
                assert!(err < prev, "H = {hv}: no improvement at level {level}");
                prev = err;
            }
            assert!(prev <= 1e-2, "H = {hv}: error {prev}");
        }
    }

    #[test]
    fn curvature_is_scale_invariant() {
        let m = cap(0.4, 4);
        let s = ExactSolution::new(0.3, 0.0).unwrap();
        let v = s.eval(&m);
        let mut shifted = v.clone();
        shifted.values.iter_mut().for_each(|x| *x += 1.3);
        let a = hyperbolic_mean_curvature(&m, &v).unwrap();
        let b = hyperbolic_mean_curvature(&m, &shifted).unwrap();
        for i in m.interior_vertices() {
            assert!((a.values[i] - b.values[i]).abs() < 1e-10);
        }
    }
}
