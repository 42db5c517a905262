//! The discrete energy `I(v) = A(v) + nH V(v)` for piecewise-linear `v`.
//!
//! `A(v) = ∫ √(1+|∇v|²) y^{-n}` and `V(v) = ∫ v y^{-(n+1)}`. On each triangle the gradient is
//! constant, so `A` is a sum of `a_t W_t` with `a_t = ∫_t y^{-n}`, and `V` is linear in the nodal
//! values with coefficients `∫_t φ_k y^{-(n+1)}`. Both weight integrals use a degree-4 rule with
//! points projected onto the sphere and the spherical triangle area.

use crate::error::{check_curvature, Result};
use crate::field::check_values;
use crate::mesh::{SphericalMesh, TriangleGeometry, QUADRATURE};
use crate::record::Record;
use crate::scalar::{lit, Real};
use crate::sparse::CsrMatrix;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub area: T,
    pub volume: T,
    pub penalty: T,
    pub total: T,
    pub n: u32,
    pub h: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn new(area: T, volume: T, penalty: T, n: u32, h: T) -> Self {
        let total = area + nh(n, h) * volume + penalty;
        Self { area, volume, penalty, total, n, h }
    }

    pub fn record(&self) -> Record {
        let mut r = Record::new();
        r.push("area", self.area)
            .push("volume", self.volume)
            .push("penalty", self.penalty)
            .push("total", self.total)
            .push("n", self.n)
            .push("H", self.h);
        r
    }
}

#[inline]
pub(crate) fn nh<T: Real>(n: u32, h: T) -> T {
    T::from_u32(n).unwrap() * h
}

#[inline]
fn ipow<T: Real>(y: T, n: u32) -> T {
    y.powi(-(n as i32))
}


/// `∫_t y^{-n}` by the degree-4 rule.
fn tri_weight<T: Real>(g: &TriangleGeometry<T>, n: u32) -> T {
    let mut s = T::zero();
    for ((_, w), y) in QUADRATURE.iter().zip(g.quad_heights) {
        s += lit::<T>(*w) * ipow(y, n);
    }
    g.area * s
}

/// `∫_t φ_k y^{-(n+1)}` for the three hat functions `φ_k`.
fn tri_volume<T: Real>(g: &TriangleGeometry<T>, n: u32) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for ((l, w), y) in QUADRATURE.iter().zip(g.quad_heights) {
        let q = g.area * lit::<T>(*w) * ipow(y, n + 1);
        for k in 0..3 {
            out[k] += q * lit(l[k]);
        }
    }
    out
}

/// `∫ y^{-n}` over the mesh: the area functional of any constant field.
pub fn weighted_area<T: Real>(mesh: &SphericalMesh<T>, n: u32) -> T {
    mesh.geometry().iter().map(|g| tri_weight(g, n)).sum()
}

/// `k = ∫ y^{-(n+1)}`, the volume functional of `v ≡ 1`.
pub fn volume_weight<T: Real>(mesh: &SphericalMesh<T>, n: u32) -> T {
    weighted_area(mesh, n + 1)
}

/// Lumped volume coefficients `∂V/∂v_i`.
pub fn volume_coefficients<T: Real>(mesh: &SphericalMesh<T>, n: u32) -> Vec<T> {
    let mut m = vec![T::zero(); mesh.n_vertices()];
    for (tri, g) in mesh.triangles().iter().zip(mesh.geometry()) {
        let w = tri_volume(g, n);
        for k in 0..3 {
            m[tri[k]] += w[k];
        }
    }
    m
}

fn triangle_gradient<T: Real>(grad: &[Vec3<T>; 3], tri: &[usize; 3], v: &[T]) -> Vec3<T> {
    grad[0] * v[tri[0]] + grad[1] * v[tri[1]] + grad[2] * v[tri[2]]
}

/// Area, volume and total energy of `v` (no boundary penalty).
pub fn assemble_energy<T: Real>(mesh: &SphericalMesh<T>, v: &[T], n: u32, h: T) -> Result<EnergyBreakdown<T>> {
    check_curvature(h.to_f64_lossy())?;
    check_values(v, mesh.n_vertices())?;
    Ok(energy_unchecked(mesh, v, n, h))
}

pub(crate) fn energy_unchecked<T: Real>(mesh: &SphericalMesh<T>, v: &[T], n: u32, h: T) -> EnergyBreakdown<T> {
    let mut area = T::zero();
    let mut volume = T::zero();
    for (tri, g) in mesh.triangles().iter().zip(mesh.geometry()) {
        let p = triangle_gradient(&g.grad, tri, v);
        area += tri_weight(g, n) * (T::one() + p.norm2()).sqrt();
        let q = tri_volume(g, n);
        volume += q[0] * v[tri[0]] + q[1] * v[tri[1]] + q[2] * v[tri[2]];
    }
    EnergyBreakdown::new(area, volume, T::zero(), n, h)
}

/// Exact gradient of [`assemble_energy`]'s total with respect to the nodal values.
pub fn assemble_gradient<T: Real>(mesh: &SphericalMesh<T>, v: &[T], n: u32, h: T) -> Vec<T> {
    let c = nh(n, h);
    let mut out = vec![T::zero(); mesh.n_vertices()];
    for (tri, g) in mesh.triangles().iter().zip(mesh.geometry()) {
        let p = triangle_gradient(&g.grad, tri, v);
        let w = (T::one() + p.norm2()).sqrt();
        let a = tri_weight(g, n);
        let q = tri_volume(g, n);
        for k in 0..3 {
            out[tri[k]] += a * p.dot(g.grad[k]) / w + c * q[k];
        }
    }
    out
}

/// Exact Hessian of the energy. It does not depend on `H` because the volume term is linear.
pub fn assemble_hessian<T: Real>(mesh: &SphericalMesh<T>, v: &[T], n: u32) -> CsrMatrix<T> {
    let mut m = CsrMatrix::from_mesh_pattern(mesh);
    for (tri, g) in mesh.triangles().iter().zip(mesh.geometry()) {
        let p = triangle_gradient(&g.grad, tri, v);
        let w2 = T::one() + p.norm2();
        let w = w2.sqrt();
        let a = tri_weight(g, n);
        // a ∇φ_iᵀ (I/W − p pᵀ/W³) ∇φ_j
        for i in 0..3 {
            let gi = g.grad[i];
            for j in 0..3 {
                let gj = g.grad[j];
                let val = a * (gi.dot(gj) - gi.dot(p) * gj.dot(p) / w2) / w;
                m.add(tri[i], tri[j], val);
            }
        }
    }
    m
}

/// Per boundary vertex, half the total length of its two boundary edges times `y^{-n}`: the
/// trapezoidal weights of the boundary integral.
pub fn boundary_weights<T: Real>(mesh: &SphericalMesh<T>, n: u32) -> Vec<T> {
    let half = lit::<T>(0.5);
    let mut w = vec![T::zero(); mesh.n_vertices()];
    for (a, b) in mesh.boundary_edges() {
        let l = mesh.vertex(a).angle_to(mesh.vertex(b)) * half;
        w[a] += l;
        w[b] += l;
    }
    for (i, wi) in w.iter_mut().enumerate() {
        *wi *= ipow(mesh.height(i), n);
    }
    w
}

/// Trapezoidal approximation of `∫_{∂Ω} |v − φ| y^{-n}`. `phi` is indexed by vertex; only its
/// boundary entries are read.
pub fn boundary_penalty<T: Real>(mesh: &SphericalMesh<T>, v: &[T], phi: &[T], n: u32) -> T {
    boundary_weights(mesh, n)
        .iter()
        .enumerate()
        .filter(|(i, _)| mesh.is_boundary(*i))
        .map(|(i, w)| *w * (v[i] - phi[i]).abs())
        .sum()
}

/// Energy including the boundary penalty of the relaxed Dirichlet functional.
pub fn assemble_penalized<T: Real>(
    mesh: &SphericalMesh<T>,
    v: &[T],
    phi: &[T],
    n: u32,
    h: T,
) -> Result<EnergyBreakdown<T>> {
    let e = assemble_energy(mesh, v, n, h)?;
    Ok(EnergyBreakdown::new(e.area, e.volume, boundary_penalty(mesh, v, phi, n), n, h))
}
