//! Geodesic distance to the mesh boundary by fast marching.
//!
//! Vertices are accepted in increasing order of distance as in Dijkstra's algorithm. A vertex is
//! updated from every accepted neighbour along the edge (edge-length weight) and, for each incident
//! triangle with two accepted corners, by the one-ring unfolding update: the triangle is laid flat
//! with its geodesic side lengths and the linear function with unit gradient through the two known
//! values is extrapolated to the third corner, provided the characteristic enters through the
//! opposite edge. The unfolding removes the metrication error of pure graph distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SphericalMesh;
use crate::error::{Error, Result};
use crate::field::{FieldRole, ScalarField};
use crate::scalar::Real;

struct Entry<T> {
    d: T,
    v: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Real> Eq for Entry<T> {}
impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Entry<T> {
    // Reversed so that BinaryHeap pops the smallest distance; ties by index for determinism.
    fn cmp(&self, o: &Self) -> Ordering {
        o.d.partial_cmp(&self.d).unwrap_or(Ordering::Equal).then_with(|| o.v.cmp(&self.v))
    }
}

/// Geodesic distance from every vertex to the boundary, zero on boundary vertices.
pub fn boundary_distance<T: Real>(mesh: &SphericalMesh<T>) -> Result<ScalarField<T>> {
    let nv = mesh.n_vertices();
    let mut d = vec![T::infinity(); nv];
    let mut done = vec![false; nv];
    let mut heap = BinaryHeap::new();
    for i in mesh.boundary_vertices() {
        d[i] = T::zero();
        heap.push(Entry { d: T::zero(), v: i });
    }
    if heap.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let len = |a: usize, b: usize| mesh.vertex(a).angle_to(mesh.vertex(b));

    while let Some(Entry { d: da, v: a }) = heap.pop() {
        if done[a] || da > d[a] {
            continue;
        }
        done[a] = true;
        for &c in mesh.neighbors(a) {
            if done[c] {
                continue;
            }
            let mut best = da + len(a, c);
            for &t in mesh.vertex_triangles(c) {
                let tri = mesh.triangles()[t];
                if !tri.contains(&a) {
                    continue;
                }
                let b = tri.iter().copied().find(|&x| x != a && x != c).unwrap();
                if !done[b] {
                    continue;
                }
                if let Some(cand) = unfold(da, d[b], len(a, b), len(a, c), len(b, c)) {
                    best = best.min(cand);
                }
            }
            if best < d[c] {
                d[c] = best;
                heap.push(Entry { d: best, v: c });
            }
        }
    }
    if let Some(i) = d.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidMesh(format!("vertex {i} is not connected to the boundary")));
    }
    Ok(ScalarField::new(d, FieldRole::Distance))
}

/// Planar-front update for corner C of a triangle with known values at A and B.
/// `lab`, `lac`, `lbc` are side lengths.
fn unfold<T: Real>(da: T, db: T, lab: T, lac: T, lbc: T) -> Option<T> {
    let two = T::one() + T::one();
    let cx = (lac * lac + lab * lab - lbc * lbc) / (two * lab);
    let cy2 = lac * lac - cx * cx;
    if cy2 <= T::zero() {
        return None;
    }
    let cy = cy2.sqrt();
    let gx = (db - da) / lab;
    if gx.abs() >= T::one() {
        return None;
    }
    let gy = (T::one() - gx * gx).sqrt();
    let dc = da + gx * cx + gy * cy;
    // Foot of the characteristic through C on the line AB.
    let foot = cx - gx * cy / gy;
    if foot < T::zero() || foot > lab || dc < da.max(db) {
        return None;
    }
    Some(dc)
}
