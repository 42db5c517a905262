//! Triangulated subdomains of the upper unit hemisphere.
//!
//! Every domain built here is a geodesic disk: a cap `{y > eps}` is the disk of radius
//! `acos(eps)` about the north pole. Meshes start from a six-triangle fan and are refined by
//! midpoint subdivision, with interior midpoints pushed radially onto the sphere and boundary
//! midpoints snapped onto the exact boundary circle.

mod build;
mod distance;
mod io;

use std::collections::HashMap;

pub use build::{build_mesh, refine, DomainKind, DomainSpec};
pub use distance::boundary_distance;
pub use io::{read_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::vec3::{spherical_triangle_area, Vec3};

/// A closed geodesic disk `{z : dist(z, center) <= radius}` on the unit sphere.
#[derive(Debug, Clone, Copy)]
pub struct Disk<T> {
    pub center: Vec3<T>,
    pub radius: T,
}

impl<T: Real> Disk<T> {
    /// Nearest point of the boundary circle to `p` (for `p` away from the center).
    pub fn snap_to_boundary(&self, p: Vec3<T>) -> Vec3<T> {
        let t = p.reject(self.center).normalized();
        (self.center * self.radius.cos() + t * self.radius.sin()).normalized()
    }

    /// Geodesic distance from `p` to the boundary circle, for `p` inside the disk.
    pub fn distance_to_boundary(&self, p: Vec3<T>) -> T {
        (self.radius - self.center.angle_to(p)).max(T::zero())
    }

    /// Smallest height `y` over the closed disk.
    pub fn min_height(&self) -> T {
        let polar = self.center.z.max(-T::one()).min(T::one()).acos();
        (polar + self.radius).cos()
    }
}

/// Mesh edge with its one or two incident triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: [usize; 2],
    pub tris: [usize; 2],
    pub boundary: bool,
}

/// Per-triangle quantities reused by every assembly routine.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry<T> {
    /// Spherical (geodesic) area.
    pub area: T,
    /// Normalized centroid, a point on the sphere.
    pub centroid: Vec3<T>,
    /// Gradients of the three linear hat functions on the flat chord triangle.
    pub grad: [Vec3<T>; 3],
    /// Heights `y` of the [`QUADRATURE`] points, projected radially onto the sphere.
    pub quad_heights: [T; 6],
}

/// Symmetric degree-4 triangle rule: barycentric coordinates and weights summing to one.
pub const QUADRATURE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const B: f64 = 0.091_576_213_509_771;
    const WA: f64 = 0.223_381_589_678_011;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

#[derive(Debug, Clone)]
pub struct SphericalMesh<T> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    loops: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
    geometry: Vec<TriangleGeometry<T>>,
    disk: Option<Disk<T>>,
    level: u32,
}

impl<T: Real> SphericalMesh<T> {
    /// Assemble a mesh from raw parts, deriving topology and checking the invariants.
    pub fn from_parts(
        vertices: Vec<Vec3<T>>,
        triangles: Vec<[usize; 3]>,
        disk: Option<Disk<T>>,
        level: u32,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} has invalid indices {tri:?}")));
            }
        }

        // Directed half-edges -> triangle.
        let mut half: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if half.insert((a, b), t).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "directed edge ({a},{b}) used twice; orientation inconsistent or non-manifold"
                    )));
                }
            }
        }

        let mut edges = Vec::new();
        let mut boundary = vec![false; nv];
        let mut next_on_boundary: HashMap<usize, usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                match half.get(&(b, a)) {
                    Some(&u) => {
                        if a < b {
                            edges.push(Edge { v: [a, b], tris: [t, u], boundary: false });
                        }
                    }
                    None => {
                        edges.push(Edge { v: [a.min(b), a.max(b)], tris: [t, t], boundary: true });
                        boundary[a] = true;
                        boundary[b] = true;
                        if next_on_boundary.insert(a, b).is_some() {
                            return Err(Error::InvalidMesh(format!("boundary pinches at vertex {a}")));
                        }
                    }
                }
            }
        }

        // Chain directed boundary edges into loops; interior lies to the left.
        let mut loops = Vec::new();
        let mut starts: Vec<usize> = next_on_boundary.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = vec![false; nv];
        for s in starts {
            if seen[s] {
                continue;
            }
            let mut lp = vec![s];
            seen[s] = true;
            let mut cur = next_on_boundary[&s];
            while cur != s {
                if seen[cur] {
                    return Err(Error::InvalidMesh("boundary loop is not simple".into()));
                }
                seen[cur] = true;
                lp.push(cur);
                cur = *next_on_boundary
                    .get(&cur)
                    .ok_or_else(|| Error::InvalidMesh("open boundary chain".into()))?;
            }
            loops.push(lp);
        }

        let mut neighbors = vec![Vec::new(); nv];
        for e in &edges {
            neighbors[e.v[0]].push(e.v[1]);
            neighbors[e.v[1]].push(e.v[0]);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                vertex_triangles[i].push(t);
            }
        }

        let geometry = triangles
            .iter()
            .map(|tri| triangle_geometry(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]))
            .collect();

        let mesh = Self {
            vertices,
            triangles,
            boundary,
            loops,
            edges,
            neighbors,
            vertex_triangles,
            geometry,
            disk,
            level,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks unit norms, positive heights and non-degenerate triangles.
    pub fn validate(&self) -> Result<()> {
        let tol = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
        for (i, v) in self.vertices.iter().enumerate() {
            if (v.norm() - T::one()).abs() > tol {
                return Err(Error::InvalidMesh(format!("vertex {i} is off the unit sphere")));
            }
            if v.z <= T::zero() {
                return Err(Error::InvalidMesh(format!("vertex {i} has y <= 0")));
            }
        }
        for (t, g) in self.geometry.iter().enumerate() {
            if !(g.area > T::zero()) {
                return Err(Error::InvalidMesh(format!("triangle {t} has zero area")));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3<T> {
        self.vertices[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn geometry(&self) -> &[TriangleGeometry<T>] {
        &self.geometry
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted one-ring of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn vertex_triangles(&self, i: usize) -> &[usize] {
        &self.vertex_triangles[i]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&i| self.boundary[i]).collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Boundary loops as ordered vertex lists, oriented with the domain on the left.
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    /// Directed boundary edges in loop order.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        self.loops
            .iter()
            .flat_map(|lp| (0..lp.len()).map(move |k| (lp[k], lp[(k + 1) % lp.len()])))
            .collect()
    }

    pub fn disk(&self) -> Option<&Disk<T>> {
        self.disk.as_ref()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Height `y = z·e` of vertex `i`.
    pub fn height(&self, i: usize) -> T {
        self.vertices[i].z
    }

    pub fn heights(&self) -> Vec<T> {
        self.vertices.iter().map(|v| v.z).collect()
    }

    /// Sum of spherical triangle areas.
    pub fn total_area(&self) -> T {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Mean geodesic edge length, used as the discretization scale.
    pub fn mean_edge_length(&self) -> T {
        let s: T = self
            .edges
            .iter()
            .map(|e| self.vertices[e.v[0]].angle_to(self.vertices[e.v[1]]))
            .sum();
        s / T::from_usize(self.edges.len()).unwrap()
    }

    pub fn max_edge_length(&self) -> T {
        self.edges
            .iter()
            .map(|e| self.vertices[e.v[0]].angle_to(self.vertices[e.v[1]]))
            .fold(T::zero(), T::max)
    }

    /// Vertices within `rings` edge hops of `i`, including `i`, in breadth-first order.
    pub fn k_ring(&self, i: usize, rings: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut frontier = vec![i];
        for _ in 0..rings {
            let mut next = Vec::new();
            for &f in &frontier {
                for &n in &self.neighbors[f] {
                    if !out.contains(&n) {
                        out.push(n);
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Lumped (one third per incident triangle) spherical area at each vertex.
    pub fn lumped_area(&self) -> Vec<T> {
        let third = T::one() / lit(3.0);
        let mut m = vec![T::zero(); self.n_vertices()];
        for (tri, g) in self.triangles.iter().zip(&self.geometry) {
            for &i in tri {
                m[i] += g.area * third;
            }
        }
        m
    }

    /// Exact geodesic distance to the boundary circle when the domain is known.
    pub fn exact_boundary_distance(&self) -> Option<Vec<T>> {
        let disk = self.disk?;
        Some(
            (0..self.n_vertices())
                .map(|i| if self.boundary[i] { T::zero() } else { disk.distance_to_boundary(self.vertices[i]) })
                .collect(),
        )
    }

    /// Boundary distance, exact for built disks and the marching scheme otherwise.
    pub fn distance_field(&self) -> Result<Vec<T>> {
        match self.exact_boundary_distance() {
            Some(d) => Ok(d),
            None => boundary_distance(self).map(|f| f.values),
        }
    }

    /// Index of the vertex closest to `p`.
    pub fn nearest_vertex(&self, p: Vec3<T>) -> usize {
        let mut best = (0, T::infinity());
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (*v - p).norm2();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Locate `p` in a triangle and return barycentric weights (by radial projection onto the
    /// chord plane). Returns `None` if `p` lies outside the mesh.
    pub fn locate(&self, p: Vec3<T>) -> Option<(usize, [T; 3])> {
        // Triangles around the nearest vertex and its neighbours first, then everything.
        let near = self.nearest_vertex(p);
        let local = self.k_ring(near, 1).into_iter().flat_map(|i| self.vertex_triangles[i].iter().copied());
        local
            .chain(0..self.triangles.len())
            .find_map(|t| self.barycentric(t, p).map(|w| (t, w)))
    }

    fn barycentric(&self, t: usize, p: Vec3<T>) -> Option<[T; 3]> {
        let tol = lit::<T>(-1e-10);
        let tri = self.triangles[t];
        let (a, b, c) = (self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]);
        let n = (b - a).cross(c - a);
        let denom = p.dot(n);
        if denom <= T::zero() {
            return None;
        }
        // Intersection of the ray through p with the chord plane.
        let q = p * (a.dot(n) / denom);
        let area = n.norm2();
        let wa = (b - q).cross(c - q).dot(n) / area;
        let wb = (c - q).cross(a - q).dot(n) / area;
        let wc = T::one() - wa - wb;
        (wa.min(wb).min(wc) >= tol).then_some([wa, wb, wc])
    }

    /// Piecewise-linear interpolation of a nodal field at `p`.
    pub fn interpolate(&self, values: &[T], p: Vec3<T>) -> Option<T> {
        let (t, w) = self.locate(p)?;
        let tri = self.triangles[t];
        Some(w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]])
    }
}

fn triangle_geometry<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> TriangleGeometry<T> {
    let area = spherical_triangle_area(a, b, c);
    let centroid = (a + b + c).normalized();
    let n = (b - a).cross(c - a);
    let a2 = n.norm();
    let nh = n / a2;
    let grad = [nh.cross(c - b) / a2, nh.cross(a - c) / a2, nh.cross(b - a) / a2];
    let quad_heights = QUADRATURE.map(|(l, _)| (a * lit(l[0]) + b * lit(l[1]) + c * lit(l[2])).normalized().z);
    TriangleGeometry { area, centroid, grad, quad_heights }
}
