use std::collections::HashMap;

use super::{Disk, SphericalMesh};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::vec3::{tangent_frame, Vec3};

/// Shape of the domain to mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Spherical cap `{y > eps}`.
    Cap { eps: f64 },
    /// Geodesic ball of radius `radius` around the unit vector `center`.
    GeodesicBall { center: [f64; 3], radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub refinement_level: u32,
}

impl DomainSpec {
    pub fn cap(eps: f64, level: u32) -> Self {
        Self { kind: DomainKind::Cap { eps }, refinement_level: level }
    }

    pub fn ball(center: [f64; 3], radius: f64, level: u32) -> Self {
        Self { kind: DomainKind::GeodesicBall { center, radius }, refinement_level: level }
    }

    /// The domain as a geodesic disk, after validating its parameters.
    pub fn disk<T: Real>(&self) -> Result<Disk<T>> {
        match self.kind {
            DomainKind::Cap { eps } => {
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::InvalidDomain(format!("cap eps = {eps} must lie in (0, 1)")));
                }
                Ok(Disk { center: Vec3::up(), radius: lit(eps.acos()) })
            }
            DomainKind::GeodesicBall { center, radius } => {
                let c = Vec3::new(center[0], center[1], center[2]);
                let len = c.norm();
                if !(len.is_finite() && len > 0.0) {
                    return Err(Error::InvalidDomain("ball center must be a nonzero vector".into()));
                }
                let c = c / len;
                let polar = c.z.clamp(-1.0, 1.0).acos();
                if !(radius > 0.0) || polar + radius >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::InvalidDomain(format!(
                        "ball of radius {radius} at polar angle {polar} is not inside the open upper hemisphere"
                    )));
                }
                Ok(Disk { center: c.cast(), radius: lit(radius) })
            }
        }
    }
}

/// Build the mesh for `spec`: the six-triangle fan refined `refinement_level` times.
pub fn build_mesh<T: Real>(spec: &DomainSpec) -> Result<SphericalMesh<T>> {
    let disk = spec.disk::<T>()?;
    let mut mesh = fan(disk)?;
    for _ in 0..spec.refinement_level {
        mesh = refine(&mesh)?;
    }
    Ok(mesh)
}

fn fan<T: Real>(disk: Disk<T>) -> Result<SphericalMesh<T>> {
    let (e1, e2) = tangent_frame(disk.center);
    let (cr, sr) = (disk.radius.cos(), disk.radius.sin());
    let mut vertices = vec![disk.center];
    for k in 0..6 {
        let a = lit::<T>(k as f64) * T::PI() / lit(3.0);
        let dir = e1 * a.cos() + e2 * a.sin();
        vertices.push((disk.center * cr + dir * sr).normalized());
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    SphericalMesh::from_parts(vertices, triangles, Some(disk), 0)
}

/// Midpoint 1-to-4 subdivision. Interior midpoints are projected radially onto the sphere,
/// boundary midpoints onto the exact boundary circle when the domain is known.
pub fn refine<T: Real>(mesh: &SphericalMesh<T>) -> Result<SphericalMesh<T>> {
    let mut vertices = mesh.vertices().to_vec();
    let boundary_edges: std::collections::HashSet<(usize, usize)> = mesh
        .edges()
        .iter()
        .filter(|e| e.boundary)
        .map(|e| (e.v[0], e.v[1]))
        .collect();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3<T>>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let m = (vertices[a] + vertices[b]).normalized();
            let m = match mesh.disk() {
                Some(d) if boundary_edges.contains(&key) => d.snap_to_boundary(m),
                _ => m,
            };
            vertices.push(m);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in mesh.triangles() {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    SphericalMesh::from_parts(vertices, triangles, mesh.disk().copied(), mesh.level() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cap(eps: f64, level: u32) -> SphericalMesh<f64> {
        build_mesh(&DomainSpec::cap(eps, level)).unwrap()
    }

    #[test]
    fn cap_area_matches_analytic() {
        // Area of {y > eps} is 2*pi*(1 - eps).
        let m = cap(0.5, 5);
        let exact = 2.0 * PI * 0.5;
        assert!((m.total_area() - exact).abs() / exact < 5e-3);
    }

    #[test]
    fn refinement_improves_cap_area() {
        let exact = PI;
        let mut prev = f64::INFINITY;
        let mut m = cap(0.5, 0);
        for _ in 0..5 {
            let err = (m.total_area() - exact).abs();
            assert!(err < prev, "area error must shrink");
            prev = err;
            m = refine(&m).unwrap();
        }
    }

    #[test]
    fn ball_area_matches_analytic() {
        let m: SphericalMesh<f64> = build_mesh(&DomainSpec::ball([0.0, 0.0, 1.0], 0.4, 4)).unwrap();
        let exact = 2.0 * PI * (1.0 - 0.4f64.cos());
        assert!((m.total_area() - exact).abs() / exact < 5e-3);
    }

    #[test]
    fn tiny_cap_stays_above_eps() {
        let m = cap(0.999, 0);
        assert_eq!(m.n_triangles(), 6);
        assert!(m.heights().iter().all(|&y| y >= 0.999 - 1e-15));
    }

    #[test]
    fn boundary_vertices_on_exact_circle() {
        let m = cap(0.3, 4);
        for i in m.boundary_vertices() {
            assert!((m.height(i) - 0.3).abs() < 1e-12);
        }
        let b: SphericalMesh<f64> = build_mesh(&DomainSpec::ball([0.3, 0.1, 0.9], 0.25, 3)).unwrap();
        let d = *b.disk().unwrap();
        for i in b.boundary_vertices() {
            assert!((d.center.angle_to(b.vertex(i)) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn subdivision_quadruples_triangles() {
        let m = cap(0.4, 2);
        let r = refine(&m).unwrap();
        assert_eq!(r.n_triangles(), 4 * m.n_triangles());
        assert_eq!(r.boundary_loops().len(), 1);
        assert_eq!(r.boundary_loops()[0].len(), 2 * m.boundary_loops()[0].len());
    }

    #[test]
    fn build_equals_repeated_refinement() {
        let a = cap(0.4, 3);
        let b = refine(&refine(&cap(0.4, 1)).unwrap()).unwrap();
        assert_eq!(a.triangles(), b.triangles());
        assert_eq!(a.vertices(), b.vertices());
    }

    #[test]
    fn edge_lengths_halve() {
        let l3 = cap(0.3, 3).max_edge_length();
        let l4 = cap(0.3, 4).max_edge_length();
        let ratio = l3 / l4;
        assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(build_mesh::<f64>(&DomainSpec::cap(0.0, 1)).is_err());
        assert!(build_mesh::<f64>(&DomainSpec::cap(1.0, 1)).is_err());
        assert!(build_mesh::<f64>(&DomainSpec::ball([1.0, 0.0, 0.2], 0.3, 1)).is_err());
        assert!(build_mesh::<f64>(&DomainSpec::ball([0.0, 0.0, 1.0], 1.6, 1)).is_err());
    }

    #[test]
    fn manifold_edge_counts() {
        let m = cap(0.5, 3);
        let mut count = HashMap::new();
        for t in m.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for e in m.edges() {
            let c = count[&(e.v[0], e.v[1])];
            assert_eq!(c, if e.boundary { 1 } else { 2 });
        }
    }

    #[test]
    fn single_precision_mesh_builds() {
        let m: SphericalMesh<f32> = build_mesh(&DomainSpec::cap(0.5, 3)).unwrap();
        assert!((m.total_area() - std::f32::consts::PI).abs() < 0.05);
    }
}
