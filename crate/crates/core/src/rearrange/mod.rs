//! Crystalline model of sets in the radial cone over a triangulated domain.
//!
//! A product grid has one column per triangle and `(2T+2)/Δw` levels covering
//! `−T−1 < w < T+1`, where a point `e^w z` sits at level `⌊(w + T + 1)/Δw⌋`. A voxel set is admissible
//! when every column is full below `w = −T` and empty above `w = T`. Its perimeter counts lateral
//! faces (interior mesh edges, weight `ℓ Δw y^{-n}` at the edge midpoint) and horizontal faces
//! (weight `area y^{-n}` at the centroid) separating occupied from empty voxels inside the grid. A
//! voxel has volume `area Δw y^{-(n+1)}`.
//!
//! All functionals are evaluated as integer face counts times weights, so they are exact for
//! rational scalars and monotone under the operations below for floating point ones.

mod io;
mod mincut;

pub use io::{read_rle, write_rle};
pub use mincut::{minimize_between, minimize_exhaustive, Minimization};

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::SphericalMesh;
use crate::scalar::ExactScalar;

/// Columns, levels and face weights.
#[derive(Debug, Clone)]
pub struct ProductGrid<S> {
    /// Interior mesh edges as `(column, column, ℓ y^{-n})`.
    lateral: Vec<(usize, usize, S)>,
    /// `area y^{-n}` per column.
    horizontal: Vec<S>,
    /// `area y^{-(n+1)}` per column.
    volume: Vec<S>,
    /// Levels per unit of `w`, `1/Δw`.
    per_unit: i64,
    /// `T/Δw`.
    t_levels: i64,
    n: u32,
}

impl<S: ExactScalar> ProductGrid<S> {
    /// Grid over the triangles of `mesh`. `1/dw` and `t/dw` must be integers.
    pub fn from_mesh(mesh: &SphericalMesh<f64>, t: f64, dw: f64, n: u32) -> Result<Self> {
        if !(dw > 0.0 && t > 0.0) || n < 2 {
            return Err(Error::InvalidGrid(format!("need T > 0, dw > 0, n >= 2 (got T = {t}, dw = {dw}, n = {n})")));
        }
        let per_unit = (1.0 / dw).round();
        let t_levels = (t * per_unit).round();
        if per_unit < 1.0 || (per_unit * dw - 1.0).abs() > 1e-12 || (t * per_unit - t_levels).abs() > 1e-9 || t_levels < 1.0 {
            return Err(Error::InvalidGrid(format!("1/dw and T/dw must be integers (T = {t}, dw = {dw})")));
        }
        Self::from_levels(mesh, t_levels as i64, per_unit as i64, n)
    }

    /// Grid with `Δw = 1/per_unit` and `T = t_levels/per_unit`.
    pub fn from_levels(mesh: &SphericalMesh<f64>, t_levels: i64, per_unit: i64, n: u32) -> Result<Self> {
        if t_levels < 1 || per_unit < 1 || n < 2 {
            return Err(Error::InvalidGrid("level counts must be positive and n >= 2".into()));
        }
        let pow = |y: f64, k: u32| y.powi(-(k as i32));
        let lateral = mesh
            .edges()
            .iter()
            .filter(|e| !e.boundary)
            .map(|e| {
                let (a, b) = (mesh.vertex(e.v[0]), mesh.vertex(e.v[1]));
                let y = (a + b).normalized().z;
                (e.tris[0], e.tris[1], S::from_weight(a.angle_to(b) * pow(y, n)))
            })
            .collect();
        let horizontal = mesh.geometry().iter().map(|g| S::from_weight(g.area * pow(g.centroid.z, n))).collect();
        let volume = mesh.geometry().iter().map(|g| S::from_weight(g.area * pow(g.centroid.z, n + 1))).collect();
        Ok(Self { lateral, horizontal, volume, per_unit, t_levels, n })
    }

    pub fn columns(&self) -> usize {
        self.horizontal.len()
    }

    pub fn levels(&self) -> usize {
        (2 * self.t_levels + 2 * self.per_unit) as usize
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t_levels as f64 / self.per_unit as f64
    }

    pub fn dw(&self) -> S {
        S::ratio(1, self.per_unit)
    }

    /// Levels below `w = −T`, always occupied.
    pub fn floor_levels(&self) -> usize {
        self.per_unit as usize
    }

    /// First level at or above `w = T`; this level and all above are empty.
    pub fn ceiling_level(&self) -> usize {
        (2 * self.t_levels + self.per_unit) as usize
    }

    /// Largest admissible `|u|/Δw` is `T/Δw − 1`.
    pub fn t_levels(&self) -> i64 {
        self.t_levels
    }

    /// `k = Σ area y^{-(n+1)}`.
    pub fn k(&self) -> S {
        self.volume.iter().fold(S::zero(), |a, b| a + b.clone())
    }

    pub fn lateral(&self) -> &[(usize, usize, S)] {
        &self.lateral
    }

    pub fn horizontal(&self) -> &[S] {
        &self.horizontal
    }

    pub fn volume_weights(&self) -> &[S] {
        &self.volume
    }
}

/// Occupancy per column and level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoxelSet {
    occ: Vec<Vec<bool>>,
}

impl VoxelSet {
    pub fn empty(columns: usize, levels: usize) -> Self {
        Self { occ: vec![vec![false; levels]; columns] }
    }

    pub fn columns(&self) -> usize {
        self.occ.len()
    }

    pub fn levels(&self) -> usize {
        self.occ.first().map_or(0, Vec::len)
    }

    pub fn get(&self, column: usize, level: usize) -> bool {
        self.occ[column][level]
    }

    pub fn set(&mut self, column: usize, level: usize, value: bool) {
        self.occ[column][level] = value;
    }

    pub fn column(&self, c: usize) -> &[bool] {
        &self.occ[c]
    }

    pub fn count(&self, c: usize) -> usize {
        self.occ[c].iter().filter(|&&b| b).count()
    }

    /// Whether every column is a bottom interval.
    pub fn is_subgraph(&self) -> bool {
        self.occ.iter().all(|col| col.windows(2).all(|w| w[0] || !w[1]))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.occ.iter().flatten().zip(other.occ.iter().flatten()).all(|(a, b)| !a || *b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        let occ = self
            .occ
            .iter()
            .zip(&other.occ)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Self { occ }
    }
}

/// Check `C̲_T ⊆ E ⊆ C̄_T` and the grid shape.
pub fn check_containment<S: ExactScalar>(grid: &ProductGrid<S>, e: &VoxelSet) -> Result<()> {
    if e.columns() != grid.columns() || e.levels() != grid.levels() {
        return Err(Error::InvalidGrid(format!(
            "voxel set is {}x{}, grid is {}x{}",
            e.columns(),
            e.levels(),
            grid.columns(),
            grid.levels()
        )));
    }
    for c in 0..e.columns() {
        let col = e.column(c);
        if !col[..grid.floor_levels()].iter().all(|&b| b) || col[grid.ceiling_level()..].iter().any(|&b| b) {
            return Err(Error::Containment(c));
        }
    }
    Ok(())
}

/// Piecewise constant column values `v(centroid)` of a nodal field.
pub fn column_values(mesh: &SphericalMesh<f64>, v: &ScalarField<f64>) -> Result<Vec<f64>> {
    v.check(mesh)?;
    Ok(mesh
        .triangles()
        .iter()
        .map(|t| (v.values[t[0]] + v.values[t[1]] + v.values[t[2]]) / 3.0)
        .collect())
}

/// Round column values to the nearest level, `u = kΔw`. Requires `|u| < T` after rounding.
pub fn snap<S: ExactScalar>(grid: &ProductGrid<S>, u: &[f64]) -> Result<Vec<i64>> {
    check_columns(grid, u.len())?;
    let m = grid.per_unit as f64;
    u.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(Error::OutsideCone { norm: x, t: grid.t() });
            }
            let k = (x * m).round() as i64;
            if k.abs() >= grid.t_levels {
                return Err(Error::OutsideCone { norm: x.abs(), t: grid.t() });
            }
            Ok(k)
        })
        .collect()
}

/// Like [`snap`] but rejects values that are not already on the level grid.
pub fn snap_exact<S: ExactScalar>(grid: &ProductGrid<S>, u: &[f64]) -> Result<Vec<i64>> {
    let k = snap(grid, u)?;
    let m = grid.per_unit as f64;
    for (c, (&x, &ki)) in u.iter().zip(&k).enumerate() {
        if (x * m - ki as f64).abs() > 1e-9 {
            return Err(Error::NotSnapped { column: c, value: x });
        }
    }
    Ok(k)
}

fn check_columns<S: ExactScalar>(grid: &ProductGrid<S>, len: usize) -> Result<()> {
    if len != grid.columns() {
        return Err(Error::LengthMismatch { expected: grid.columns(), found: len });
    }
    Ok(())
}

/// Subgraph of `u = kΔw`: level `j` of column `c` is occupied iff `j < k_c + (T+1)/Δw`.
pub fn subgraph_set<S: ExactScalar>(grid: &ProductGrid<S>, k: &[i64]) -> Result<VoxelSet> {
    check_columns(grid, k.len())?;
    let mut e = VoxelSet::empty(grid.columns(), grid.levels());
    for (c, &kc) in k.iter().enumerate() {
        if kc.abs() >= grid.t_levels {
            return Err(Error::OutsideCone { norm: (kc.abs() as f64) / grid.per_unit as f64, t: grid.t() });
        }
        let top = (kc + grid.t_levels + grid.per_unit) as usize;
        for j in 0..top {
            e.set(c, j, true);
        }
    }
    Ok(e)
}

/// Per-face counts of separating faces: lateral (per interior edge) and horizontal (per column).
fn face_counts(e: &VoxelSet, lateral: &[(usize, usize, impl Sized)]) -> (Vec<i64>, Vec<i64>) {
    let lat = lateral
        .iter()
        .map(|(a, b, _)| e.column(*a).iter().zip(e.column(*b)).filter(|(x, y)| x != y).count() as i64)
        .collect();
    let hor = (0..e.columns())
        .map(|c| e.column(c).windows(2).filter(|w| w[0] != w[1]).count() as i64)
        .collect();
    (lat, hor)
}

fn weighted<S: ExactScalar>(grid: &ProductGrid<S>, lat: &[i64], hor: &[i64]) -> S {
    let dw = grid.dw();
    let mut s = S::zero();
    for ((_, _, w), &c) in grid.lateral.iter().zip(lat) {
        if c != 0 {
            s = s + S::from_count(c) * w.clone() * dw.clone();
        }
    }
    for (w, &c) in grid.horizontal.iter().zip(hor) {
        if c != 0 {
            s = s + S::from_count(c) * w.clone();
        }
    }
    s
}

/// Crystalline perimeter inside the grid.
pub fn perimeter<S: ExactScalar>(grid: &ProductGrid<S>, e: &VoxelSet) -> Result<S> {
    check_containment(grid, e)?;
    let (lat, hor) = face_counts(e, &grid.lateral);
    Ok(weighted(grid, &lat, &hor))
}

/// `Σ occupied · area Δw y^{-(n+1)}`, summed column by column from the occupied counts.
pub fn volume<S: ExactScalar>(grid: &ProductGrid<S>, e: &VoxelSet) -> Result<S> {
    check_containment(grid, e)?;
    Ok(volume_from_counts(grid, (0..e.columns()).map(|c| e.count(c) as i64)))
}

fn volume_from_counts<S: ExactScalar>(grid: &ProductGrid<S>, counts: impl Iterator<Item = i64>) -> S {
    let dw = grid.dw();
    grid.volume
        .iter()
        .zip(counts)
        .fold(S::zero(), |s, (w, c)| s + S::from_count(c) * w.clone() * dw.clone())
}

fn nh<S: ExactScalar>(n: u32, h: f64) -> S {
    S::from_count(i64::from(n)) * S::from_weight(h)
}

/// `F(E) = P(E) + nH Vol(E)`.
pub fn functional<S: ExactScalar>(grid: &ProductGrid<S>, e: &VoxelSet, h: f64) -> Result<S> {
    Ok(perimeter(grid, e)? + nh::<S>(grid.n, h) * volume(grid, e)?)
}

/// Radial rearrangement: `u = (occupied levels in [−T, T])·Δw − T` per column and its subgraph.
/// Returns `u/Δw` and the rearranged set.
pub fn rearrange<S: ExactScalar>(grid: &ProductGrid<S>, e: &VoxelSet) -> Result<(Vec<i64>, VoxelSet)> {
    check_containment(grid, e)?;
    let (lo, hi) = (grid.floor_levels(), grid.ceiling_level());
    let k: Vec<i64> = (0..e.columns())
        .map(|c| e.column(c)[lo..hi].iter().filter(|&&b| b).count() as i64 - grid.t_levels)
        .collect();
    // A full band gives u = T, whose subgraph reaches the ceiling; build it directly.
    let mut out = VoxelSet::empty(grid.columns(), grid.levels());
    for (c, &kc) in k.iter().enumerate() {
        for j in 0..(kc + grid.t_levels + grid.per_unit) as usize {
            out.set(c, j, true);
        }
    }
    Ok((k, out))
}

/// Submodularity `P(E₁∩E₂) + P(E₁∪E₂) ≤ P(E₁) + P(E₂)` with its slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Submodularity<S> {
    pub holds: bool,
    /// `P(E₁) + P(E₂) − P(E₁∩E₂) − P(E₁∪E₂)`, accumulated face by face from integer counts.
    pub slack: S,
    pub p1: S,
    pub p2: S,
    pub p_meet: S,
    pub p_join: S,
}

pub fn submodularity_check<S: ExactScalar>(grid: &ProductGrid<S>, e1: &VoxelSet, e2: &VoxelSet) -> Result<Submodularity<S>> {
    check_containment(grid, e1)?;
    check_containment(grid, e2)?;
    let (meet, join) = (e1.intersection(e2), e1.union(e2));
    let c1 = face_counts(e1, &grid.lateral);
    let c2 = face_counts(e2, &grid.lateral);
    let cm = face_counts(&meet, &grid.lateral);
    let cj = face_counts(&join, &grid.lateral);
    let diff = |k: usize, lat: bool| -> i64 {
        if lat {
            c1.0[k] + c2.0[k] - cm.0[k] - cj.0[k]
        } else {
            c1.1[k] + c2.1[k] - cm.1[k] - cj.1[k]
        }
    };
    let lat: Vec<i64> = (0..grid.lateral.len()).map(|k| diff(k, true)).collect();
    let hor: Vec<i64> = (0..grid.columns()).map(|k| diff(k, false)).collect();
    let face_ok = lat.iter().chain(&hor).all(|&d| d >= 0);
    let slack = weighted(grid, &lat, &hor);
    Ok(Submodularity {
        holds: face_ok && slack >= S::zero(),
        slack,
        p1: weighted(grid, &c1.0, &c1.1),
        p2: weighted(grid, &c2.0, &c2.1),
        p_meet: weighted(grid, &cm.0, &cm.1),
        p_join: weighted(grid, &cj.0, &cj.1),
    })
}

/// `A(u) = Σ_edges |u_a − u_b| ℓ y^{-n} + Σ area y^{-n}`, the crystalline area of `u = kΔw`.
pub fn crystalline_area<S: ExactScalar>(grid: &ProductGrid<S>, k: &[i64]) -> Result<S> {
    check_columns(grid, k.len())?;
    let lat: Vec<i64> = grid.lateral.iter().map(|(a, b, _)| (k[*a] - k[*b]).abs()).collect();
    Ok(weighted(grid, &lat, &vec![1; grid.columns()]))
}

/// `V(u) = Σ u area y^{-(n+1)}` for `u = kΔw`.
pub fn discrete_volume<S: ExactScalar>(grid: &ProductGrid<S>, k: &[i64]) -> Result<S> {
    check_columns(grid, k.len())?;
    Ok(volume_from_counts(grid, k.iter().copied()))
}

/// Both sides of `F(subgraph u) = A(u) + nH V(u) + nH k(T+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphIdentity<S> {
    pub lhs: S,
    pub rhs: S,
    /// `|lhs − rhs| / max(|lhs|, |rhs|, 1)`.
    pub gap: f64,
}

pub fn subgraph_energy_identity<S: ExactScalar>(grid: &ProductGrid<S>, u: &[f64], h: f64) -> Result<SubgraphIdentity<S>> {
    let k = snap_exact(grid, u)?;
    let lhs = functional(grid, &subgraph_set(grid, &k)?, h)?;
    let t_plus_one = S::ratio(grid.t_levels + grid.per_unit, grid.per_unit);
    let c = nh::<S>(grid.n, h);
    let rhs = crystalline_area(grid, &k)? + c.clone() * discrete_volume(grid, &k)? + c * grid.k() * t_plus_one;
    let diff = (lhs.clone() - rhs.clone()).abs_value().to_f64();
    let scale = lhs.to_f64().abs().max(rhs.to_f64().abs()).max(1.0);
    Ok(SubgraphIdentity { lhs, rhs, gap: diff / scale })
}

/// Random admissible set: each voxel strictly between the floor and the ceiling is occupied with
/// probability `density`.
pub fn random_set<S: ExactScalar, R: Rng>(grid: &ProductGrid<S>, rng: &mut R, density: f64) -> VoxelSet {
    let mut e = VoxelSet::empty(grid.columns(), grid.levels());
    for c in 0..grid.columns() {
        for j in 0..grid.floor_levels() {
            e.set(c, j, true);
        }
        for j in grid.floor_levels()..grid.ceiling_level() {
            e.set(c, j, rng.gen_bool(density));
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec};
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid<S: ExactScalar>(level: u32) -> ProductGrid<S> {
        let m = build_mesh(&DomainSpec::cap(0.4, level)).unwrap();
        ProductGrid::from_mesh(&m, 1.0, 0.25, 2).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g: ProductGrid<f64> = grid(1);
        assert_eq!(g.levels(), 16);
        assert_eq!((g.floor_levels(), g.ceiling_level()), (4, 12));
        let m = build_mesh(&DomainSpec::cap(0.4, 0)).unwrap();
        assert!(ProductGrid::<f64>::from_mesh(&m, 1.0, 0.3, 2).is_err());
        assert!(ProductGrid::<f64>::from_mesh(&m, 1.1, 0.25, 2).is_err());
    }

    #[test]
    fn zero_subgraph() {
        let g: ProductGrid<BigRational> = grid(1);
        let e = subgraph_set(&g, &vec![0; g.columns()]).unwrap();
        for c in 0..g.columns() {
            assert_eq!(e.count(c), 8);
        }
        let p = perimeter(&g, &e).unwrap();
        let a = g.horizontal().iter().fold(BigRational::from_count(0), |s, w| s + w.clone());
        assert_eq!(p, a);
        // Volume of the slab below w = −T is k.
        let slab = random_set(&g, &mut ChaCha8Rng::seed_from_u64(0), 0.0);
        assert_eq!(volume(&g, &slab).unwrap(), g.k());
    }

    #[test]
    fn containment_is_enforced() {
        let g: ProductGrid<f64> = grid(0);
        let mut e = subgraph_set(&g, &vec![0; g.columns()]).unwrap();
        e.set(2, 0, false);
        assert!(matches!(perimeter(&g, &e), Err(Error::Containment(2))));
        assert!(subgraph_set(&g, &vec![4; g.columns()]).is_err());
    }

    #[test]
    fn gap_collapses_to_the_bottom() {
        let g: ProductGrid<BigRational> = grid(0);
        let mut e = subgraph_set(&g, &vec![0; g.columns()]).unwrap();
        // Column 0 gets pattern occupied/gap/occupied above the floor.
        for j in 4..12 {
            e.set(0, j, false);
        }
        e.set(0, 4, true);
        e.set(0, 6, true);
        let (k, r) = rearrange(&g, &e).unwrap();
        assert_eq!(k[0], -2);
        assert_eq!(r.count(0), 6);
        assert!(r.is_subgraph());
        assert_eq!(volume(&g, &r).unwrap(), volume(&g, &e).unwrap());
        assert!(perimeter(&g, &r).unwrap() <= perimeter(&g, &e).unwrap());
    }

    #[test]
    fn subgraphs_are_fixed_points() {
        let g: ProductGrid<f64> = grid(1);
        let k: Vec<i64> = (0..g.columns() as i64).map(|c| (c % 7) - 3).collect();
        let e = subgraph_set(&g, &k).unwrap();
        let (k2, e2) = rearrange(&g, &e).unwrap();
        assert_eq!(k, k2);
        assert_eq!(e, e2);
    }

    #[test]
    fn rational_identity_is_exact() {
        let g: ProductGrid<BigRational> = grid(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for h in [-0.5, 0.0, 0.5] {
            let u: Vec<f64> = (0..g.columns()).map(|_| rng.gen_range(-3i64..=3) as f64 * 0.25).collect();
            let id = subgraph_energy_identity(&g, &u, h).unwrap();
            assert_eq!(id.lhs, id.rhs);
            assert_eq!(id.gap, 0.0);
        }
        assert!(matches!(subgraph_energy_identity(&g, &vec![0.1; g.columns()], 0.5), Err(Error::NotSnapped { .. })));
    }

    #[test]
    fn submodularity_trivial_cases() {
        let g: ProductGrid<BigRational> = grid(0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = random_set(&g, &mut rng, 0.5);
        let s = submodularity_check(&g, &e, &e).unwrap();
        assert!(s.holds && s.slack == BigRational::from_count(0));
        let big = e.union(&random_set(&g, &mut rng, 0.5));
        let s = submodularity_check(&g, &e, &big).unwrap();
        assert!(s.holds && s.slack == BigRational::from_count(0));
    }
}
