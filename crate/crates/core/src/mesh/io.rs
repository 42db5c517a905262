//! Plain-text mesh format.
//!
//! ```text
//! n_vertices n_triangles
//! x y z boundary_flag      (one line per vertex)
//! i j k                    (one line per triangle, 0-based)
//! ```

use std::io::{BufRead, Write};
use std::str::FromStr;

use super::SphericalMesh;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

pub fn write_mesh<T: Real, W: Write>(mesh: &SphericalMesh<T>, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", mesh.n_vertices(), mesh.n_triangles())?;
    for (p, &b) in mesh.vertices().iter().zip(mesh.boundary_flags()) {
        writeln!(w, "{} {} {} {}", p.x, p.y, p.z, u8::from(b))?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Read a mesh written by [`write_mesh`]. The boundary flags in the file must agree with the
/// topology.
pub fn read_mesh<T: Real + FromStr, R: BufRead>(r: R) -> Result<SphericalMesh<T>> {
    let mut lines = r.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| Error::Parse("unexpected end of file".into()))?.map_err(Error::from)
    };
    let header = next()?;
    let counts: Vec<usize> = parse_all(&header)?;
    let [nv, nt] = counts[..] else {
        return Err(Error::Parse(format!("bad header '{header}'")));
    };
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = next()?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::Parse(format!("bad vertex line '{line}'")));
        }
        let c: Vec<T> = f[..3].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        vertices.push(Vec3::new(c[0], c[1], c[2]));
        flags.push(parse::<u8>(f[3])? != 0);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let line = next()?;
        let ix: Vec<usize> = parse_all(&line)?;
        let [i, j, k] = ix[..] else {
            return Err(Error::Parse(format!("bad triangle line '{line}'")));
        };
        triangles.push([i, j, k]);
    }
    let mesh = SphericalMesh::from_parts(vertices, triangles, None, 0)?;
    if mesh.boundary_flags() != flags.as_slice() {
        return Err(Error::Parse("boundary flags disagree with mesh topology".into()));
    }
    Ok(mesh)
}

fn parse<F: FromStr>(s: &str) -> Result<F> {
    s.parse().map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
}

fn parse_all<F: FromStr>(line: &str) -> Result<Vec<F>> {
    line.split_whitespace().map(parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec};

    #[test]
    fn round_trip_is_exact() {
        let m = build_mesh::<f64>(&DomainSpec::ball([0.1, -0.2, 0.9], 0.3, 2)).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back: SphericalMesh<f64> = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_flags(), m.boundary_flags());
        let mut again = Vec::new();
        write_mesh(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_truncated_input() {
        let text = "3 1\n0 0 1 1\n";
        assert!(read_mesh::<f64, _>(text.as_bytes()).is_err());
    }
}
