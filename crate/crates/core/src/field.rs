use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::SphericalMesh;
use crate::scalar::Real;

/// What a [`ScalarField`] holds. Only used for labelling exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    LogHeight,
    Distance,
    Curvature,
    Barrier,
    Other,
}

impl FieldRole {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldRole::LogHeight => "v",
            FieldRole::Distance => "distance",
            FieldRole::Curvature => "curvature",
            FieldRole::Barrier => "barrier",
            FieldRole::Other => "value",
        }
    }
}

/// Per-vertex values on a [`SphericalMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub values: Vec<T>,
    pub role: FieldRole,
}

impl<T: Real> ScalarField<T> {
    pub fn new(values: Vec<T>, role: FieldRole) -> Self {
        Self { values, role }
    }

    pub fn constant(n: usize, c: T, role: FieldRole) -> Self {
        Self { values: vec![c; n], role }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Check length against the mesh and that every entry is finite.
    pub fn check(&self, mesh: &SphericalMesh<T>) -> Result<()> {
        check_values(&self.values, mesh.n_vertices())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` over the given indices (all vertices if `None`).
    pub fn max_diff(&self, other: &Self, on: Option<&[usize]>) -> T {
        match on {
            Some(idx) => idx.iter().fold(T::zero(), |m, &i| m.max((self.values[i] - other.values[i]).abs())),
            None => self
                .values
                .iter()
                .zip(&other.values)
                .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())),
        }
    }

    /// CSV with columns `vertex_id,x,y,z,<role>`.
    pub fn write_csv<W: Write>(&self, mesh: &SphericalMesh<T>, mut w: W) -> Result<()> {
        writeln!(w, "vertex_id,x,y,z,{}", self.role.as_str())?;
        for (i, (p, v)) in mesh.vertices().iter().zip(&self.values).enumerate() {
            writeln!(w, "{i},{},{},{},{}", p.x, p.y, p.z, v)?;
        }
        Ok(())
    }
}

pub(crate) fn check_values<T: Real>(values: &[T], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::LengthMismatch { expected, found: values.len() });
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}
