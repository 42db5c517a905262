//! Run-length text format for voxel sets: one line `column: s-e,s-e` per column listing the
//! occupied levels as inclusive ranges.

use std::fmt::Write as _;

use super::{check_containment, ProductGrid, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

pub fn write_rle(e: &VoxelSet) -> String {
    let mut out = String::new();
    for c in 0..e.columns() {
        let col = e.column(c);
        let mut runs = Vec::new();
        let mut j = 0;
        while j < col.len() {
            if col[j] {
                let s = j;
                while j + 1 < col.len() && col[j + 1] {
                    j += 1;
                }
                runs.push(format!("{s}-{j}"));
            }
            j += 1;
        }
        let _ = writeln!(out, "{c}: {}", runs.join(","));
    }
    out
}

/// Parse a set for `grid`; every column must appear exactly once and the result must be admissible.
pub fn read_rle<S: ExactScalar>(text: &str, grid: &ProductGrid<S>) -> Result<VoxelSet> {
    let mut e = VoxelSet::empty(grid.columns(), grid.levels());
    let mut seen = vec![false; grid.columns()];
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", ln + 1));
        let (col, runs) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let c: usize = col.trim().parse().map_err(|_| bad("bad column id"))?;
        if c >= grid.columns() || std::mem::replace(&mut seen[c], true) {
            return Err(bad("column out of range or repeated"));
        }
        for run in runs.split(',').map(str::trim).filter(|r| !r.is_empty()) {
            let (s, t) = run.split_once('-').ok_or_else(|| bad("range must be s-e"))?;
            let (s, t): (usize, usize) = (s.trim().parse().map_err(|_| bad("bad level"))?, t.trim().parse().map_err(|_| bad("bad level"))?);
            if s > t || t >= grid.levels() {
                return Err(bad("level range out of bounds"));
            }
            for j in s..=t {
                e.set(c, j, true);
            }
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!("column {c} missing")));
    }
    check_containment(grid, &e)?;
    Ok(e)
}
