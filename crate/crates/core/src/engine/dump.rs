//! Plain-text snapshots of ρ(t) for debugging.
//!
//! ```text
//! # qdent density dump v1
//! # dim <n>; each snapshot: "t <time>" then n rows of n "re im" pairs (row-major)
//! t -6.6667
//! 1 0 0 0 ...
//! ```
//!
//! The basis ordering is the one documented in [`crate::model`].

use std::io::{BufRead, Write};

use super::evolve::DensityOperator;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

pub fn write_snapshots<W: Write>(mut w: W, snapshots: &[DensityOperator]) -> Result<()> {
    let dim = snapshots.first().map_or(0, |s| s.dim());
    writeln!(w, "# qdent density dump v1")?;
    writeln!(w, "# dim {dim}; each snapshot: \"t <time>\" then {dim} rows of {dim} \"re im\" pairs (row-major)")?;
    for s in snapshots {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
        writeln!(w, "t {:e}", s.time)?;
        for i in 0..dim {
            let row: Vec<String> =
                (0..dim).map(|j| format!("{:e} {:e}", s.matrix[(i, j)].re, s.matrix[(i, j)].im)).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<DensityOperator>> {
    let mut dim = None;
    let mut out = Vec::new();
    let mut current: Option<(f64, Vec<C64>)> = None;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad number '{s}': {e}")));

    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# dim ") {
            let n = rest.split(';').next().unwrap_or("").trim();
            dim = Some(n.parse::<usize>().map_err(|e| Error::Parse(format!("bad dim: {e}")))?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let n = dim.ok_or_else(|| Error::Parse("missing dim header".into()))?;
        if let Some(t) = line.strip_prefix("t ") {
            if let Some((time, vals)) = current.take() {
                out.push(finish(n, time, vals)?);
            }
            current = Some((parse(t.trim())?, Vec::with_capacity(n * n)));
            continue;
        }
        let (_, vals) = current.as_mut().ok_or_else(|| Error::Parse("matrix row before time stamp".into()))?;
        let nums: Vec<f64> = line.split_whitespace().map(parse).collect::<Result<_>>()?;
        if nums.len() != 2 * n {
            return Err(Error::Parse(format!("row has {} numbers, expected {}", nums.len(), 2 * n)));
        }
        vals.extend(nums.chunks(2).map(|c| C64::new(c[0], c[1])));
    }
    if let Some((time, vals)) = current {
        out.push(finish(dim.unwrap_or(0), time, vals)?);
    }
    Ok(out)
}

fn finish(n: usize, time: f64, vals: Vec<C64>) -> Result<DensityOperator> {
    if vals.len() != n * n {
        return Err(Error::Parse(format!("snapshot at t = {time} has {} entries, expected {}", vals.len(), n * n)));
    }
    Ok(DensityOperator { time, matrix: CMatrix::from_row_slice(n, n, &vals) })
}
