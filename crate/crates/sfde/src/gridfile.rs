//! Plain-text grid files.
//!
//! ```text
//! # edges M=4 a=0 b=1
//! 0
//! 0.2
//! 0.5
//! 0.8
//! 1
//! ```
//!
//! One edge per line after the header; blank lines are ignored. The reader
//! checks the header against the data and then runs the usual grid
//! validation.

use std::fs;
use std::io::Write;
use std::path::Path;

use sfde_core::StaggeredGrid;

use crate::error::{HarnessError, Result};

fn bad(path: &Path, line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn header_field<'a>(fields: &[&'a str], key: &str) -> Option<&'a str> {
    fields.iter().find_map(|f| f.strip_prefix(key)?.strip_prefix('='))
}

pub fn parse_grid(text: &str, path: &Path) -> Result<StaggeredGrid> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(path, 1, "empty grid file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields[0] != "#" || fields[1] != "edges" {
        return Err(bad(path, 1, "expected header `# edges M=<int> a=<real> b=<real>`"));
    }
    let m: usize = header_field(&fields, "M")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(path, 1, "header needs M=<int>"))?;
    let a: f64 = header_field(&fields, "a")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(path, 1, "header needs a=<real>"))?;
    let b: f64 = header_field(&fields, "b")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(path, 1, "header needs b=<real>"))?;

    let mut edges = Vec::with_capacity(m + 1);
    for (idx, line) in lines {
        let v: f64 = line.trim().parse().map_err(|_| bad(path, idx + 1, format!("not a number: {:?}", line.trim())))?;
        edges.push(v);
    }
    if edges.len() != m + 1 {
        return Err(bad(path, 1, format!("header says M={m} but found {} edges", edges.len())));
    }
    if edges[0] != a || edges[m] != b {
        return Err(bad(path, 1, format!("first/last edge {}/{} disagree with a={a} b={b}", edges[0], edges[m])));
    }
    Ok(StaggeredGrid::from_edges(edges)?)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<StaggeredGrid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_grid(&text, path)
}

/// Edges are written with 17 significant digits so a read gives the same
/// grid back bit for bit.
pub fn format_grid(grid: &StaggeredGrid) -> String {
    let mut s = format!("# edges M={} a={:?} b={:?}\n", grid.cells(), grid.a(), grid.b());
    for e in grid.edges() {
        s.push_str(&format!("{e:?}\n"));
    }
    s
}

pub fn write_grid(grid: &StaggeredGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(format_grid(grid).as_bytes()).map_err(|e| HarnessError::io(path, e))
}
