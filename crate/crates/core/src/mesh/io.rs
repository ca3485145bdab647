//! The `pbmesh` text format:
//!
//! ```text
//! pbmesh 1
//! vertices N
//! x y z            (N lines)
//! tets M
//! v0 v1 v2 v3 l    (M lines, l in {m, s})
//! bfaces K
//! v0 v1 v2         (K lines)
//! ```

use std::fmt::Write as _;

use super::{Region, SimplicialMesh};
use crate::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
        Err(Error::Parse { line: self.line + 1, message: "unexpected end of file".into() })
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != key {
            return Err(self.err(format!("expected `{key} <count>`")));
        }
        t[1].parse().map_err(|_| self.err(format!("bad {key} count `{}`", t[1])))
    }

    fn numbers<T: std::str::FromStr>(&self, toks: &[&str]) -> Result<Vec<T>> {
        toks.iter().map(|s| s.parse::<T>().map_err(|_| self.err(format!("bad number `{s}`")))).collect()
    }
}

pub fn read_pbmesh(text: &str) -> Result<SimplicialMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let head = lines.next_tokens()?;
    if head != ["pbmesh", "1"] {
        return Err(lines.err("expected header `pbmesh 1`"));
    }
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let t = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(lines.err("vertex needs 3 coordinates"));
        }
        let x: Vec<f64> = lines.numbers(&t)?;
        vertices.push([x[0], x[1], x[2]]);
    }
    let nt = lines.header("tets")?;
    let mut tets = Vec::with_capacity(nt);
    let mut regions = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t = lines.next_tokens()?;
        if t.len() != 5 {
            return Err(lines.err("tet needs 4 vertex ids and a label"));
        }
        let v: Vec<usize> = lines.numbers(&t[..4])?;
        if let Some(bad) = v.iter().find(|&&i| i >= nv) {
            return Err(lines.err(format!("vertex id {bad} out of range")));
        }
        tets.push([v[0], v[1], v[2], v[3]]);
        regions.push(match t[4] {
            "m" => Region::Solute,
            "s" => Region::Solvent,
            other => return Err(lines.err(format!("unknown region label `{other}`"))),
        });
    }
    let nb = lines.header("bfaces")?;
    let mut bfaces = Vec::with_capacity(nb);
    for _ in 0..nb {
        let t = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(lines.err("boundary face needs 3 vertex ids"));
        }
        let v: Vec<usize> = lines.numbers(&t)?;
        bfaces.push([v[0], v[1], v[2]]);
    }
    SimplicialMesh::new(vertices, tets, regions, bfaces)
}

/// Serializes a mesh; coordinates use 17 significant digits.
pub fn write_pbmesh(mesh: &SimplicialMesh) -> String {
    let mut s = String::new();
    s.push_str("pbmesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "tets {}", mesh.num_elements());
    for (t, r) in mesh.tets().iter().zip(mesh.regions()) {
        let _ = writeln!(s, "{} {} {} {} {}", t[0], t[1], t[2], t[3], r.tag());
    }
    let _ = writeln!(s, "bfaces {}", mesh.boundary_faces().len());
    for f in mesh.boundary_faces() {
        let _ = writeln!(s, "{} {} {}", f[0], f[1], f[2]);
    }
    s
}
