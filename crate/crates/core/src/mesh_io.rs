//! OBJ and OFF reading and writing (vertices and faces only).
//!
//! Coordinates are written with 17 significant digits so that a write/read
//! round trip is bit-exact. Meshes of dimension other than 3 are padded or
//! truncated to 3 on write; reading always produces a 3-dimensional mesh.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geom::TriangleMesh;

fn coord3(mesh: &TriangleMesh, i: usize) -> [f64; 3] {
    let v = mesh.vertex(i);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = v.get(k).copied().unwrap_or(0.0);
    }
    out
}

pub fn obj_string(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for i in 0..mesh.vertex_count() {
        let [x, y, z] = coord3(mesh, i);
        let _ = writeln!(s, "v {x:.16e} {y:.16e} {z:.16e}");
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn off_string(mesh: &TriangleMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.vertex_count(), mesh.triangles().len());
    for i in 0..mesh.vertex_count() {
        let [x, y, z] = coord3(mesh, i);
        let _ = writeln!(s, "{x:.16e} {y:.16e} {z:.16e}");
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn write_obj(mesh: &TriangleMesh, mut w: impl Write) -> Result<()> {
    w.write_all(obj_string(mesh).as_bytes())?;
    Ok(())
}

pub fn write_off(mesh: &TriangleMesh, mut w: impl Write) -> Result<()> {
    w.write_all(off_string(mesh).as_bytes())?;
    Ok(())
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.ok_or_else(|| Error::Parse(format!("line {line}: missing coordinate")))?
        .parse()
        .map_err(|e| Error::Parse(format!("line {line}: {e}")))
}

fn fan(poly: &[usize], tris: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len().saturating_sub(1) {
        tris.push([poly[0], poly[k], poly[k + 1]]);
    }
}

/// Reads `v` and `f` records; polygons are fan-triangulated, texture and
/// normal indices (`f 1/2/3`) are ignored, negative indices are relative.
pub fn read_obj(r: impl BufRead) -> Result<TriangleMesh> {
    let mut coords = Vec::new();
    let mut tris = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                for _ in 0..3 {
                    coords.push(parse_f64(it.next(), n + 1)?);
                }
            }
            Some("f") => {
                let nv = coords.len() / 3;
                let mut poly = Vec::new();
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
                    let i = if idx < 0 { nv as i64 + idx } else { idx - 1 };
                    if i < 0 || i as usize >= nv {
                        return Err(Error::Parse(format!("line {}: face index {idx} out of range", n + 1)));
                    }
                    poly.push(i as usize);
                }
                fan(&poly, &mut tris);
            }
            _ => {}
        }
    }
    TriangleMesh::new(3, coords, tris)
}

pub fn read_off(r: impl BufRead) -> Result<TriangleMesh> {
    let mut tokens = Vec::new();
    for line in r.lines() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        tokens.extend(body.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    if it.next().as_deref() != Some("OFF") {
        return Err(Error::Parse("missing OFF header".into()));
    }
    let mut count = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse("truncated OFF file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("{e}")))
    };
    let nv = count()?;
    let nf = count()?;
    let _ne = count()?;
    let mut coords = Vec::with_capacity(3 * nv);
    for _ in 0..3 * nv {
        coords.push(count_f64(&mut it)?);
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = count_usize(&mut it)?;
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let i = count_usize(&mut it)?;
            if i >= nv {
                return Err(Error::Parse(format!("face index {i} out of range")));
            }
            poly.push(i);
        }
        fan(&poly, &mut tris);
    }
    TriangleMesh::new(3, coords, tris)
}

fn count_f64(it: &mut impl Iterator<Item = String>) -> Result<f64> {
    it.next()
        .ok_or_else(|| Error::Parse("truncated OFF file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("{e}")))
}

fn count_usize(it: &mut impl Iterator<Item = String>) -> Result<usize> {
    it.next()
        .ok_or_else(|| Error::Parse("truncated OFF file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("{e}")))
}
