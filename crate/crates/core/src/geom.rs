//! Geometry primitives: unit vectors, great-circle arcs, polylines and
//! triangle meshes in `R^n`.
//!
//! Everything here is dimension-generic. Areas of triangles and fans are
//! computed from the norm of the wedge product, which reduces to the cross
//! product when `n = 3`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point (or vector) of the ambient space.
pub type Point = DVector<f64>;

/// Tolerance on `‖v‖ = 1` for [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

/// Triangles with area below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

pub fn point(coords: &[f64]) -> Point {
    DVector::from_column_slice(coords)
}

/// Basis vector `e_{index}` of `R^dim` (zero-based index).
pub fn basis(dim: usize, index: usize) -> Point {
    let mut v = DVector::zeros(dim);
    v[index] = 1.0;
    v
}

/// Norm of `a ∧ b`, i.e. the area of the parallelogram spanned by `a` and `b`.
pub fn wedge_norm(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() == 3 {
        let c0 = a[1] * b[2] - a[2] * b[1];
        let c1 = a[2] * b[0] - a[0] * b[2];
        let c2 = a[0] * b[1] - a[1] * b[0];
        return (c0 * c0 + c1 * c1 + c2 * c2).sqrt();
    }
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let m = a[i] * b[j] - a[j] * b[i];
            acc += m * m;
        }
    }
    acc.sqrt()
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Area of the triangle `(a, b, c)` in any dimension.
pub fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let n = a.len();
    let mut u = [0.0; 8];
    let mut v = [0.0; 8];
    if n <= 8 {
        for i in 0..n {
            u[i] = b[i] - a[i];
            v[i] = c[i] - a[i];
        }
        0.5 * wedge_norm(&u[..n], &v[..n])
    } else {
        let u: Vec<f64> = (0..n).map(|i| b[i] - a[i]).collect();
        let v: Vec<f64> = (0..n).map(|i| c[i] - a[i]).collect();
        0.5 * wedge_norm(&u, &v)
    }
}

/// A direction on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Point);

impl UnitVector {
    /// Normalizes `v`; fails on the zero vector.
    pub fn normalize(v: Point) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(UnitVector(v / n))
    }

    /// Accepts `v` only if it is already unit within [`UNIT_TOL`].
    pub fn from_unit(v: Point) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return invalid(format!("vector has norm {n}, expected 1"));
        }
        Ok(UnitVector(v))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::normalize(point(coords))
    }

    pub fn axis(dim: usize, index: usize) -> Self {
        UnitVector(basis(dim, index))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_point(&self) -> &Point {
        &self.0
    }

    pub fn into_point(self) -> Point {
        self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0.dot(other)
    }

    /// Pads with zero coordinates up to `dim`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        Ok(UnitVector(embed_point(&self.0, dim)?))
    }
}

impl std::ops::Neg for &UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        UnitVector(-&self.0)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let p = DVector::from_vec(v);
        // serialized values carry 17 digits; renormalize away the last ulp
        if (p.norm() - 1.0).abs() > 1e-9 {
            return invalid("serialized unit vector is not unit");
        }
        UnitVector::normalize(p)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Vec<f64> {
        u.0.as_slice().to_vec()
    }
}

/// Pads `p` with zeros up to dimension `dim`.
pub fn embed_point(p: &Point, dim: usize) -> Result<Point> {
    if dim < p.len() {
        return invalid(format!("cannot embed R^{} into R^{dim}", p.len()));
    }
    let mut out = DVector::zeros(dim);
    out.rows_mut(0, p.len()).copy_from(p);
    Ok(out)
}

/// An arc of a great circle, or a full great circle.
///
/// The arc is `σ ↦ cos σ·e1 + sin σ·e2` for `σ ∈ [0, angle]`, so `e1` is the
/// start point and the parametrization has unit speed.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalArc {
    e1: UnitVector,
    e2: UnitVector,
    angle: f64,
    full_circle: bool,
    // stored so that sampling reproduces the endpoint bit-exactly
    end_point: Point,
}

impl SphericalArc {
    /// Arc from `start` through `via` to `end`. `via` pins the great circle
    /// (needed when `end = -start`) and must lie strictly inside the arc.
    pub fn through(start: &UnitVector, via: &UnitVector, end: &UnitVector) -> Result<Self> {
        let a = start.as_point();
        let w = via.as_point() - a * a.dot(via.as_point());
        let e2 = UnitVector::normalize(w)
            .map_err(|_| Error::InvalidArgument("arc via point is parallel to start".into()))?;
        let b = end.as_point();
        let c1 = b.dot(a);
        let c2 = b.dot(e2.as_point());
        let off_plane = (b - a * c1 - e2.as_point() * c2).norm();
        if off_plane > 1e-10 {
            return invalid(format!("arc endpoints not coplanar with via (off by {off_plane:e})"));
        }
        let mut angle = c2.atan2(c1);
        if angle <= 0.0 {
            angle += TAU;
        }
        if angle > std::f64::consts::PI + 1e-9 {
            return invalid("arc longer than a half circle");
        }
        let via_angle = via.as_point().dot(e2.as_point()).atan2(via.as_point().dot(a));
        if !(via_angle > 0.0 && via_angle < angle) {
            return invalid("via point does not lie inside the arc");
        }
        Ok(SphericalArc { e1: start.clone(), e2, angle, full_circle: false, end_point: end.as_point().clone() })
    }

    /// Arc from `start` to `end` along the shorter great circle branch.
    pub fn shortest(start: &UnitVector, end: &UnitVector) -> Result<Self> {
        let mid = start.as_point() + end.as_point();
        let via = UnitVector::normalize(mid)
            .map_err(|_| Error::InvalidArgument("antipodal endpoints need a via point".into()))?;
        Self::through(start, &via, end)
    }

    /// Full great circle through the orthonormal pair `(e1, e2)`.
    pub fn full(e1: &UnitVector, e2: &UnitVector) -> Result<Self> {
        if e1.as_point().dot(e2.as_point()).abs() > 1e-12 {
            return invalid("circle frame is not orthogonal");
        }
        Ok(SphericalArc { e1: e1.clone(), e2: e2.clone(), angle: TAU, full_circle: true, end_point: e1.as_point().clone() })
    }

    pub fn dim(&self) -> usize {
        self.e1.dim()
    }

    pub fn e1(&self) -> &UnitVector {
        &self.e1
    }

    pub fn e2(&self) -> &UnitVector {
        &self.e2
    }

    /// Arc length in radians (`2π` for a full circle).
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn is_full_circle(&self) -> bool {
        self.full_circle
    }

    pub fn point_at(&self, sigma: f64) -> Point {
        self.e1.as_point() * sigma.cos() + self.e2.as_point() * sigma.sin()
    }

    pub fn tangent_at(&self, sigma: f64) -> Point {
        self.e1.as_point() * (-sigma.sin()) + self.e2.as_point() * sigma.cos()
    }

    pub fn start(&self) -> Point {
        self.e1.as_point().clone()
    }

    pub fn end(&self) -> Point {
        self.end_point.clone()
    }

    pub fn midpoint(&self) -> Point {
        self.point_at(0.5 * self.angle)
    }

    /// `sup_{y ∈ arc} ⟨x, y⟩` from the coordinates `c1 = ⟨x,e1⟩`, `c2 = ⟨x,e2⟩`.
    pub fn sup_from_coords(&self, c1: f64, c2: f64) -> f64 {
        arc_support(c1, c2, self.angle, self.full_circle)
    }

    /// `sup_{y ∈ arc} ⟨x, y⟩`, computed in closed form.
    pub fn support(&self, x: &Point) -> f64 {
        self.sup_from_coords(x.dot(self.e1.as_point()), x.dot(self.e2.as_point()))
    }

    /// The point of the arc maximizing `⟨x, ·⟩` (first one on ties).
    pub fn argmax(&self, x: &Point) -> Point {
        let c1 = x.dot(self.e1.as_point());
        let c2 = x.dot(self.e2.as_point());
        let h = c1.hypot(c2);
        if self.full_circle || in_wedge(c1, c2, self.angle) {
            if h == 0.0 {
                return self.start();
            }
            return (self.e1.as_point() * c1 + self.e2.as_point() * c2) / h;
        }
        let end = c1 * self.angle.cos() + c2 * self.angle.sin();
        if c1 >= end {
            self.start()
        } else {
            self.end()
        }
    }

    /// Embeds the arc into `R^dim` by zero padding.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        Ok(SphericalArc {
            e1: self.e1.embed(dim)?,
            e2: self.e2.embed(dim)?,
            angle: self.angle,
            full_circle: self.full_circle,
            end_point: embed_point(&self.end_point, dim)?,
        })
    }
}

/// Whether the planar direction `(c1, c2)` lies in the wedge of angle `angle`
/// starting at the positive first axis (`angle ≤ π`).
pub(crate) fn in_wedge(c1: f64, c2: f64, angle: f64) -> bool {
    c2 >= 0.0 && c1 * angle.sin() - c2 * angle.cos() >= 0.0
}

pub(crate) fn arc_support(c1: f64, c2: f64, angle: f64, full: bool) -> f64 {
    if full || in_wedge(c1, c2, angle) {
        c1.hypot(c2)
    } else {
        c1.max(c1 * angle.cos() + c2 * angle.sin())
    }
}

/// Ordered sequence of points, optionally closed (last joins first implicitly).
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        if vertices.is_empty() {
            return invalid("polyline needs at least one vertex");
        }
        let dim = vertices[0].len();
        if vertices.iter().any(|v| v.len() != dim) {
            return invalid("polyline vertices have mixed dimensions");
        }
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return invalid("polyline has repeated consecutive vertices");
            }
        }
        if closed && vertices.len() > 1 && vertices[0] == vertices[vertices.len() - 1] {
            return invalid("closed polyline repeats its first vertex");
        }
        Ok(Polyline { vertices, closed })
    }

    /// Like [`Polyline::new`] but silently drops repeated consecutive vertices.
    pub fn dedup(mut vertices: Vec<Point>, closed: bool) -> Result<Self> {
        vertices.dedup();
        if closed {
            while vertices.len() > 1 && vertices[0] == vertices[vertices.len() - 1] {
                vertices.pop();
            }
        }
        Self::new(vertices, closed)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Consecutive vertex pairs, including the closing segment if closed.
    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.vertices.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

/// Samples `m` points at equal angular spacing along `arc`.
///
/// Open arcs reproduce both endpoints exactly; a full circle yields a closed
/// polyline starting at `e1`.
pub fn arc_sample(arc: &SphericalArc, m: usize) -> Result<Polyline> {
    if m < 2 {
        return invalid("arc_sample needs m >= 2");
    }
    if arc.is_full_circle() {
        let pts = (0..m).map(|k| arc.point_at(TAU * k as f64 / m as f64)).collect();
        return Polyline::new(pts, true);
    }
    let mut pts: Vec<Point> = (0..m)
        .map(|k| arc.point_at(arc.angle() * k as f64 / (m - 1) as f64))
        .collect();
    pts[0] = arc.start();
    pts[m - 1] = arc.end();
    Polyline::new(pts, false)
}

/// Area of the triangle fan from `apex` over `curve`:
/// `Σ ½‖(p_i − apex) ∧ (p_{i+1} − apex)‖`.
pub fn cone_fan_area(apex: &Point, curve: &Polyline) -> f64 {
    curve
        .segments()
        .map(|(p, q)| {
            let a = p - apex;
            let b = q - apex;
            0.5 * wedge_norm(a.as_slice(), b.as_slice())
        })
        .sum()
}

/// Drops trailing coordinates, keeping the first `target_dim`.
pub fn orthogonal_project(points: &[Point], target_dim: usize) -> Result<Vec<Point>> {
    if let Some(p) = points.iter().find(|p| p.len() < target_dim) {
        return invalid(format!("cannot project R^{} onto R^{target_dim}", p.len()));
    }
    Ok(points.iter().map(|p| p.rows(0, target_dim).into_owned()).collect())
}

/// Oriented triangle surface with boundary, stored as flat coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    dim: usize,
    coords: Vec<f64>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
}

impl TriangleMesh {
    /// Builds a mesh from flat coordinates (`dim` per vertex). Triangles with
    /// area `≤ 1e-14` are dropped and counted in the log.
    pub fn new(dim: usize, coords: Vec<f64>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if dim < 2 {
            return invalid("mesh dimension must be at least 2");
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidMesh("coordinate count not a multiple of dim".into()));
        }
        let nv = coords.len() / dim;
        let mut kept = Vec::with_capacity(triangles.len());
        let mut dropped = 0usize;
        for t in triangles {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t:?} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                dropped += 1;
                continue;
            }
            let area = triangle_area(
                &coords[t[0] * dim..(t[0] + 1) * dim],
                &coords[t[1] * dim..(t[1] + 1) * dim],
                &coords[t[2] * dim..(t[2] + 1) * dim],
            );
            if area > DEGENERATE_AREA {
                kept.push(t);
            } else {
                dropped += 1;
            }
        }
        if dropped > 0 {
            log::debug!("dropped {dropped} degenerate triangles");
        }
        let boundary_loops = boundary_chains(&kept);
        Ok(TriangleMesh { dim, coords, triangles: kept, boundary_loops })
    }

    pub fn from_points(points: &[Point], triangles: Vec<[usize; 3]>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(3);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::InvalidMesh("mixed vertex dimensions".into()));
            }
            coords.extend_from_slice(p.as_slice());
        }
        Self::new(dim, coords, triangles)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertex_point(&self, i: usize) -> Point {
        point(self.vertex(i))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary curves: closed cycles, or open chains between vertices where
    /// more than two boundary edges meet (e.g. the spine ends of a Y).
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertex_count()];
        for l in &self.boundary_loops {
            for &v in l {
                flags[v] = true;
            }
        }
        flags
    }

    /// Edges incident to exactly one triangle, as `(min, max)` pairs.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = edge_counts(&self.triangles)
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(k, _)| k)
            .collect();
        e.sort_unstable();
        e
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(self.vertex(a), self.vertex(b), self.vertex(c))
    }

    /// Replaces coordinates, keeping the connectivity (no degeneracy filtering).
    pub fn with_coords(&self, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != self.coords.len() {
            return Err(Error::InvalidMesh("coordinate array has the wrong length".into()));
        }
        Ok(TriangleMesh { coords, ..self.clone() })
    }

    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for i in 0..self.vertex_count() {
            let p = f(self.vertex(i));
            if p.len() != self.dim {
                return Err(Error::InvalidMesh("map changed the dimension".into()));
            }
            coords.extend(p);
        }
        self.with_coords(coords)
    }

    /// True when every interior edge is traversed in opposite directions by
    /// its two triangles. Edges shared by three or more triangles are skipped.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let counts = edge_counts(&self.triangles);
        directed.iter().all(|(&(a, b), &c)| {
            let key = (a.min(b), a.max(b));
            counts.get(&key).copied().unwrap_or(0) != 2 || c == 1
        })
    }
}

fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn boundary_chains(triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut edges: Vec<(usize, usize)> = edge_counts(triangles)
        .into_iter()
        .filter(|(_, c)| *c == 1)
        .map(|(k, _)| k)
        .collect();
    edges.sort_unstable();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in &edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for v in adj.values_mut() {
        v.sort_unstable();
    }
    let mut used: std::collections::HashSet<(usize, usize)> = Default::default();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut chains = Vec::new();
    let mut starts: Vec<usize> = adj.keys().copied().filter(|v| adj[v].len() != 2).collect();
    starts.sort_unstable();
    // open chains between junctions first
    for &s in &starts {
        for &n in &adj[&s] {
            if used.contains(&key(s, n)) {
                continue;
            }
            let mut chain = vec![s];
            let (mut prev, mut cur) = (s, n);
            used.insert(key(prev, cur));
            loop {
                chain.push(cur);
                if adj[&cur].len() != 2 {
                    break;
                }
                let next = adj[&cur].iter().copied().find(|&x| x != prev && !used.contains(&key(cur, x)));
                match next {
                    Some(x) => {
                        used.insert(key(cur, x));
                        prev = cur;
                        cur = x;
                    }
                    None => break,
                }
            }
            chains.push(chain);
        }
    }
    // remaining edges form simple cycles
    for &(a, b) in &edges {
        if used.contains(&key(a, b)) {
            continue;
        }
        let mut cycle = vec![a];
        let (mut prev, mut cur) = (a, b);
        used.insert(key(a, b));
        while cur != a {
            cycle.push(cur);
            let next = adj[&cur].iter().copied().find(|&x| x != prev && !used.contains(&key(cur, x)));
            match next {
                Some(x) => {
                    used.insert(key(cur, x));
                    prev = cur;
                    cur = x;
                }
                None => break,
            }
        }
        chains.push(cycle);
    }
    chains
}

/// Open cylinder `x² + y² = ρ²`, `0 ≤ z ≤ h`, with `n` vertices per ring
/// and `m` bands.
pub fn cylinder_mesh(radius: f64, height: f64, n: usize, m: usize) -> Result<TriangleMesh> {
    if n < 3 || m < 1 {
        return invalid("a cylinder needs at least 3 vertices per ring and 1 band");
    }
    let mut pts = Vec::with_capacity(n * (m + 1));
    for j in 0..=m {
        for i in 0..n {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            pts.push(point(&[radius * a.cos(), radius * a.sin(), height * j as f64 / m as f64]));
        }
    }
    let mut tris = Vec::with_capacity(2 * n * m);
    for j in 0..m {
        for i in 0..n {
            let (a, b) = (j * n + i, j * n + (i + 1) % n);
            tris.push([a, b, b + n]);
            tris.push([a, b + n, a + n]);
        }
    }
    TriangleMesh::from_points(&pts, tris)
}

/// Total area of the mesh.
pub fn mesh_area(mesh: &TriangleMesh) -> f64 {
    (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn e(dim: usize, i: usize) -> UnitVector {
        UnitVector::axis(dim, i)
    }

    #[test]
    fn quarter_arc_midpoint() {
        let arc = SphericalArc::shortest(&e(2, 0), &e(2, 1)).unwrap();
        let pl = arc_sample(&arc, 3).unwrap();
        let v = pl.vertices();
        assert_eq!(v[0], point(&[1.0, 0.0]));
        assert_abs_diff_eq!(v[1][0], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1][1], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(v[2], point(&[0.0, 1.0]));
    }

    #[test]
    fn full_circle_four_points() {
        let c = SphericalArc::full(&e(2, 0), &e(2, 1)).unwrap();
        let pl = arc_sample(&c, 4).unwrap();
        assert!(pl.is_closed());
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, q) in pl.vertices().iter().zip(expect) {
            assert_abs_diff_eq!(p[0], q[0], epsilon = 1e-15);
            assert_abs_diff_eq!(p[1], q[1], epsilon = 1e-15);
        }
    }

    #[test]
    fn half_circle_through_pole() {
        let a1 = e(3, 0);
        let v = e(3, 2);
        let arc = SphericalArc::through(&a1, &v, &(-&a1)).unwrap();
        assert_abs_diff_eq!(arc.angle(), PI, epsilon = 1e-15);
        let pl = arc_sample(&arc, 3).unwrap();
        assert_abs_diff_eq!((&pl.vertices()[1] - v.as_point()).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(pl.vertices()[2], -a1.as_point());
    }

    #[test]
    fn arc_sample_rejects_small_m() {
        let arc = SphericalArc::shortest(&e(2, 0), &e(2, 1)).unwrap();
        assert!(arc_sample(&arc, 1).is_err());
    }

    #[test]
    fn sampled_points_are_unit() {
        let a = UnitVector::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let b = UnitVector::from_slice(&[-2.0, 0.5, 1.0]).unwrap();
        let arc = SphericalArc::shortest(&a, &b).unwrap();
        for p in arc_sample(&arc, 57).unwrap().vertices() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chord_sum_converges_quadratically() {
        let a = UnitVector::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        let b = UnitVector::from_slice(&[0.0, 1.0, 1.0]).unwrap();
        let arc = SphericalArc::shortest(&a, &b).unwrap();
        let err = |m| (arc_sample(&arc, m).unwrap().length() - arc.angle()).abs();
        let r = err(33) / err(65);
        assert!((r - 4.0).abs() < 0.1, "ratio {r}");
    }

    #[test]
    fn support_matches_dense_sampling() {
        let a = UnitVector::from_slice(&[1.0, 0.2, 0.0]).unwrap();
        let b = UnitVector::from_slice(&[-0.3, 1.0, 0.4]).unwrap();
        let arc = SphericalArc::shortest(&a, &b).unwrap();
        let samples = arc_sample(&arc, 20001).unwrap();
        for x in [[0.3, 0.9, -0.2], [-1.0, -0.1, 0.3], [0.5, -0.7, 0.9], [0.0, 0.0, 1.0]] {
            let x = point(&x);
            let brute = samples.vertices().iter().map(|y| y.dot(&x)).fold(f64::MIN, f64::max);
            assert_abs_diff_eq!(arc.support(&x), brute, epsilon = 1e-8);
            assert_abs_diff_eq!(arc.argmax(&x).dot(&x), arc.support(&x), epsilon = 1e-12);
        }
    }

    #[test]
    fn lateral_cone_area() {
        // unit circle at height 1 seen from the origin: slant √2
        let m = 4000;
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let s = TAU * k as f64 / m as f64;
                point(&[s.cos(), s.sin(), 1.0])
            })
            .collect();
        let pl = Polyline::new(pts, true).unwrap();
        let area = cone_fan_area(&point(&[0.0, 0.0, 0.0]), &pl);
        assert_abs_diff_eq!(area, PI * 2f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn fan_over_arc_is_half_l_times_length() {
        // constant distance l with radial ⊥ tangent: area → ½·l·L
        let l = 0.9;
        let theta = 1.3;
        let m = 2001;
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let s = theta * k as f64 / (m - 1) as f64;
                point(&[l * s.cos(), l * s.sin(), 0.0])
            })
            .collect();
        let pl = Polyline::new(pts, false).unwrap();
        let area = cone_fan_area(&point(&[0.0, 0.0, 0.0]), &pl);
        assert_abs_diff_eq!(area, 0.5 * l * (l * theta), epsilon = 1e-7);
    }

    #[test]
    fn fan_degenerate_when_apex_on_line() {
        let pl = Polyline::new(vec![point(&[1.0, 0.0]), point(&[2.0, 0.0]), point(&[3.0, 0.0])], false)
            .unwrap();
        assert_eq!(cone_fan_area(&point(&[0.0, 0.0]), &pl), 0.0);
    }

    #[test]
    fn fan_additive_and_collinear_insertion_invariant() {
        let apex = point(&[0.1, -0.2, 0.3]);
        let a = point(&[1.0, 0.0, 0.0]);
        let b = point(&[0.0, 1.0, 0.5]);
        let c = point(&[-1.0, 0.2, 0.0]);
        let whole = Polyline::new(vec![a.clone(), b.clone(), c.clone()], false).unwrap();
        let first = Polyline::new(vec![a.clone(), b.clone()], false).unwrap();
        let second = Polyline::new(vec![b.clone(), c.clone()], false).unwrap();
        let sum = cone_fan_area(&apex, &first) + cone_fan_area(&apex, &second);
        assert_abs_diff_eq!(cone_fan_area(&apex, &whole), sum, epsilon = 1e-15);
        let mid = (&a + &b) * 0.5;
        let refined = Polyline::new(vec![a, mid, b, c], false).unwrap();
        assert_abs_diff_eq!(cone_fan_area(&apex, &refined), cone_fan_area(&apex, &whole), epsilon = 1e-12);
    }

    #[test]
    fn unit_square_area() {
        let m = TriangleMesh::new(3, vec![0., 0., 0., 1., 0., 0., 1., 1., 0., 0., 1., 0.], vec![[0, 1, 2], [0, 2, 3]])
            .unwrap();
        assert_abs_diff_eq!(mesh_area(&m), 1.0, epsilon = 1e-15);
        assert_eq!(m.boundary_loops().len(), 1);
        assert_eq!(m.boundary_loops()[0].len(), 4);
        assert!(m.is_consistently_oriented());
        let doubled = m.map_points(|p| p.iter().map(|x| 2.0 * x).collect()).unwrap();
        assert_abs_diff_eq!(mesh_area(&doubled), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_triangles_dropped() {
        let m = TriangleMesh::new(2, vec![0., 0., 1., 0., 2., 0., 0., 1.], vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.triangles().len(), 1);
    }

    #[test]
    fn project_drops_trailing_coordinates() {
        let p = orthogonal_project(&[point(&[1.0, 2.0, 3.0])], 2).unwrap();
        assert_eq!(p[0], point(&[1.0, 2.0]));
        assert!(orthogonal_project(&[point(&[1.0, 2.0])], 3).is_err());
        let flat = point(&[0.4, -0.3, 0.0]);
        let q = orthogonal_project(&[flat.clone(), point(&[0.0, 0.0, 0.0])], 2).unwrap();
        assert_abs_diff_eq!((&q[0] - &q[1]).norm(), flat.norm(), epsilon = 1e-15);
    }

    #[test]
    fn y_boundary_is_split_at_junctions() {
        // three triangles sharing the edge (0,1)
        let coords = vec![0., 0., 0., 0., 0., 1., 1., 0., 0.5, -0.5, 0.8, 0.5, -0.5, -0.8, 0.5];
        let m = TriangleMesh::new(3, coords, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]]).unwrap();
        assert_eq!(m.boundary_loops().len(), 3);
        assert!(m.boundary_loops().iter().all(|c| c.len() == 3));
    }
}
