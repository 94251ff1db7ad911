//! The three two-dimensional minimal cones (plane, Y, T) as spherical graphs.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::{Point, SphericalArc, UnitVector};

/// Balance tolerance for the tangent sum at a singular direction.
pub const BALANCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Plane,
    Y,
    T,
}

impl ConeKind {
    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Plane => "plane",
            ConeKind::Y => "y",
            ConeKind::T => "t",
        }
    }
}

impl std::str::FromStr for ConeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plane" | "p" => Ok(ConeKind::Plane),
            "y" => Ok(ConeKind::Y),
            "t" => Ok(ConeKind::T),
            other => invalid(format!("unknown cone type {other:?} (expected plane, y or t)")),
        }
    }
}

impl std::fmt::Display for ConeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An arc of the spherical graph joining singular directions `i` and `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeArc {
    pub i: usize,
    pub j: usize,
    pub arc: SphericalArc,
}

/// A cone given by its trace on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeSpec {
    kind: ConeKind,
    ambient_dim: usize,
    singular_dirs: Vec<UnitVector>,
    arcs: Vec<ConeArc>,
    circles: Vec<SphericalArc>,
    eta0: f64,
}

/// One sheet of the cone: the cone over a single arc or circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Piece {
    Arc(usize),
    Circle(usize),
}

impl ConeSpec {
    /// Validates the spherical graph: arc endpoints are singular directions,
    /// three arcs meet at each singular direction with balanced tangents.
    pub fn new(
        kind: ConeKind,
        singular_dirs: Vec<UnitVector>,
        arcs: Vec<ConeArc>,
        circles: Vec<SphericalArc>,
    ) -> Result<Self> {
        let dims: Vec<usize> = singular_dirs
            .iter()
            .map(|a| a.dim())
            .chain(arcs.iter().map(|a| a.arc.dim()))
            .chain(circles.iter().map(|c| c.dim()))
            .collect();
        let ambient_dim = *dims.first().ok_or_else(|| Error::InvalidArgument("empty cone".into()))?;
        if dims.iter().any(|&d| d != ambient_dim) {
            return invalid("cone components have mixed dimensions");
        }
        let m = singular_dirs.len();
        let mut tangent_sum = vec![Point::zeros(ambient_dim); m];
        let mut degree = vec![0usize; m];
        for (k, a) in arcs.iter().enumerate() {
            if a.i >= m || a.j >= m || a.i == a.j {
                return invalid(format!("arc {k} has bad endpoint indices ({}, {})", a.i, a.j));
            }
            let gap_start = (a.arc.start() - singular_dirs[a.i].as_point()).norm();
            let gap_end = (a.arc.end() - singular_dirs[a.j].as_point()).norm();
            if gap_start > 1e-12 || gap_end > 1e-12 {
                return invalid(format!("arc {k} does not end at its singular directions"));
            }
            tangent_sum[a.i] += a.arc.tangent_at(0.0);
            tangent_sum[a.j] -= a.arc.tangent_at(a.arc.angle());
            degree[a.i] += 1;
            degree[a.j] += 1;
        }
        for j in 0..m {
            if degree[j] != 3 {
                return invalid(format!("singular direction {j} has {} arcs, expected 3", degree[j]));
            }
            let imbalance = tangent_sum[j].norm();
            if imbalance > BALANCE_TOL {
                return invalid(format!("arcs at singular direction {j} are not at 120 degrees ({imbalance:e})"));
            }
        }
        let eta0 = arcs.iter().map(|a| a.arc.angle()).fold(2.0 * PI, f64::min);
        Ok(ConeSpec { kind, ambient_dim, singular_dirs, arcs, circles, eta0 })
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn singular_dirs(&self) -> &[UnitVector] {
        &self.singular_dirs
    }

    pub fn arcs(&self) -> &[ConeArc] {
        &self.arcs
    }

    pub fn circles(&self) -> &[SphericalArc] {
        &self.circles
    }

    /// Shortest arc length.
    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Arcs first, then circles.
    pub fn pieces(&self) -> Vec<Piece> {
        (0..self.arcs.len())
            .map(Piece::Arc)
            .chain((0..self.circles.len()).map(Piece::Circle))
            .collect()
    }

    pub fn piece_curve(&self, piece: Piece) -> Result<&SphericalArc> {
        match piece {
            Piece::Arc(k) => self.arcs.get(k).map(|a| &a.arc),
            Piece::Circle(k) => self.circles.get(k),
        }
        .ok_or_else(|| Error::InvalidArgument(format!("no such piece {piece:?}")))
    }

    /// Every arc and circle of the trace, in [`ConeSpec::pieces`] order.
    pub fn curves(&self) -> impl Iterator<Item = &SphericalArc> {
        self.arcs.iter().map(|a| &a.arc).chain(self.circles.iter())
    }

    /// Total length of the spherical trace.
    pub fn trace_length(&self) -> f64 {
        self.curves().map(|c| c.angle()).sum()
    }

    /// Pads all directions with zeros up to `dim`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        let dirs = self.singular_dirs.iter().map(|a| a.embed(dim)).collect::<Result<Vec<_>>>()?;
        let arcs = self
            .arcs
            .iter()
            .map(|a| Ok(ConeArc { i: a.i, j: a.j, arc: a.arc.embed(dim)? }))
            .collect::<Result<Vec<_>>>()?;
        let circles = self.circles.iter().map(|c| c.embed(dim)).collect::<Result<Vec<_>>>()?;
        ConeSpec::new(self.kind, dirs, arcs, circles)
    }

    /// Image under an orthogonal matrix.
    pub fn rotated(&self, rot: &DMatrix<f64>) -> Result<Self> {
        let n = self.ambient_dim;
        if rot.nrows() != n || rot.ncols() != n {
            return invalid("rotation has the wrong size");
        }
        if (rot.transpose() * rot - DMatrix::identity(n, n)).amax() > 1e-12 {
            return invalid("matrix is not orthogonal");
        }
        let map = |u: &UnitVector| UnitVector::normalize(rot * u.as_point());
        let dirs = self.singular_dirs.iter().map(map).collect::<Result<Vec<_>>>()?;
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                let via = UnitVector::normalize(rot * a.arc.midpoint())?;
                let arc = SphericalArc::through(&dirs[a.i], &via, &dirs[a.j])?;
                Ok(ConeArc { i: a.i, j: a.j, arc })
            })
            .collect::<Result<Vec<_>>>()?;
        let circles = self
            .circles
            .iter()
            .map(|c| SphericalArc::full(&map(c.e1())?, &map(c.e2())?))
            .collect::<Result<Vec<_>>>()?;
        ConeSpec::new(self.kind, dirs, arcs, circles)
    }

    /// `tq + r·u(s)` on the sheet over `piece`, where `u` is the unit-speed
    /// parametrization of the arc.
    pub fn sheet_point(&self, piece: Piece, tr: &Translation, r: f64, s: f64) -> Result<Point> {
        let curve = self.piece_curve(piece)?;
        if r < 0.0 {
            return invalid("sheet radius must be nonnegative");
        }
        if !curve.is_full_circle() && !(-1e-12..=curve.angle() + 1e-12).contains(&s) {
            return invalid(format!("arc parameter {s} outside [0, {}]", curve.angle()));
        }
        Ok(tr.offset(self.ambient_dim)? + curve.point_at(s) * r)
    }
}

/// One full circle in the plane of the first two coordinates.
pub fn build_plane(n: usize) -> Result<ConeSpec> {
    if n < 2 {
        return invalid("the plane needs ambient dimension at least 2");
    }
    let circle = SphericalArc::full(&UnitVector::axis(n, 0), &UnitVector::axis(n, 1))?;
    ConeSpec::new(ConeKind::Plane, vec![], vec![], vec![circle])
}

/// Horizontal directions of the three Y half-planes.
pub fn y_horizontal_dirs() -> [[f64; 3]; 3] {
    let h = 3f64.sqrt() / 2.0;
    [[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]]
}

/// Y with its spine along the third axis.
pub fn build_y(n: usize) -> Result<ConeSpec> {
    if n < 3 {
        return invalid("the Y cone needs ambient dimension at least 3");
    }
    let north = UnitVector::axis(3, 2);
    let south = -&north;
    let mut arcs = Vec::new();
    for d in y_horizontal_dirs() {
        let via = UnitVector::from_slice(&d)?;
        arcs.push(ConeArc { i: 0, j: 1, arc: SphericalArc::through(&north, &via, &south)? });
    }
    ConeSpec::new(ConeKind::Y, vec![north, south], arcs, vec![])?.embed(n)
}

/// Vertices of the regular tetrahedron used for T, before normalization.
pub const T_VERTICES: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];

/// Cone over the edges of a regular tetrahedron inscribed in the sphere.
pub fn build_t(n: usize) -> Result<ConeSpec> {
    if n < 3 {
        return invalid("the T cone needs ambient dimension at least 3");
    }
    let dirs = T_VERTICES.iter().map(|v| UnitVector::from_slice(v)).collect::<Result<Vec<_>>>()?;
    let mut arcs = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            arcs.push(ConeArc { i, j, arc: SphericalArc::shortest(&dirs[i], &dirs[j])? });
        }
    }
    ConeSpec::new(ConeKind::T, dirs, arcs, vec![])?.embed(n)
}

pub fn build(kind: ConeKind, n: usize) -> Result<ConeSpec> {
    match kind {
        ConeKind::Plane => build_plane(n),
        ConeKind::Y => build_y(n),
        ConeKind::T => build_t(n),
    }
}

/// A translation `t·q` with `‖q‖ = 1`, `t ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub direction: UnitVector,
    pub magnitude: f64,
}

impl Translation {
    pub fn new(direction: UnitVector, magnitude: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return invalid("translation magnitude must be finite and nonnegative");
        }
        Ok(Translation { direction, magnitude })
    }

    /// Signed convenience constructor: negative `t` flips the direction.
    pub fn signed(direction: &UnitVector, t: f64) -> Result<Self> {
        if t < 0.0 {
            Self::new(-direction, -t)
        } else {
            Self::new(direction.clone(), t)
        }
    }

    pub fn zero(dim: usize) -> Self {
        Translation { direction: UnitVector::axis(dim, 0), magnitude: 0.0 }
    }

    pub fn offset(&self, dim: usize) -> Result<Point> {
        if self.direction.dim() != dim {
            return invalid(format!("translation lives in R^{}, cone in R^{dim}", self.direction.dim()));
        }
        Ok(self.direction.as_point() * self.magnitude)
    }
}

#[derive(Serialize, Deserialize)]
struct ArcJson {
    i: usize,
    j: usize,
    via: UnitVector,
}

#[derive(Serialize, Deserialize)]
struct CircleJson {
    e1: UnitVector,
    e2: UnitVector,
}

#[derive(Serialize, Deserialize)]
struct ConeJson {
    kind: ConeKind,
    ambient_dim: usize,
    singular_dirs: Vec<UnitVector>,
    arcs: Vec<ArcJson>,
    circles: Vec<CircleJson>,
}

impl Serialize for ConeSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let json = ConeJson {
            kind: self.kind,
            ambient_dim: self.ambient_dim,
            singular_dirs: self.singular_dirs.clone(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcJson {
                    i: a.i,
                    j: a.j,
                    via: UnitVector::normalize(a.arc.midpoint()).expect("arc midpoint is unit"),
                })
                .collect(),
            circles: self.circles.iter().map(|c| CircleJson { e1: c.e1().clone(), e2: c.e2().clone() }).collect(),
        };
        json.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ConeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = ConeJson::deserialize(de)?;
        let build = || -> Result<ConeSpec> {
            let dirs = json.singular_dirs;
            let mut arcs = Vec::new();
            for a in &json.arcs {
                let (start, end) = match (dirs.get(a.i), dirs.get(a.j)) {
                    (Some(s), Some(e)) => (s, e),
                    _ => return invalid("arc index out of range"),
                };
                arcs.push(ConeArc { i: a.i, j: a.j, arc: SphericalArc::through(start, &a.via, end)? });
            }
            let circles =
                json.circles.iter().map(|c| SphericalArc::full(&c.e1, &c.e2)).collect::<Result<Vec<_>>>()?;
            let spec = ConeSpec::new(json.kind, dirs, arcs, circles)?;
            if spec.ambient_dim != json.ambient_dim {
                return invalid("ambient_dim does not match the directions");
            }
            Ok(spec)
        };
        build().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn plane_structure() {
        for n in [2, 3, 5] {
            let p = build_plane(n).unwrap();
            assert_eq!((p.singular_dirs().len(), p.arcs().len(), p.circles().len()), (0, 0, 1));
            assert_eq!(p.ambient_dim(), n);
        }
        assert!(build_plane(1).is_err());
    }

    #[test]
    fn y_structure() {
        let y = build_y(3).unwrap();
        assert_eq!((y.singular_dirs().len(), y.arcs().len(), y.circles().len()), (2, 3, 0));
        for (a, d) in y.arcs().iter().zip(y_horizontal_dirs()) {
            let mid = a.arc.midpoint();
            for k in 0..3 {
                assert_abs_diff_eq!(mid[k], d[k], epsilon = 1e-15);
            }
            assert_abs_diff_eq!(a.arc.angle(), PI, epsilon = 1e-15);
        }
        assert!(build_y(2).is_err());
    }

    #[test]
    fn t_structure_and_gram() {
        let t = build_t(3).unwrap();
        assert_eq!((t.singular_dirs().len(), t.arcs().len(), t.circles().len()), (4, 6, 0));
        let d = t.singular_dirs();
        for i in 0..4 {
            for j in 0..4 {
                let g = d[i].as_point().dot(d[j].as_point());
                let expect = if i == j { 1.0 } else { -1.0 / 3.0 };
                assert_abs_diff_eq!(g, expect, epsilon = 1e-12);
                if i != j {
                    let dist = (d[i].as_point() - d[j].as_point()).norm();
                    assert_abs_diff_eq!(dist, 2.0 * 2f64.sqrt() / 3f64.sqrt(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn unbalanced_graph_is_rejected() {
        let n = UnitVector::axis(3, 2);
        let s = -&n;
        let arcs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]
            .iter()
            .map(|d| ConeArc { i: 0, j: 1, arc: SphericalArc::through(&n, &UnitVector::from_slice(d).unwrap(), &s).unwrap() })
            .collect();
        assert!(ConeSpec::new(ConeKind::Y, vec![n.clone(), s.clone()], arcs, vec![]).is_err());
    }

    #[test]
    fn embedding_pads_with_zeros() {
        let y4 = build_y(4).unwrap();
        assert_eq!(y4.ambient_dim(), 4);
        assert!(y4.singular_dirs().iter().all(|a| a.as_point()[3] == 0.0));
        let t5 = build_t(5).unwrap();
        assert_eq!(t5.arcs()[0].arc.midpoint().len(), 5);
    }

    #[test]
    fn json_round_trip() {
        for spec in [build_plane(3).unwrap(), build_y(3).unwrap(), build_t(4).unwrap()] {
            let s = serde_json::to_string(&spec).unwrap();
            let back: ConeSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back.kind(), spec.kind());
            assert_eq!(back.arcs().len(), spec.arcs().len());
            for (a, b) in back.curves().zip(spec.curves()) {
                assert!((a.midpoint() - b.midpoint()).norm() < 1e-15);
                assert!((a.angle() - b.angle()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sheet_point_at_start() {
        let t = build_t(3).unwrap();
        let p = t.sheet_point(Piece::Arc(0), &Translation::zero(3), 1.0, 0.0).unwrap();
        assert!((p - t.singular_dirs()[0].as_point()).norm() < 1e-15);
        assert!(t.sheet_point(Piece::Arc(9), &Translation::zero(3), 1.0, 0.0).is_err());
    }

    #[test]
    fn sheet_jacobian_is_r() {
        // finite-difference cross product of the partial derivatives
        let y = build_y(3).unwrap();
        let q = UnitVector::from_slice(&[0.3, -0.2, 0.5]).unwrap();
        let tr = Translation::new(q, 0.04).unwrap();
        let h = 1e-5;
        for &(r, s) in &[(0.3, 0.7), (0.8, 2.0), (0.55, 1.1)] {
            let f = |r: f64, s: f64| y.sheet_point(Piece::Arc(1), &tr, r, s).unwrap();
            let dr = (f(r + h, s) - f(r - h, s)) / (2.0 * h);
            let ds = (f(r, s + h) - f(r, s - h)) / (2.0 * h);
            let jac = crate::geom::wedge_norm(dr.as_slice(), ds.as_slice());
            assert_abs_diff_eq!(jac, r, epsilon = 1e-10);
        }
    }

    #[test]
    fn rotation_preserves_balance() {
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let rot = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let t = build_t(3).unwrap().rotated(&rot).unwrap();
        assert_eq!(t.arcs().len(), 6);
    }
}
