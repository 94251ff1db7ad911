//! Planar facts behind the slice bounds: the sum of distances to the sides of
//! an equilateral triangle is constant, so the Fermat point of three gates
//! on its sides gives a length bound that does not depend on the gates.

use crate::error::{invalid, Result};

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn dist(a: P2, b: P2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Line `⟨x − point, normal⟩ = 0` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line2 {
    pub point: P2,
    pub normal: P2,
}

impl Line2 {
    pub fn through(a: P2, b: P2) -> Result<Self> {
        let d = sub(b, a);
        let len = d[0].hypot(d[1]);
        if !(len > 0.0) {
            return invalid("a line needs two distinct points");
        }
        Ok(Line2 { point: a, normal: [-d[1] / len, d[0] / len] })
    }

    pub fn signed_distance(&self, p: P2) -> f64 {
        dot(sub(p, self.point), self.normal)
    }

    pub fn distance(&self, p: P2) -> f64 {
        self.signed_distance(p).abs()
    }

    fn flipped(self) -> Self {
        Line2 { point: self.point, normal: [-self.normal[0], -self.normal[1]] }
    }

    fn intersect(&self, other: &Line2) -> Option<P2> {
        let (a, b) = (self.normal, other.normal);
        let det = a[0] * b[1] - a[1] * b[0];
        if det.abs() < 1e-14 {
            return None;
        }
        let (c1, c2) = (dot(a, self.point), dot(b, other.point));
        Some([(c1 * b[1] - c2 * a[1]) / det, (a[0] * c2 - b[0] * c1) / det])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilateralTriangle {
    pub vertices: [P2; 3],
}

impl EquilateralTriangle {
    /// Triangle with the given centre and side, one vertex at angle `rotation`.
    pub fn new(center: P2, side: f64, rotation: f64) -> Result<Self> {
        if !(side > 0.0) {
            return invalid("side must be positive");
        }
        let r = side / 3f64.sqrt();
        let v = |k: usize| {
            let a = rotation + std::f64::consts::TAU * k as f64 / 3.0;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        };
        Ok(EquilateralTriangle { vertices: [v(0), v(1), v(2)] })
    }

    pub fn side(&self) -> f64 {
        dist(self.vertices[0], self.vertices[1])
    }

    pub fn height(&self) -> f64 {
        self.side() * 3f64.sqrt() / 2.0
    }

    pub fn inradius(&self) -> f64 {
        self.height() / 3.0
    }

    pub fn center(&self) -> P2 {
        let [a, b, c] = self.vertices;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Side lines with normals pointing into the triangle; line `k` is
    /// opposite vertex `k`.
    pub fn lines(&self) -> [Line2; 3] {
        let c = self.center();
        [0, 1, 2].map(|k| {
            let l = Line2::through(self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3]).expect("distinct vertices");
            if l.signed_distance(c) < 0.0 {
                l.flipped()
            } else {
                l
            }
        })
    }

    pub fn contains(&self, p: P2, tol: f64) -> bool {
        self.lines().iter().all(|l| l.signed_distance(p) >= -tol)
    }
}

/// Sum of the distances from an interior point to the three sides.
pub fn viviani_sum(tri: &EquilateralTriangle, p: P2) -> Result<f64> {
    if !tri.contains(p, 1e-12 * tri.side()) {
        return invalid(format!("point {p:?} lies outside the triangle"));
    }
    Ok(tri.lines().iter().map(|l| l.distance(p)).sum())
}

/// Fermat (Torricelli) point of three points.
pub fn fermat_point(p: [P2; 3]) -> P2 {
    for k in 0..3 {
        let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        let (u, v) = (sub(b, a), sub(c, a));
        let (lu, lv) = (u[0].hypot(u[1]), v[0].hypot(v[1]));
        if lu == 0.0 || lv == 0.0 || dot(u, v) / (lu * lv) <= -0.5 {
            return a;
        }
    }
    // apex of the equilateral triangle erected outward on the side (b, c)
    let apex = |a: P2, b: P2, c: P2| -> P2 {
        let d = sub(c, b);
        let h = 3f64.sqrt() / 2.0;
        let mid = [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0];
        let n = [-d[1] * h, d[0] * h];
        let cand = [mid[0] + n[0], mid[1] + n[1]];
        if dot(sub(cand, mid), sub(a, mid)) > 0.0 {
            [mid[0] - n[0], mid[1] - n[1]]
        } else {
            cand
        }
    };
    let a2 = apex(p[0], p[1], p[2]);
    let b2 = apex(p[1], p[2], p[0]);
    let l1 = Line2::through(p[0], a2).expect("distinct");
    let l2 = Line2::through(p[1], b2).expect("distinct");
    l1.intersect(&l2).unwrap_or(p[0])
}

/// Lower bound on the length of any connected set meeting the three gates,
/// where gate `k` lies on line `k` and the lines bound an equilateral
/// triangle: the signed distance sum from the gates' Fermat point, which is
/// the triangle's height whatever the gates are.
pub fn fermat_lower_bound(gates: [P2; 3], lines: [Line2; 3]) -> Result<f64> {
    let corners: Vec<P2> = (0..3)
        .map(|k| lines[(k + 1) % 3].intersect(&lines[(k + 2) % 3]))
        .collect::<Option<_>>()
        .ok_or_else(|| crate::error::Error::InvalidArgument("parallel rim lines".into()))?;
    let scale = dist(corners[0], corners[1]).max(dist(corners[1], corners[2]));
    let sides = [dist(corners[1], corners[2]), dist(corners[2], corners[0]), dist(corners[0], corners[1])];
    if sides.iter().any(|s| (s - scale).abs() > 1e-9 * scale) {
        return invalid("rim lines do not bound an equilateral triangle");
    }
    let center = [(corners[0][0] + corners[1][0] + corners[2][0]) / 3.0, (corners[0][1] + corners[1][1] + corners[2][1]) / 3.0];
    let inward = lines.map(|l| if l.signed_distance(center) < 0.0 { l.flipped() } else { l });
    for k in 0..3 {
        if inward[k].distance(gates[k]) > 1e-9 * scale {
            return invalid(format!("gate {k} is not on its rim line"));
        }
        if dist(gates[k], gates[(k + 1) % 3]) < 1e-12 * scale {
            return invalid("gates are not separated");
        }
    }
    let c = fermat_point(gates);
    Ok(inward.iter().map(|l| l.signed_distance(c)).sum())
}
