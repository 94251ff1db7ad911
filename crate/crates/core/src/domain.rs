//! The η-convex domain `U(K, η)`: the closed unit ball cut by a flat plate at
//! level `1 − 2η` around each singular direction and by a band at level
//! `1 − η` along the spherical trace of the cone.
//!
//! Every constraint is positively homogeneous of degree one, so the
//! Minkowski functional is simply the largest normalized constraint value.

use serde::{Deserialize, Serialize};

use crate::cones::{ConeKind, ConeSpec, Piece};
use crate::error::{invalid, Error, Result};
use crate::geom::Point;

/// Tolerance for deciding that a constraint is active.
pub const ACTIVE_TOL: f64 = 1e-10;

/// Tolerance for accepting a point as lying on `∂U`.
pub const ON_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryRegion {
    /// Flat piece around singular direction `j`.
    Plate(usize),
    /// Cylindrical piece over arc `k` of the spec.
    Band(usize),
    /// Cylindrical piece over full circle `k`.
    CircleBand(usize),
    /// What is left of the unit sphere.
    Sphere,
}

impl BoundaryRegion {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BoundaryRegion::Plate(_) => "plate",
            BoundaryRegion::Band(_) => "band",
            BoundaryRegion::CircleBand(_) => "circle_band",
            BoundaryRegion::Sphere => "sphere",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            BoundaryRegion::Plate(j) | BoundaryRegion::Band(j) | BoundaryRegion::CircleBand(j) => Some(j),
            BoundaryRegion::Sphere => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Membership {
    Interior,
    Boundary(BoundaryRegion),
    Exterior,
}

/// `U(K, η)`, treated as a closed set.
#[derive(Clone, Debug)]
pub struct ConvexDomain {
    spec: ConeSpec,
    eta: f64,
    plate_level: f64,
    band_level: f64,
    r_plate: f64,
    r1: f64,
    chord_dist: f64,
    // arc frames cached as flat slices for the inner loops
    frames: Vec<CurveFrame>,
}

#[derive(Clone, Debug)]
struct CurveFrame {
    e1: Point,
    e2: Point,
    angle: f64,
    full: bool,
}

impl CurveFrame {
    fn support(&self, x: &Point) -> f64 {
        crate::geom::arc_support(x.dot(&self.e1), x.dot(&self.e2), self.angle, self.full)
    }
}

/// Plate radius `√(1 − (1 − 2η)²)`.
pub fn plate_radius(eta: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * eta).powi(2)).sqrt()
}

/// Band half-width `R1(η) = √(1 − (1 − η)²)`.
pub fn band_half_width(eta: f64) -> f64 {
    (1.0 - (1.0 - eta).powi(2)).sqrt()
}

/// Distance from a plate center to each rim chord, `√((1−η)² − (1−2η)²)`.
pub fn chord_distance(eta: f64) -> f64 {
    ((1.0 - eta).powi(2) - (1.0 - 2.0 * eta).powi(2)).sqrt()
}

/// Area of the circular segment cut from a disk of radius `r` by a chord at
/// distance `d` from the center.
pub fn segment_area(r: f64, d: f64) -> f64 {
    if d >= r {
        return 0.0;
    }
    r * r * (d / r).acos() - d * (r * r - d * d).sqrt()
}

/// Largest η accepted by [`ConvexDomain::new`] for a cone type.
pub fn eta_upper(kind: ConeKind) -> f64 {
    match kind {
        ConeKind::Plane => 1.0,
        ConeKind::Y | ConeKind::T => 0.5,
    }
}

impl ConvexDomain {
    /// Builds `U(K, η)`; requires `0 < η < ½` (`η < 1` for the plane).
    pub fn new(spec: ConeSpec, eta: f64) -> Result<Self> {
        let upper = eta_upper(spec.kind());
        if !(eta > 0.0 && eta < upper) {
            return invalid(format!(
                "eta = {eta} is outside the admissible range 0 < eta < {upper} for the {} cone",
                spec.kind()
            ));
        }
        let frames = spec
            .curves()
            .map(|c| CurveFrame {
                e1: c.e1().as_point().clone(),
                e2: c.e2().as_point().clone(),
                angle: c.angle(),
                full: c.is_full_circle(),
            })
            .collect();
        Ok(ConvexDomain {
            eta,
            plate_level: 1.0 - 2.0 * eta,
            band_level: 1.0 - eta,
            r_plate: plate_radius(eta),
            r1: band_half_width(eta),
            chord_dist: chord_distance(eta),
            frames,
            spec,
        })
    }

    pub fn spec(&self) -> &ConeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.ambient_dim()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn plate_level(&self) -> f64 {
        self.plate_level
    }

    pub fn band_level(&self) -> f64 {
        self.band_level
    }

    /// Plate radius `R`.
    pub fn plate_radius(&self) -> f64 {
        self.r_plate
    }

    /// Band half-width `R1`.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// Full width of a band, `2·R1`.
    pub fn band_width(&self) -> f64 {
        2.0 * self.r1
    }

    pub fn chord_distance(&self) -> f64 {
        self.chord_dist
    }

    /// Exact area of one plate: the disk of radius `R` minus the three
    /// segments cut off by the neighbouring bands.
    pub fn plate_area(&self) -> f64 {
        let r = self.r_plate;
        std::f64::consts::PI * r * r - 3.0 * segment_area(r, self.chord_dist)
    }

    /// `sup ⟨x, y⟩` over the arc or circle with the given curve index.
    pub fn curve_support(&self, curve: usize, x: &Point) -> f64 {
        self.frames[curve].support(x)
    }

    /// Gauge of `U`: the largest of `‖x‖`, `⟨x,a_j⟩/(1−2η)` and the band
    /// supports divided by `1−η`. Zero at the origin.
    pub fn gauge(&self, x: &Point) -> f64 {
        let mut g = x.norm();
        for a in self.spec.singular_dirs() {
            g = g.max(a.dot(x) / self.plate_level);
        }
        for f in &self.frames {
            g = g.max(f.support(x) / self.band_level);
        }
        g
    }

    /// Minkowski functional `r_x`, so that `x / r_x ∈ ∂U`.
    pub fn minkowski_functional(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        let g = self.gauge(x);
        if !(g > 0.0) {
            return invalid("the Minkowski functional is undefined at the origin");
        }
        Ok(g)
    }

    /// Radial projection `x / r_x` onto `∂U`.
    pub fn project_to_boundary(&self, x: &Point) -> Result<Point> {
        Ok(x / self.minkowski_functional(x)?)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.gauge(x) <= 1.0 + ACTIVE_TOL
    }

    pub fn membership(&self, x: &Point) -> Membership {
        let g = self.gauge(x);
        if g < 1.0 - ACTIVE_TOL {
            Membership::Interior
        } else if g > 1.0 + ACTIVE_TOL {
            Membership::Exterior
        } else {
            Membership::Boundary(self.active_region(x))
        }
    }

    /// Region of a boundary point. Ties go to plates, then bands, then the sphere.
    pub fn classify_boundary(&self, x: &Point) -> Result<BoundaryRegion> {
        self.check_dim(x)?;
        let g = self.gauge(x);
        if (g - 1.0).abs() > ON_BOUNDARY_TOL {
            return Err(Error::OffBoundary((g - 1.0).abs()));
        }
        Ok(self.active_region(&(x / g)))
    }

    fn active_region(&self, x: &Point) -> BoundaryRegion {
        let mut best: Option<(f64, usize)> = None;
        for (j, a) in self.spec.singular_dirs().iter().enumerate() {
            let v = a.dot(x) / self.plate_level;
            if v >= 1.0 - ACTIVE_TOL && best.map_or(true, |(b, _)| v > b) {
                best = Some((v, j));
            }
        }
        if let Some((_, j)) = best {
            return BoundaryRegion::Plate(j);
        }
        let n_arcs = self.spec.arcs().len();
        let mut best: Option<(f64, usize)> = None;
        for (k, f) in self.frames.iter().enumerate() {
            let v = f.support(x) / self.band_level;
            if v >= 1.0 - ACTIVE_TOL && best.map_or(true, |(b, _)| v > b) {
                best = Some((v, k));
            }
        }
        match best {
            Some((_, k)) if k < n_arcs => BoundaryRegion::Band(k),
            Some((_, k)) => BoundaryRegion::CircleBand(k - n_arcs),
            None => BoundaryRegion::Sphere,
        }
    }

    /// Outward unit normal of `∂U` at a boundary point, from the active region.
    pub fn outward_normal(&self, x: &Point) -> Result<Point> {
        let region = self.classify_boundary(x)?;
        let frame = match region {
            BoundaryRegion::Plate(j) => return Ok(self.spec.singular_dirs()[j].as_point().clone()),
            BoundaryRegion::Sphere => return Ok(x.normalize()),
            BoundaryRegion::Band(k) => &self.frames[k],
            BoundaryRegion::CircleBand(k) => &self.frames[self.spec.arcs().len() + k],
        };
        let v = &frame.e1 * x.dot(&frame.e1) + &frame.e2 * x.dot(&frame.e2);
        Ok(v.normalize())
    }

    /// Largest `r` with `p0 + r·u ∈ U`. `p0` must be interior.
    pub fn ray_exit(&self, p0: &Point, u: &Point) -> Result<f64> {
        self.check_dim(u)?;
        Ok(RayCaster::new(self, p0)?.exit(u))
    }

    /// Distance from `x` to the (unclipped) cone `K`.
    pub fn dist_to_cone(&self, x: &Point) -> f64 {
        self.spec
            .pieces()
            .into_iter()
            .map(|p| self.dist_to_sheet(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `x` to the cone over a single arc or circle. The sheet is
    /// a planar wedge of angle at most π, so the nearest point is either the
    /// orthogonal projection or lies on one of the two edge rays.
    pub fn dist_to_sheet(&self, piece: Piece, x: &Point) -> f64 {
        let k = match piece {
            Piece::Arc(k) => k,
            Piece::Circle(k) => self.spec.arcs().len() + k,
        };
        let f = &self.frames[k];
        let c1 = x.dot(&f.e1);
        let c2 = x.dot(&f.e2);
        let n2 = x.norm_squared();
        let perp = (n2 - c1 * c1 - c2 * c2).max(0.0).sqrt();
        if f.full || crate::geom::in_wedge(c1, c2, f.angle) {
            return perp;
        }
        let ray = |c: f64| if c > 0.0 { (n2 - c * c).max(0.0).sqrt() } else { n2.sqrt() };
        let end = c1 * f.angle.cos() + c2 * f.angle.sin();
        ray(c1).min(ray(end))
    }

    pub fn sliding_neighborhood(&self, delta: f64) -> Result<SlidingNeighborhood<'_>> {
        if !(delta > 0.0 && delta < self.eta) {
            return invalid(format!("delta = {delta} must lie in (0, eta = {})", self.eta));
        }
        Ok(SlidingNeighborhood { delta, parent: self })
    }

    pub(crate) fn check_dim(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim() {
            return invalid(format!("point in R^{} but domain in R^{}", x.len(), self.dim()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> DomainJson {
        DomainJson {
            cone: self.spec.clone(),
            eta: self.eta,
            plate_level: self.plate_level,
            band_level: self.band_level,
            plate_radius: self.r_plate,
            r1: self.r1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainJson {
    pub cone: ConeSpec,
    pub eta: f64,
    pub plate_level: f64,
    pub band_level: f64,
    pub plate_radius: f64,
    pub r1: f64,
}

impl TryFrom<DomainJson> for ConvexDomain {
    type Error = Error;
    fn try_from(j: DomainJson) -> Result<Self> {
        ConvexDomain::new(j.cone, j.eta)
    }
}

/// Ray exits from a fixed interior origin, with the origin's constraint
/// values precomputed so that each evaluation along a ray is allocation free.
pub struct RayCaster {
    p0_norm2: f64,
    plate_level: f64,
    band_level: f64,
    p_plate: Vec<f64>,
    plates: Vec<Point>,
    p_frame: Vec<(f64, f64)>,
    frames: Vec<CurveFrame>,
    p0: Point,
}

impl RayCaster {
    pub fn new(dom: &ConvexDomain, p0: &Point) -> Result<Self> {
        dom.check_dim(p0)?;
        if dom.gauge(p0) >= 1.0 {
            return invalid("ray origin must be interior to U");
        }
        let plates: Vec<Point> = dom.spec.singular_dirs().iter().map(|a| a.as_point().clone()).collect();
        Ok(RayCaster {
            p0_norm2: p0.norm_squared(),
            plate_level: dom.plate_level,
            band_level: dom.band_level,
            p_plate: plates.iter().map(|a| a.dot(p0)).collect(),
            plates,
            p_frame: dom.frames.iter().map(|f| (p0.dot(&f.e1), p0.dot(&f.e2))).collect(),
            frames: dom.frames.clone(),
            p0: p0.clone(),
        })
    }

    pub fn origin(&self) -> &Point {
        &self.p0
    }

    /// Exit radius along the direction `u`, in closed form: the smallest of
    /// the ball, plate and band exits.
    pub fn exit(&self, u: &Point) -> f64 {
        let pu = self.p0.dot(u);
        let uu = u.norm_squared();
        let disc = pu * pu - uu * (self.p0_norm2 - 1.0);
        let mut r = (-pu + disc.sqrt()) / uu;
        for (a, &pa) in self.plates.iter().zip(&self.p_plate) {
            let du = a.dot(u);
            if du > 0.0 {
                r = r.min((self.plate_level - pa) / du);
            }
        }
        for (f, &(p1, p2)) in self.frames.iter().zip(&self.p_frame) {
            r = r.min(band_exit(p1, p2, u.dot(&f.e1), u.dot(&f.e2), f.angle, f.full, self.band_level));
        }
        r
    }

    /// Exit radius by bisection on membership, to absolute tolerance `tol`.
    /// Slower than [`RayCaster::exit`]; kept as an independent check.
    pub fn exit_bisect(&self, u: &Point, tol: f64) -> Result<f64> {
        let pu = self.p0.dot(u);
        let uu = u.norm_squared();
        let disc = pu * pu - uu * (self.p0_norm2 - 1.0);
        let mut hi = (-pu + disc.sqrt()) / uu;
        let plate: Vec<f64> = self.plates.iter().map(|a| a.dot(u)).collect();
        let frame: Vec<(f64, f64)> = self.frames.iter().map(|f| (u.dot(&f.e1), u.dot(&f.e2))).collect();
        let inside = |r: f64| {
            plate.iter().zip(&self.p_plate).all(|(&du, &pa)| pa + r * du <= self.plate_level)
                && frame.iter().zip(&self.p_frame).zip(&self.frames).all(|((&(u1, u2), &(p1, p2)), f)| {
                    crate::geom::arc_support(p1 + r * u1, p2 + r * u2, f.angle, f.full) <= self.band_level
                })
        };
        if inside(hi) {
            return Ok(hi);
        }
        let mut lo = 0.0;
        if !inside(lo) {
            return Err(Error::Numerical("ray origin violates a constraint".into()));
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// First `r > 0` at which the support of `(p1 + r·u1, p2 + r·u2)` over the
/// arc reaches `level`. The support lies between the two endpoint linear
/// functions and the planar norm; the norm crosses `level` exactly once, and
/// if the crossing direction is inside the wedge it is the exit, otherwise
/// the exit is where the first endpoint function reaches `level`.
fn band_exit(p1: f64, p2: f64, u1: f64, u2: f64, angle: f64, full: bool, level: f64) -> f64 {
    let a = u1 * u1 + u2 * u2;
    let b = p1 * u1 + p2 * u2;
    let c = p1 * p1 + p2 * p2 - level * level;
    let r_circ = if a > 0.0 { (-b + (b * b - a * c).max(0.0).sqrt()) / a } else { f64::INFINITY };
    if full {
        return r_circ;
    }
    if r_circ.is_finite() && crate::geom::in_wedge(p1 + r_circ * u1, p2 + r_circ * u2, angle) {
        return r_circ;
    }
    let (cs, sn) = (angle.cos(), angle.sin());
    let lin = |p: f64, du: f64| if du > 0.0 { (level - p) / du } else { f64::INFINITY };
    lin(p1, u1).min(lin(p1 * cs + p2 * sn, u1 * cs + u2 * sn))
}

/// Boundary points within distance δ of the cone.
pub struct SlidingNeighborhood<'a> {
    delta: f64,
    parent: &'a ConvexDomain,
}

impl SlidingNeighborhood<'_> {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        let g = self.parent.minkowski_functional(x)?;
        if (g - 1.0).abs() > ON_BOUNDARY_TOL {
            return Err(Error::OffBoundary((g - 1.0).abs()));
        }
        Ok(self.parent.dist_to_cone(x) <= self.delta)
    }
}

/// Certified-by-sampling lower bound on η₁: the largest grid value η for
/// which, at every grid value up to η, plates are pairwise disjoint and no
/// sampled boundary point lies in three bands at once. A margin of `1e-3` is
/// subtracted.
pub fn eta1_estimate(spec: &ConeSpec, grid: usize) -> Result<f64> {
    if grid < 2 {
        return invalid("eta1_estimate needs a grid of at least 2 values");
    }
    let upper = eta_upper(spec.kind());
    let spec3 = if spec.ambient_dim() > 3 { reduce_to_3d(spec)? } else { spec.clone() };
    let samples = fibonacci_sphere(4000, spec3.ambient_dim());
    let mut last_ok = None;
    for k in 1..grid {
        let eta = upper * k as f64 / grid as f64;
        let dom = ConvexDomain::new(spec3.clone(), eta)?;
        if plates_disjoint(&dom) && !has_triple_band_point(&dom, &samples) {
            last_ok = Some(eta);
        } else {
            break;
        }
    }
    Ok(match last_ok {
        Some(e) => (e - 1e-3).max(1e-3),
        None => 1e-3,
    })
}

fn reduce_to_3d(spec: &ConeSpec) -> Result<ConeSpec> {
    // every built cone lives in the first three coordinates
    crate::cones::build(spec.kind(), 3)
}

fn fibonacci_sphere(n: usize, dim: usize) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            if dim == 2 {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                return Point::from_column_slice(&[a.cos(), a.sin()]);
            }
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            Point::from_column_slice(&[r * a.cos(), r * a.sin(), z])
        })
        .collect()
}

/// Samples the line where two plate planes meet; the plates are disjoint if
/// every sample lies strictly outside `U`.
fn plates_disjoint(dom: &ConvexDomain) -> bool {
    let dirs = dom.spec().singular_dirs();
    let lvl = dom.plate_level();
    for i in 0..dirs.len() {
        for j in (i + 1)..dirs.len() {
            let a = dirs[i].as_point();
            let b = dirs[j].as_point();
            let c = a.dot(b);
            if c <= -1.0 + 1e-12 {
                // parallel planes on opposite sides never meet
                continue;
            }
            // base point on the bisector: λ(a+b) with ⟨λ(a+b), a⟩ = lvl
            let base = (a + b) * (lvl / (1.0 + c));
            let dir = a.clone().cross(b);
            let len = dir.norm();
            if len == 0.0 {
                continue;
            }
            let dir = dir / len;
            for k in -200..=200 {
                let x = &base + &dir * (k as f64 / 200.0);
                if dom.gauge(&x) <= 1.0 + 1e-12 {
                    return false;
                }
            }
        }
    }
    true
}

fn has_triple_band_point(dom: &ConvexDomain, samples: &[Point]) -> bool {
    let curves = dom.spec().curves().count();
    if curves < 3 {
        return false;
    }
    let tol = 0.1 * dom.eta();
    samples.iter().any(|p| {
        let x = p / dom.gauge(p);
        if matches!(dom.active_region(&x), BoundaryRegion::Plate(_)) {
            return false;
        }
        let near = (0..curves).filter(|&k| 1.0 - dom.curve_support(k, &x) / dom.band_level() < tol).count();
        near >= 3
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{build_plane, build_t, build_y};
    use crate::geom::point;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn doms() -> Vec<ConvexDomain> {
        vec![
            ConvexDomain::new(build_plane(3).unwrap(), 0.1).unwrap(),
            ConvexDomain::new(build_y(3).unwrap(), 0.1).unwrap(),
            ConvexDomain::new(build_t(3).unwrap(), 0.1).unwrap(),
        ]
    }

    fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Point {
        point(&[rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)])
    }

    #[test]
    fn derived_radii() {
        let eta: f64 = 0.1;
        assert_abs_diff_eq!(plate_radius(eta), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(band_half_width(eta), 0.19f64.sqrt(), epsilon = 1e-15);
        assert!(band_half_width(eta) < plate_radius(eta));
        assert_abs_diff_eq!(chord_distance(eta), 0.17f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(ConvexDomain::new(build_y(3).unwrap(), 0.6).is_err());
        assert!(ConvexDomain::new(build_t(3).unwrap(), 0.0).is_err());
        assert!(ConvexDomain::new(build_plane(3).unwrap(), 0.7).is_ok());
    }

    #[test]
    fn membership_examples() {
        let eta = 0.1;
        for dom in doms() {
            assert_eq!(dom.membership(&point(&[0.0, 0.0, 0.0])), Membership::Interior);
            for (j, a) in dom.spec().singular_dirs().iter().enumerate() {
                let x = a.as_point() * (1.0 - 2.0 * eta);
                assert_eq!(dom.membership(&x), Membership::Boundary(BoundaryRegion::Plate(j)));
                let r = dom.minkowski_functional(&(&x * 2.0)).unwrap();
                assert_abs_diff_eq!(r, 2.0, epsilon = 1e-14);
            }
            for (k, c) in dom.spec().curves().enumerate() {
                let x = c.midpoint() * (1.0 - eta);
                let expect = if c.is_full_circle() {
                    BoundaryRegion::CircleBand(0)
                } else {
                    BoundaryRegion::Band(k)
                };
                assert_eq!(dom.membership(&x), Membership::Boundary(expect));
            }
            assert_eq!(dom.membership(&point(&[0.0, 0.0, 1.01])), Membership::Exterior);
        }
    }

    #[test]
    fn sphere_points_are_labelled_sphere() {
        let dom = &doms()[2];
        // −a_1 is as far as possible from the trace of T
        let x = -dom.spec().singular_dirs()[0].as_point();
        assert_eq!(dom.membership(&x), Membership::Boundary(BoundaryRegion::Sphere));
    }

    #[test]
    fn gauge_matches_ray_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dom in doms() {
            for _ in 0..300 {
                let x = random_point(&mut rng, 1.5);
                let r = dom.minkowski_functional(&x).unwrap();
                // independent oracle: bisect membership along the ray
                let (mut lo, mut hi) = (0.0, 100.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if dom.contains(&(&x * mid)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                assert_abs_diff_eq!(1.0 / r, lo, epsilon = 1e-9 * lo.max(1.0));
                let y = &x / r;
                assert!((dom.gauge(&y) - 1.0).abs() < 1e-12);
                assert_abs_diff_eq!(dom.minkowski_functional(&(&x * 3.7)).unwrap(), 3.7 * r, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn band_support_matches_sampling() {
        let dom = &doms()[2];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = random_point(&mut rng, 1.0);
            for (k, c) in dom.spec().curves().enumerate() {
                let m = 4001;
                let brute = (0..m)
                    .map(|i| c.point_at(c.angle() * i as f64 / (m - 1) as f64).dot(&x))
                    .fold(f64::MIN, f64::max);
                assert!((dom.curve_support(k, &x) - brute).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn convexity_of_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dom in doms() {
            let mut pts = Vec::new();
            while pts.len() < 200 {
                let x = random_point(&mut rng, 1.0);
                if dom.gauge(&x) < 1.0 {
                    pts.push(x);
                }
            }
            for _ in 0..10_000 {
                let a = &pts[rng.gen_range(0..pts.len())];
                let b = &pts[rng.gen_range(0..pts.len())];
                assert!(dom.gauge(&((a + b) * 0.5)) < 1.0);
            }
        }
    }

    #[test]
    fn rotation_equivariance() {
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rot = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c]);
        let t = build_t(3).unwrap();
        let dom = ConvexDomain::new(t.clone(), 0.1).unwrap();
        let dom_r = ConvexDomain::new(t.rotated(&rot).unwrap(), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let x = random_point(&mut rng, 1.2);
            assert_abs_diff_eq!(dom.gauge(&x), dom_r.gauge(&(&rot * &x)), epsilon = 1e-12);
        }
    }

    #[test]
    fn plate_chord_half_length_is_r1() {
        // endpoint of the chord shared by plate 0 and band 0 of T
        let dom = &doms()[2];
        let a = dom.spec().singular_dirs()[0].as_point().clone();
        let arc = &dom.spec().arcs()[0].arc;
        let e2 = arc.e2().as_point();
        let normal = a.clone().cross(e2);
        let mid = &a * dom.plate_level() + e2 * dom.chord_distance();
        for sign in [-1.0, 1.0] {
            let end = &mid + &normal * (sign * dom.r1());
            assert_abs_diff_eq!(end.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dom.gauge(&end), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ray_exit_agrees_with_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dom in doms() {
            let p0 = point(&[0.03, -0.02, 0.04]);
            for _ in 0..100 {
                let u = random_point(&mut rng, 1.0).normalize();
                let r = dom.ray_exit(&p0, &u).unwrap();
                assert!((dom.gauge(&(&p0 + &u * r)) - 1.0).abs() < 1e-13);
                let rb = RayCaster::new(&dom, &p0).unwrap().exit_bisect(&u, 1e-14).unwrap();
                assert_abs_diff_eq!(r, rb, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sliding_neighborhood_membership() {
        let dom = &doms()[1];
        let nb = dom.sliding_neighborhood(0.05).unwrap();
        let arc = &dom.spec().arcs()[0].arc;
        let on_k = arc.midpoint() * (1.0 - 0.1);
        assert!(nb.contains(&on_k).unwrap());
        // every sphere point is farther than η from K
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = 0;
        for _ in 0..5000 {
            let x = random_point(&mut rng, 1.0);
            let y = &x / dom.gauge(&x);
            if dom.classify_boundary(&y).unwrap() == BoundaryRegion::Sphere {
                seen += 1;
                assert!(!nb.contains(&y).unwrap());
                assert!(dom.dist_to_cone(&y) > 0.1 - 1e-9);
            }
        }
        assert!(seen > 100);
        assert!(nb.contains(&point(&[0.1, 0.1, 0.1])).is_err());
    }

    #[test]
    fn band_offset_distance() {
        // points on the band at transverse offset d from (1−η)γ are at distance d from K
        let dom = &doms()[1];
        let nb = dom.sliding_neighborhood(0.05).unwrap();
        let arc = &dom.spec().arcs()[0].arc;
        let normal = arc.e1().as_point().clone().cross(arc.e2().as_point());
        for d in [0.01, 0.04, 0.049, 0.051, 0.1, 0.3] {
            let x = arc.point_at(1.3) * 0.9 + &normal * d;
            assert_abs_diff_eq!(dom.gauge(&x), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dom.dist_to_cone(&x), d, epsilon = 1e-14);
            assert_eq!(nb.contains(&x).unwrap(), d <= 0.05);
        }
    }

    #[test]
    fn plate_area_bounds() {
        let dom = &doms()[2];
        let r = dom.plate_radius();
        let disk = std::f64::consts::PI * r * r;
        let cut = segment_area(r, dom.chord_distance());
        assert!(dom.plate_area() < disk);
        assert!(dom.plate_area() > disk - 3.0 * cut - 1e-15);
    }

    #[test]
    fn eta1_examples() {
        for spec in [build_y(3).unwrap(), build_t(3).unwrap()] {
            let e1 = eta1_estimate(&spec, 50).unwrap();
            assert!(e1 > 0.1, "{:?}: {e1}", spec.kind());
            let dom = ConvexDomain::new(spec.clone(), e1).unwrap();
            assert!(plates_disjoint(&dom));
            let half = ConvexDomain::new(spec, e1 / 2.0).unwrap();
            assert!(plates_disjoint(&half));
        }
    }

    #[test]
    fn plate_overlap_matches_cap_criterion() {
        // plates of T overlap once 2·arcsin(R) exceeds the vertex angle
        let t = build_t(3).unwrap();
        let gap = (-1.0f64 / 3.0).acos();
        for k in 1..50 {
            let eta = 0.5 * k as f64 / 50.0;
            let dom = ConvexDomain::new(t.clone(), eta).unwrap();
            let caps_overlap = 2.0 * plate_radius(eta).asin() > gap + 1e-9;
            if !caps_overlap {
                assert!(plates_disjoint(&dom), "eta {eta}");
            }
        }
    }
}
