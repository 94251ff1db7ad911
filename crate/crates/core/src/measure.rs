//! Areas of translated cones clipped to `U`, slices, the coarea integral and
//! a Monte Carlo cross-check.
//!
//! A sheet of `K + tq` is `tq + r·u(s)` with `u` unit speed, so its area
//! element is `r dr ds` and the clipped area is `∫ ½ r_max(s)² ds`, where
//! `r_max(s)` is the exit radius of the ray from `tq` along `u(s)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{ConeKind, ConeSpec, Piece, Translation};
use crate::domain::{segment_area, ConvexDomain, RayCaster};
use crate::error::{invalid, Result};
use crate::geom::{Point, Polyline, TriangleMesh, UnitVector};
use crate::quadrature::integrate_with_breaks;

/// Knobs for the adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureBudget {
    /// Absolute error target per sheet.
    pub abs_tol: f64,
    /// Maximum number of Gauss–Kronrod panels per sheet.
    pub max_panels: usize,
    /// Initial panels per sheet.
    pub initial_panels: usize,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        QuadratureBudget { abs_tol: 1e-11, max_panels: 4000, initial_panels: 8 }
    }
}

impl QuadratureBudget {
    pub fn with_max_panels(max_panels: usize) -> Self {
        QuadratureBudget { max_panels, ..Default::default() }
    }
}

pub fn piece_name(p: Piece) -> String {
    match p {
        Piece::Arc(k) => format!("arc{k}"),
        Piece::Circle(k) => format!("circle{k}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClippedConeMeasure {
    pub value: f64,
    pub error_estimate: f64,
    pub quadrature_cells: usize,
    pub budget: QuadratureBudget,
    pub pieces: BTreeMap<String, f64>,
}

fn check_regime(dom: &ConvexDomain, spec: &ConeSpec, tr: &Translation) -> Result<Point> {
    if spec.ambient_dim() != dom.dim() {
        return invalid("cone and domain live in different dimensions");
    }
    if tr.magnitude >= dom.eta() {
        return invalid(format!(
            "translation {} is not smaller than eta = {}; outside the stability regime",
            tr.magnitude,
            dom.eta()
        ));
    }
    tr.offset(dom.dim())
}

/// Clipped area of one sheet of `spec + tr`.
pub fn sheet_area(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    piece: Piece,
    tr: &Translation,
    budget: &QuadratureBudget,
) -> Result<crate::quadrature::Integral> {
    let p0 = check_regime(dom, spec, tr)?;
    let caster = RayCaster::new(dom, &p0)?;
    let curve = spec.piece_curve(piece)?;
    let e1 = curve.e1().as_point().clone();
    let e2 = curve.e2().as_point().clone();
    let mut u = Point::zeros(dom.dim());
    let f = |s: f64| {
        u.copy_from(&(&e1 * s.cos()));
        u.axpy(s.sin(), &e2, 1.0);
        let r = caster.exit(&u);
        0.5 * r * r
    };
    let n = budget.initial_panels.max(1);
    let breaks: Vec<f64> = (0..=n).map(|k| curve.angle() * k as f64 / n as f64).collect();
    Ok(integrate_with_breaks(f, &breaks, budget.abs_tol, 0.0, budget.max_panels))
}

/// `H²((K + tq) ∩ U)` by adaptive quadrature over each sheet.
pub fn clipped_cone_area(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    tr: &Translation,
    budget: &QuadratureBudget,
) -> Result<ClippedConeMeasure> {
    check_regime(dom, spec, tr)?;
    let mut pieces = BTreeMap::new();
    let (mut value, mut error, mut cells) = (0.0, 0.0, 0);
    for piece in spec.pieces() {
        let r = sheet_area(dom, spec, piece, tr, budget)?;
        value += r.value;
        error += r.error;
        cells += r.intervals;
        pieces.insert(piece_name(piece), r.value);
    }
    Ok(ClippedConeMeasure { value, error_estimate: error, quadrature_cells: cells, budget: *budget, pieces })
}

/// Closed-form `H²(K ∩ U)` for the untranslated built cones (in `R³`
/// coordinates, any ambient dimension): each arc sheet is a sector of radius
/// `1 − η` minus two half segments cut by the plates at distance `1 − 2η`.
pub fn untranslated_area_closed_form(dom: &ConvexDomain) -> f64 {
    let rho = dom.band_level();
    let seg = segment_area(rho, dom.plate_level());
    let spec = dom.spec();
    let arcs: f64 = spec.arcs().iter().map(|a| 0.5 * a.arc.angle() * rho * rho - seg).sum();
    let circles = spec.circles().len() as f64 * std::f64::consts::PI * rho * rho;
    debug_assert!(spec.kind() != ConeKind::Plane || spec.arcs().is_empty());
    arcs + circles
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Number of strata in `s` per sheet.
pub const MC_STRATA: usize = 128;

/// Number of strata in `r` per sheet.
pub const MC_R_STRATA: usize = 128;

/// Stratified Monte Carlo area of `(K + tq) ∩ U`: each sheet's `(s, r)`
/// rectangle `[0, θ] × [0, 1 + t]` is cut into [`MC_STRATA`] ×
/// [`MC_R_STRATA`] cells, each sampled uniformly, and a sample contributes
/// `r·1{x ∈ U}`. Every column of cells has its own ChaCha stream, so the
/// result depends only on `seed`.
pub fn mc_cone_area_oracle(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    tr: &Translation,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 10_000 {
        return invalid("the Monte Carlo oracle needs at least 10^4 samples");
    }
    let p0 = check_regime(dom, spec, tr)?;
    let pieces = spec.pieces();
    let per_cell = (samples / (pieces.len() * MC_STRATA * MC_R_STRATA)).max(2);
    let r_hi = 1.0 + tr.magnitude;
    let dr = r_hi / MC_R_STRATA as f64;
    let jobs: Vec<(usize, usize)> =
        (0..pieces.len()).flat_map(|p| (0..MC_STRATA).map(move |k| (p, k))).collect();
    let parts: Vec<Result<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(p, k)| {
            let curve = spec.piece_curve(pieces[p])?;
            let width = curve.angle() / MC_STRATA as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((p * MC_STRATA + k) as u64);
            let (mut value, mut var) = (0.0, 0.0);
            for j in 0..MC_R_STRATA {
                let (mut sum, mut sum2) = (0.0, 0.0);
                for _ in 0..per_cell {
                    let s = width * (k as f64 + rng.gen::<f64>());
                    let r = dr * (j as f64 + rng.gen::<f64>());
                    let x = &p0 + curve.point_at(s) * r;
                    let v = if dom.gauge(&x) <= 1.0 { r } else { 0.0 };
                    sum += v;
                    sum2 += v * v;
                }
                let n = per_cell as f64;
                let mean = sum / n;
                let cell_var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
                let scale = width * dr;
                value += scale * mean;
                var += scale * scale * cell_var / n;
            }
            Ok((value, var))
        })
        .collect();
    let (mut value, mut var) = (0.0, 0.0);
    for part in parts {
        let (m, v) = part?;
        value += m;
        var += v;
    }
    Ok(McEstimate { value, stderr: var.sqrt(), samples: per_cell * jobs.len() * MC_R_STRATA })
}

/// Planar section of a cone or mesh at `⟨x, axis⟩ = height`.
#[derive(Clone, Debug, Default)]
pub struct SliceProfile {
    pub height: f64,
    pub segments: Vec<(Point, Point)>,
    /// Points where the slice meets `∂U`.
    pub gates: Vec<Point>,
    /// For each gate, the segment endpoint (`2·segment + end`) it came from.
    pub gate_sources: Vec<usize>,
    pub length: f64,
    /// Set when a mesh triangle lies in the slicing plane.
    pub degenerate: bool,
}

impl SliceProfile {
    fn push(&mut self, a: Point, b: Point) {
        self.length += (&b - &a).norm();
        self.segments.push((a, b));
    }

    /// Segments chained into polylines (endpoints within 1e-7 are joined).
    pub fn curve_pieces(&self) -> Vec<Polyline> {
        let mut uf = UnionFind::new(2 * self.segments.len());
        glue_endpoints(&self.segments, &mut uf, 1e-7);
        let mut groups: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
        for (k, (a, b)) in self.segments.iter().enumerate() {
            let g = groups.entry(uf.find(2 * k)).or_default();
            g.push(a.clone());
            g.push(b.clone());
        }
        groups.into_values().filter_map(|v| Polyline::dedup(v, false).ok()).collect()
    }
}

fn check_axis(axis: &UnitVector, dim: usize) -> Result<()> {
    if axis.dim() != dim {
        return invalid("slicing axis has the wrong dimension");
    }
    if (axis.as_point().norm() - 1.0).abs() > 1e-12 {
        return invalid("slicing axis is not unit");
    }
    Ok(())
}

/// Closed-form slice of `(K + tq) ∩ U`: each sheet is a planar wedge, its
/// section is a segment or ray, which is then clipped to `U`.
pub fn slice_cone(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    tr: &Translation,
    axis: &UnitVector,
    height: f64,
) -> Result<SliceProfile> {
    let p0 = check_regime(dom, spec, tr)?;
    check_axis(axis, dom.dim())?;
    if height.abs() >= 1.0 {
        return invalid("slice height must satisfy |t| < 1");
    }
    let mut prof = SliceProfile { height, ..Default::default() };
    let c = height - axis.dot(&p0);
    for piece in spec.pieces() {
        let curve = spec.piece_curve(piece)?;
        let e1 = curve.e1().as_point();
        let e2 = curve.e2().as_point();
        let (ca, cb) = (axis.dot(e1), axis.dot(e2));
        let nn = ca * ca + cb * cb;
        if nn < 1e-24 {
            continue;
        }
        // line {(α,β): α·ca + β·cb = c} in the sheet plane
        let base = (c * ca / nn, c * cb / nn);
        let dir = (-cb / nn.sqrt(), ca / nn.sqrt());
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut clip = |n: (f64, f64)| {
            let v0 = n.0 * base.0 + n.1 * base.1;
            let dv = n.0 * dir.0 + n.1 * dir.1;
            if dv.abs() < 1e-15 {
                if v0 < 0.0 {
                    lo = f64::INFINITY;
                }
            } else if dv > 0.0 {
                lo = lo.max(-v0 / dv);
            } else {
                hi = hi.min(-v0 / dv);
            }
        };
        if !curve.is_full_circle() {
            let th = curve.angle();
            clip((0.0, 1.0));
            clip((th.sin(), -th.cos()));
        }
        let to_point = |tau: f64| &p0 + e1 * (base.0 + tau * dir.0) + e2 * (base.1 + tau * dir.1);
        // the ball bounds U
        let mid = to_point(0.0);
        let d = e1 * dir.0 + e2 * dir.1;
        let md = mid.dot(&d);
        let disc = md * md - (mid.norm_squared() - 1.0);
        if disc <= 0.0 {
            continue;
        }
        lo = lo.max(-md - disc.sqrt());
        hi = hi.min(-md + disc.sqrt());
        if !(lo < hi) {
            continue;
        }
        let Some((a, b, a_on, b_on)) = clip_segment_to_domain(dom, &to_point, lo, hi) else {
            continue;
        };
        let k = prof.segments.len();
        if a_on {
            prof.gates.push(a.clone());
            prof.gate_sources.push(2 * k);
        }
        if b_on {
            prof.gates.push(b.clone());
            prof.gate_sources.push(2 * k + 1);
        }
        prof.push(a, b);
    }
    Ok(prof)
}

/// Sub-interval of `[lo, hi]` where the convex gauge is at most one, with
/// flags for endpoints lying on `∂U`.
fn clip_segment_to_domain(
    dom: &ConvexDomain,
    at: &dyn Fn(f64) -> Point,
    lo: f64,
    hi: f64,
) -> Option<(Point, Point, bool, bool)> {
    let g = |t: f64| dom.gauge(&at(t)) - 1.0;
    // golden-section search for the minimum of the convex gauge
    let (mut a, mut b) = (lo, hi);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if b - a < 1e-14 {
            break;
        }
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let m = 0.5 * (a + b);
    if g(m) > 0.0 {
        return None;
    }
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            if (outside - inside).abs() < 1e-15 {
                break;
            }
            let mid = 0.5 * (inside + outside);
            if g(mid) <= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let t0 = if g(lo) <= 0.0 { lo } else { bisect(m, lo) };
    let t1 = if g(hi) <= 0.0 { hi } else { bisect(m, hi) };
    let on = |t: f64| g(t).abs() < 1e-10;
    Some((at(t0), at(t1), on(t0), on(t1)))
}

/// Exact section of a triangle mesh by the plane `⟨x, axis⟩ = height`.
/// Vertices on the plane count as positive. Endpoints lying on boundary
/// edges of the mesh become gates; when `dom` is given they are projected
/// radially onto `∂U`.
pub fn slice_mesh(
    mesh: &TriangleMesh,
    axis: &UnitVector,
    height: f64,
    dom: Option<&ConvexDomain>,
) -> Result<SliceProfile> {
    check_axis(axis, mesh.dim())?;
    let dim = mesh.dim();
    let d: Vec<f64> = (0..mesh.vertex_count())
        .map(|i| mesh.vertex(i).iter().zip(axis.as_point().iter()).map(|(x, a)| x * a).sum::<f64>() - height)
        .collect();
    let boundary: std::collections::HashSet<(usize, usize)> = mesh.boundary_edges().into_iter().collect();
    let crossing = |i: usize, j: usize| {
        let (i, j) = (i.min(j), i.max(j));
        let t = d[i] / (d[i] - d[j]);
        let (a, b) = (mesh.vertex(i), mesh.vertex(j));
        Point::from_iterator(dim, a.iter().zip(b).map(|(x, y)| x + t * (y - x)))
    };
    let mut prof = SliceProfile { height, ..Default::default() };
    for tri in mesh.triangles() {
        let pos: Vec<bool> = tri.iter().map(|&v| d[v] >= 0.0).collect();
        if tri.iter().all(|&v| d[v] == 0.0) {
            prof.degenerate = true;
            continue;
        }
        let mut pts = Vec::with_capacity(2);
        let mut on_boundary = Vec::with_capacity(2);
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            if pos[k] != pos[(k + 1) % 3] {
                pts.push(crossing(i, j));
                on_boundary.push(boundary.contains(&(i.min(j), i.max(j))));
            }
        }
        if pts.len() == 2 {
            let k = prof.segments.len();
            for (e, (p, on)) in pts.iter().zip(&on_boundary).enumerate() {
                if *on {
                    let gate = match dom {
                        Some(dm) => dm.project_to_boundary(p)?,
                        None => p.clone(),
                    };
                    prof.gates.push(gate);
                    prof.gate_sources.push(2 * k + e);
                }
            }
            let b = pts.pop().unwrap_or_default();
            let a = pts.pop().unwrap_or_default();
            prof.push(a, b);
        }
    }
    Ok(prof)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// The smaller root wins, so component labels are deterministic.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

fn glue_endpoints(segments: &[(Point, Point)], uf: &mut UnionFind, tol: f64) {
    let pts: Vec<&Point> = segments.iter().flat_map(|(a, b)| [a, b]).collect();
    for k in 0..segments.len() {
        uf.union(2 * k, 2 * k + 1);
    }
    // sort along the first coordinate so only nearby candidates are compared
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]).then(i.cmp(&j)));
    for (idx, &i) in order.iter().enumerate() {
        for &j in &order[idx + 1..] {
            if pts[j][0] - pts[i][0] > tol {
                break;
            }
            if (pts[i] - pts[j]).norm() <= tol {
                uf.union(i, j);
            }
        }
    }
}

/// Whether all `gates` lie in one connected component of the slice. A gate
/// produced by the slice itself is attached to its source endpoint; other
/// gates are glued to endpoints within `1e-7`.
pub fn slice_connectivity(profile: &SliceProfile, gates: &[Point]) -> bool {
    if profile.segments.is_empty() || gates.is_empty() {
        return false;
    }
    let n = 2 * profile.segments.len();
    let mut uf = UnionFind::new(n + gates.len());
    glue_endpoints(&profile.segments, &mut uf, 1e-7);
    for (g, gate) in gates.iter().enumerate() {
        let mut attached = false;
        for (own, &src) in profile.gates.iter().zip(&profile.gate_sources) {
            if (own - gate).norm() <= 1e-7 {
                uf.union(n + g, src);
                attached = true;
            }
        }
        for (k, (a, b)) in profile.segments.iter().enumerate() {
            if (a - gate).norm() <= 1e-7 {
                uf.union(n + g, 2 * k);
                attached = true;
            }
            if (b - gate).norm() <= 1e-7 {
                uf.union(n + g, 2 * k + 1);
                attached = true;
            }
        }
        if !attached {
            return false;
        }
    }
    let root = uf.find(n);
    (1..gates.len()).all(|g| uf.find(n + g) == root)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaResult {
    /// Trapezoid value of `∫ H¹(slice) dt`.
    pub integral: f64,
    /// Richardson estimate of the trapezoid error (from `n` vs `n/2` slices).
    pub error_estimate: f64,
    pub n_slices: usize,
}

/// `∫ H¹(mesh ∩ {⟨x,axis⟩ = t}) dt` over `t_range` by the trapezoid rule.
/// The two end slices are taken `1e-9·(b − a)` inside the range, so that a
/// flat face exactly at an end does not count as a slice.
pub fn coarea_lower_bound(
    mesh: &TriangleMesh,
    axis: &UnitVector,
    t_range: (f64, f64),
    n_slices: usize,
) -> Result<CoareaResult> {
    let (a, b) = t_range;
    if !(b > a) || n_slices < 2 {
        return invalid("coarea needs b > a and at least 2 slices");
    }
    let n = n_slices + n_slices % 2;
    let h = (b - a) / n as f64;
    let eps = 1e-9 * (b - a);
    let lengths: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let t = if k == 0 {
                a + eps
            } else if k == n {
                b - eps
            } else {
                a + h * k as f64
            };
            slice_mesh(mesh, axis, t, None).map(|p| p.length)
        })
        .collect::<Result<Vec<_>>>()?;
    let trap = |step: usize| {
        let hh = h * step as f64;
        let mut acc = 0.5 * (lengths[0] + lengths[n]);
        for k in (step..n).step_by(step) {
            acc += lengths[k];
        }
        acc * hh
    };
    let fine = trap(1);
    let coarse = trap(2);
    Ok(CoareaResult { integral: fine, error_estimate: (fine - coarse).abs() / 3.0, n_slices: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{build_plane, build_t, build_y};
    use crate::geom::point;
    use approx::assert_abs_diff_eq;

    fn dom(kind: ConeKind) -> ConvexDomain {
        ConvexDomain::new(crate::cones::build(kind, 3).unwrap(), 0.1).unwrap()
    }

    #[test]
    fn plane_area_closed_form() {
        let d = dom(ConeKind::Plane);
        let m = clipped_cone_area(&d, d.spec(), &Translation::zero(3), &QuadratureBudget::default()).unwrap();
        assert_abs_diff_eq!(m.value, 2.5446900494, epsilon = 1e-10);
        assert_abs_diff_eq!(m.value, m.pieces.values().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn y_area_closed_form() {
        let d = dom(ConeKind::Y);
        let m = clipped_cone_area(&d, d.spec(), &Translation::zero(3), &QuadratureBudget::default()).unwrap();
        let (r, h) = (0.9f64, 0.8f64);
        let expect = 3.0 * (std::f64::consts::PI * r * r / 2.0 - (r * r * (h / r).acos() - h * (r * r - h * h).sqrt()));
        assert_abs_diff_eq!(m.value, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(untranslated_area_closed_form(&d), expect, epsilon = 1e-14);
    }

    #[test]
    fn t_area_closed_form() {
        let d = dom(ConeKind::T);
        let m = clipped_cone_area(&d, d.spec(), &Translation::zero(3), &QuadratureBudget::default()).unwrap();
        assert_abs_diff_eq!(m.value, untranslated_area_closed_form(&d), epsilon = 1e-10);
    }

    #[test]
    fn translation_at_eta_is_rejected() {
        let d = dom(ConeKind::Y);
        let tr = Translation::new(UnitVector::axis(3, 0), 0.1).unwrap();
        assert!(clipped_cone_area(&d, d.spec(), &tr, &QuadratureBudget::default()).is_err());
    }

    #[test]
    fn plane_normal_translation_is_exact() {
        let d = dom(ConeKind::Plane);
        let tr = Translation::new(UnitVector::axis(3, 2), 0.07).unwrap();
        let m = clipped_cone_area(&d, d.spec(), &tr, &QuadratureBudget::default()).unwrap();
        assert_abs_diff_eq!(m.value, std::f64::consts::PI * 0.81, epsilon = 1e-10);
    }

    #[test]
    fn rotated_scene_has_equal_area() {
        let (c, s) = (1.1f64.cos(), 1.1f64.sin());
        let rot = nalgebra::DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c]);
        for spec in [build_y(3).unwrap(), build_t(3).unwrap(), build_plane(3).unwrap()] {
            let d = ConvexDomain::new(spec.clone(), 0.1).unwrap();
            let rs = spec.rotated(&rot).unwrap();
            let dr = ConvexDomain::new(rs.clone(), 0.1).unwrap();
            let b = QuadratureBudget::default();
            let a0 = clipped_cone_area(&d, &spec, &Translation::zero(3), &b).unwrap().value;
            let a1 = clipped_cone_area(&dr, &rs, &Translation::zero(3), &b).unwrap().value;
            assert_abs_diff_eq!(a0, a1, epsilon = 1e-10);
        }
    }

    #[test]
    fn mc_reproducible_and_rate() {
        let d = dom(ConeKind::Plane);
        let tr = Translation::zero(3);
        let a = mc_cone_area_oracle(&d, d.spec(), &tr, 100_000, 42).unwrap();
        let b = mc_cone_area_oracle(&d, d.spec(), &tr, 100_000, 42).unwrap();
        assert_eq!(a, b);
        let c = mc_cone_area_oracle(&d, d.spec(), &tr, 400_000, 42).unwrap();
        let ratio = a.stderr / c.stderr;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
        assert!((a.value - std::f64::consts::PI * 0.81).abs() < 4.0 * a.stderr);
        assert!(mc_cone_area_oracle(&d, d.spec(), &tr, 100, 1).is_err());
    }

    #[test]
    fn y_slice_gates_and_length() {
        let d = dom(ConeKind::Y);
        let axis = UnitVector::axis(3, 2);
        for h in [0.0, 0.3, -0.55, 0.79] {
            let p = slice_cone(&d, d.spec(), &Translation::zero(3), &axis, h).unwrap();
            let ell = (0.81f64 - h * h).sqrt();
            assert_eq!(p.gates.len(), 3);
            for g in &p.gates {
                assert_abs_diff_eq!(point(&[g[0], g[1]]).norm(), ell, epsilon = 1e-10);
                assert_abs_diff_eq!(d.gauge(g), 1.0, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(p.length, 3.0 * ell, epsilon = 1e-10);
            let gates = p.gates.clone();
            assert!(slice_connectivity(&p, &gates));
        }
    }

    #[test]
    fn y_slice_length_is_translation_invariant() {
        let d = dom(ConeKind::Y);
        let axis = UnitVector::axis(3, 2);
        let q = UnitVector::from_slice(&[0.6, -0.3, 0.2]).unwrap();
        for h in [0.0, 0.4] {
            let base = 3.0 * (0.81f64 - h * h).sqrt();
            for t in [0.01, 0.05, 0.09] {
                let tr = Translation::new(q.clone(), t).unwrap();
                let p = slice_cone(&d, d.spec(), &tr, &axis, h).unwrap();
                assert_abs_diff_eq!(p.length, base, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn removing_a_sheet_disconnects() {
        let d = dom(ConeKind::Y);
        let axis = UnitVector::axis(3, 2);
        let mut p = slice_cone(&d, d.spec(), &Translation::zero(3), &axis, 0.2).unwrap();
        let gates = p.gates.clone();
        p.segments.remove(1);
        p.gates.remove(1);
        p.gate_sources = vec![0, 3];
        assert!(!slice_connectivity(&p, &gates));
        assert!(!slice_connectivity(&SliceProfile::default(), &gates));
    }

    #[test]
    fn cylinder_coarea_is_area() {
        let m = crate::geom::cylinder_mesh(0.5, 1.2, 64, 7).unwrap();
        let r = coarea_lower_bound(&m, &UnitVector::axis(3, 2), (0.0, 1.2), 200).unwrap();
        let area = crate::geom::mesh_area(&m);
        assert_abs_diff_eq!(r.integral, area, epsilon = 1e-6 * area);
    }

    #[test]
    fn tilted_plane_coarea_is_strictly_smaller() {
        let tilt = 0.4f64;
        let pts = vec![
            point(&[0.0, 0.0, 0.0]),
            point(&[1.0, 0.0, 0.0]),
            point(&[1.0, tilt.cos(), tilt.sin()]),
            point(&[0.0, tilt.cos(), tilt.sin()]),
        ];
        let m = TriangleMesh::from_points(&pts, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let r = coarea_lower_bound(&m, &UnitVector::axis(3, 2), (0.0, tilt.sin()), 100).unwrap();
        // slices of the unit square have length 1 over a height range sin(tilt)
        assert_abs_diff_eq!(r.integral, tilt.sin(), epsilon = 1e-9);
        assert!(r.integral < 1.0);
    }

    #[test]
    fn horizontal_mesh_slice_is_degenerate() {
        let pts = vec![point(&[0.0, 0.0, 0.3]), point(&[1.0, 0.0, 0.3]), point(&[0.0, 1.0, 0.3])];
        let m = TriangleMesh::from_points(&pts, vec![[0, 1, 2]]).unwrap();
        let p = slice_mesh(&m, &UnitVector::axis(3, 2), 0.3, None).unwrap();
        assert!(p.degenerate);
    }
}
