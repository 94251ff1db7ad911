//! Quadratic remainder of the recentred cones.
//!
//! With `o_s = (t0 + s)q`, `C_s` is the cone from `o_s` over the trace
//! `X_{t0+s} = (K + o_s) ∩ ∂U` (that is, `K + o_s` clipped) and `C_0` is the
//! cone from the same apex over the older trace `X_{t0}`. Their area gap is
//! `O(s²)`, and inside each plate region it lies in `[0, s²·H¹(Y0)/2]`,
//! where `Y0` is the trace of `K` in one plate.

use serde::Serialize;

use crate::cones::{ConeSpec, Translation};
use crate::domain::{BoundaryRegion, ConvexDomain, RayCaster};
use crate::error::{invalid, Result};
use crate::geom::{triangle_area, Point, UnitVector};

/// Ray directions per sheet used to sample a trace.
pub const TRACE_SAMPLES: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct GapSample {
    pub s: f64,
    pub gap: f64,
    /// Gap restricted to each plate region.
    pub plate_gaps: Vec<f64>,
    /// `s²·H¹(Y0)/2`.
    pub plate_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub t0: f64,
    pub samples: Vec<GapSample>,
    /// Least-squares slope of `log gap` against `log s`.
    pub slope: f64,
    /// `H¹(Y0) = 3·d`, with `d` the plate chord distance.
    pub h1_y0: f64,
    pub plates_within_bound: bool,
    pub pass: bool,
}

// Boundary trace of one sheet, kinks duplicated with both labels.
struct Trace {
    points: Vec<Point>,
    labels: Vec<BoundaryRegion>,
}

fn trace(dom: &ConvexDomain, spec: &ConeSpec, apex: &Point, piece: crate::cones::Piece) -> Result<Trace> {
    let caster = RayCaster::new(dom, apex)?;
    let curve = spec.piece_curve(piece)?;
    let e1 = curve.e1().as_point();
    let e2 = curve.e2().as_point();
    let at = |sigma: f64| -> Result<(Point, BoundaryRegion)> {
        let u = e1 * sigma.cos() + e2 * sigma.sin();
        let x = apex + &u * caster.exit(&u);
        let label = dom.classify_boundary(&x)?;
        Ok((x, label))
    };
    let n = TRACE_SAMPLES;
    let h = curve.angle() / n as f64;
    let mut points = Vec::with_capacity(n + 16);
    let mut labels = Vec::with_capacity(n + 16);
    let (x, mut prev_label) = at(0.0)?;
    points.push(x);
    labels.push(prev_label);
    for k in 1..=n {
        let sigma = if k == n { curve.angle() } else { k as f64 * h };
        let (x, label) = at(sigma)?;
        if label != prev_label {
            let (mut lo, mut hi) = ((k - 1) as f64 * h, sigma);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if at(mid)?.1 == prev_label {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (kink, _) = at(0.5 * (lo + hi))?;
            points.push(kink.clone());
            labels.push(prev_label);
            points.push(kink);
            labels.push(label);
        }
        points.push(x);
        labels.push(label);
        prev_label = label;
    }
    Ok(Trace { points, labels })
}

/// Fan area from `apex` over consecutive trace points whose segment is
/// accepted by `keep`.
fn fan(apex: &Point, tr: &Trace, keep: impl Fn(BoundaryRegion, BoundaryRegion) -> bool) -> f64 {
    let mut area = 0.0;
    for k in 1..tr.points.len() {
        if keep(tr.labels[k - 1], tr.labels[k]) {
            area += triangle_area(apex.as_slice(), tr.points[k - 1].as_slice(), tr.points[k].as_slice());
        }
    }
    area
}

pub fn recentered_cone_gap(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    q: &UnitVector,
    t0: f64,
    s_list: &[f64],
) -> Result<GapReport> {
    if s_list.len() < 4 {
        return invalid("the remainder fit needs at least four values of s");
    }
    if s_list.iter().any(|s| !(*s > 0.0)) {
        return invalid("values of s must be positive");
    }
    let s_max = s_list.iter().cloned().fold(0.0, f64::max);
    if !(t0.abs() + s_max < dom.eta()) {
        return invalid(format!("|t0| + max s must stay below eta = {}", dom.eta()));
    }
    let dim = dom.dim();
    let old_apex = Translation::signed(q, t0)?.offset(dim)?;
    let pieces = spec.pieces();
    let old: Vec<Trace> = pieces.iter().map(|&p| trace(dom, spec, &old_apex, p)).collect::<Result<_>>()?;
    let n_plates = spec.singular_dirs().len();
    let h1_y0 = 3.0 * dom.chord_distance();
    let mut samples = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let o_s = Translation::signed(q, t0 + s)?.offset(dim)?;
        let new: Vec<Trace> = pieces.iter().map(|&p| trace(dom, spec, &o_s, p)).collect::<Result<_>>()?;
        let all = |_: BoundaryRegion, _: BoundaryRegion| true;
        let c0: f64 = old.iter().map(|t| fan(&o_s, t, all)).sum();
        let cs: f64 = new.iter().map(|t| fan(&o_s, t, all)).sum();
        let plate_gaps = (0..n_plates)
            .map(|j| {
                let in_plate = |a: BoundaryRegion, b: BoundaryRegion| {
                    a == BoundaryRegion::Plate(j) && b == BoundaryRegion::Plate(j)
                };
                let a0: f64 = old.iter().map(|t| fan(&o_s, t, in_plate)).sum();
                let a1: f64 = new.iter().map(|t| fan(&o_s, t, in_plate)).sum();
                a0 - a1
            })
            .collect();
        samples.push(GapSample { s, gap: c0 - cs, plate_gaps, plate_bound: 0.5 * s * s * h1_y0 });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|g| g.gap.abs() > 0.0).map(|g| (g.s.ln(), g.gap.abs().ln())).unzip();
    let slope = if lx.len() >= 3 { super::ls_slope(&lx, &ly) } else { f64::NAN };
    let slack = 1e-10;
    let plates_within_bound = samples
        .iter()
        .all(|g| g.plate_gaps.iter().all(|&p| p >= -slack && p <= g.plate_bound + slack));
    let pass = slope >= 1.9 && plates_within_bound;
    Ok(GapReport { t0, samples, slope, h1_y0, plates_within_bound, pass })
}
