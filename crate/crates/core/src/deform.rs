//! Sliding deformations of cone meshes and constrained area descent.
//!
//! Boundary vertices stay on `∂U` (moved in its tangent plane, then pulled
//! back by the Minkowski functional) and within `δ` of where they started.
//! Interior vertices move freely inside `Ū`. Boundary vertices that are not
//! junctions also lose the component of their motion along the discrete
//! boundary curve; sliding along the curve only redistributes the polygon's
//! vertices and lets an inscribed polygon lose area that the continuous
//! surface never had.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{boundary_mesh, BoundaryMesh};
use crate::cones::ConeSpec;
use crate::domain::ConvexDomain;
use crate::error::{invalid, Error, Result};
use crate::geom::{mesh_area, Point, TriangleMesh};
use crate::measure::untranslated_area_closed_form;

/// Triangles smaller than this are treated as collapsed by the line search.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Triangulated `K ∩ Ū`, one polar grid per sheet.
#[derive(Clone, Debug)]
pub struct ConeMesh {
    pub mesh: TriangleMesh,
    /// Piece index (in [`ConeSpec::pieces`] order) of each triangle.
    pub sheets: Vec<usize>,
    /// Boundary-mesh vertex under each cone vertex lying on `∂U`.
    pub boundary_ids: Vec<Option<usize>>,
    pub rings: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Apex,
    Spine(usize, usize),
    Sheet(usize, usize, usize),
    OnBoundary(usize),
}

/// Cone mesh whose boundary vertices are exactly the trace vertices of `bm`.
/// Ring `i` of each sheet is the boundary chain scaled by `i / rings`.
pub fn cone_mesh_on(bm: &BoundaryMesh, rings: usize) -> Result<ConeMesh> {
    if rings < 2 {
        return invalid("a cone mesh needs at least two rings");
    }
    let dim = bm.mesh.dim();
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut boundary_ids = Vec::new();
    let mut tris = Vec::new();
    let mut sheets = Vec::new();
    let mut vertex = |key: Key, p: &[f64], scale: f64, bid: Option<usize>, coords: &mut Vec<f64>, boundary_ids: &mut Vec<Option<usize>>| {
        *ids.entry(key).or_insert_with(|| {
            coords.extend(p.iter().map(|v| v * scale));
            boundary_ids.push(bid);
            boundary_ids.len() - 1
        })
    };
    for piece in 0..bm.base().piece_chains.len() {
        let chain = bm.piece_chain(piece);
        let closed = chain.first() == chain.last();
        let cols = chain.len() - 1;
        let m = if closed { cols } else { cols + 1 };
        let mut grid = vec![vec![0usize; m]; rings + 1];
        for (k, &b) in chain.iter().take(m).enumerate() {
            let p = bm.mesh.vertex(b);
            for (i, row) in grid.iter_mut().enumerate() {
                let junction = !closed && (k == 0 || k == cols);
                let key = if i == 0 {
                    Key::Apex
                } else if i == rings {
                    Key::OnBoundary(b)
                } else if junction {
                    Key::Spine(b, i)
                } else {
                    Key::Sheet(piece, i, k)
                };
                let scale = if i == rings { 1.0 } else { i as f64 / rings as f64 };
                let bid = (i == rings).then_some(b);
                row[k] = vertex(key, p, scale, bid, &mut coords, &mut boundary_ids);
            }
        }
        for k in 0..cols {
            let k1 = (k + 1) % m;
            tris.push([grid[0][k], grid[1][k], grid[1][k1]]);
            sheets.push(piece);
            for i in 1..rings {
                tris.push([grid[i][k], grid[i + 1][k], grid[i + 1][k1]]);
                tris.push([grid[i][k], grid[i + 1][k1], grid[i][k1]]);
                sheets.push(piece);
                sheets.push(piece);
            }
        }
    }
    let n = tris.len();
    let mesh = TriangleMesh::new(dim, coords, tris)?;
    if mesh.triangles().len() != n {
        return Err(Error::ResolutionTooCoarse("cone mesh has degenerate triangles".into()));
    }
    Ok(ConeMesh { mesh, sheets, boundary_ids, rings })
}

/// Cone mesh over a boundary mesh of the same resolution, with as many rings
/// as subdivisions per base edge.
pub fn cone_mesh(dom: &ConvexDomain, resolution: usize) -> Result<ConeMesh> {
    let bm = boundary_mesh(dom, resolution)?;
    cone_mesh_on(&bm, resolution)
}

/// Gradient of the total area with respect to every vertex coordinate.
pub fn area_gradient(mesh: &TriangleMesh) -> Vec<f64> {
    let dim = mesh.dim();
    let mut g = vec![0.0; mesh.coords().len()];
    for tri in mesh.triangles() {
        let [a, b, c] = tri.map(|i| mesh.vertex(i));
        let u: Vec<f64> = (0..dim).map(|k| b[k] - a[k]).collect();
        let v: Vec<f64> = (0..dim).map(|k| c[k] - a[k]).collect();
        let uu: f64 = u.iter().map(|x| x * x).sum();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let uv: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
        let four_a = 2.0 * (uu * vv - uv * uv).max(0.0).sqrt();
        if four_a == 0.0 {
            continue;
        }
        for k in 0..dim {
            let du = (vv * u[k] - uv * v[k]) / four_a;
            let dv = (uu * v[k] - uv * u[k]) / four_a;
            g[tri[1] * dim + k] += du;
            g[tri[2] * dim + k] += dv;
            g[tri[0] * dim + k] -= du + dv;
        }
    }
    g
}

/// Smooth bounded vector field `Σ b_k sin(⟨w_k, x⟩ + φ_k)` with
/// `Σ |b_k| = 1`, so its norm never exceeds one.
#[derive(Clone, Debug)]
pub struct SmoothField {
    modes: Vec<(Point, f64, Point)>,
}

impl SmoothField {
    pub fn random(dim: usize, n_modes: usize, rng: &mut impl Rng) -> Self {
        let gaussian = |rng: &mut dyn rand::RngCore| -> Point {
            Point::from_fn(dim, |_, _| {
                // Box–Muller
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
        };
        let mut modes = Vec::with_capacity(n_modes);
        let mut total = 0.0;
        for _ in 0..n_modes {
            let w = gaussian(rng).normalize() * rng.gen_range(2.0..6.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = gaussian(rng) * rng.gen_range(0.2..1.0);
            total += b.norm();
            modes.push((w, phase, b));
        }
        for m in &mut modes {
            m.2 /= total;
        }
        SmoothField { modes }
    }

    pub fn eval(&self, x: &Point) -> Point {
        let mut out = Point::zeros(x.len());
        for (w, phase, b) in &self.modes {
            out += b * (w.dot(x) + phase).sin();
        }
        out
    }
}

/// Deformed cone mesh together with the sliding constraints.
#[derive(Clone, Debug)]
pub struct SlidingState {
    pub mesh: TriangleMesh,
    pub reference: TriangleMesh,
    pub boundary_vertex_flags: Vec<bool>,
    pub delta: f64,
    pub dom: ConvexDomain,
    pub max_boundary_drift: f64,
    // boundary-curve neighbours of non-junction boundary vertices
    curve_neighbors: Vec<Option<(usize, usize)>>,
}

impl SlidingState {
    pub fn new(dom: &ConvexDomain, mesh: TriangleMesh, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return invalid("delta must be positive");
        }
        let flags = mesh.boundary_vertex_flags();
        for (i, &b) in flags.iter().enumerate() {
            if b {
                let g = dom.gauge(&mesh.vertex_point(i));
                if (g - 1.0).abs() > crate::domain::ON_BOUNDARY_TOL {
                    return Err(Error::OffBoundary((g - 1.0).abs()));
                }
            }
        }
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in mesh.boundary_edges() {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let curve_neighbors = (0..mesh.vertex_count())
            .map(|i| match adj.get(&i) {
                Some(n) if n.len() == 2 => Some((n[0], n[1])),
                _ => None,
            })
            .collect();
        Ok(SlidingState {
            reference: mesh.clone(),
            mesh,
            boundary_vertex_flags: flags,
            delta,
            dom: dom.clone(),
            max_boundary_drift: 0.0,
            curve_neighbors,
        })
    }

    pub fn area(&self) -> f64 {
        mesh_area(&self.mesh)
    }

    fn drift(&self, i: usize, x: &Point) -> f64 {
        (x - self.reference.vertex_point(i)).norm()
    }

    /// Projects a displacement of vertex `i` onto its admissible directions.
    fn admissible(&self, mesh: &TriangleMesh, i: usize, v: Point) -> Result<Point> {
        if !self.boundary_vertex_flags[i] {
            return Ok(v);
        }
        let x = mesh.vertex_point(i);
        let n = self.dom.outward_normal(&x)?;
        let mut v = &v - &n * n.dot(&v);
        if let Some((a, b)) = self.curve_neighbors[i] {
            let t = mesh.vertex_point(b) - mesh.vertex_point(a);
            let t = &t - &n * n.dot(&t);
            let len = t.norm();
            if len > 0.0 {
                let t = t / len;
                v -= &t * t.dot(&v);
            }
        }
        Ok(v)
    }

    fn projected_gradient(&self, mesh: &TriangleMesh) -> Result<Vec<f64>> {
        let dim = mesh.dim();
        let mut g = area_gradient(mesh);
        for i in 0..mesh.vertex_count() {
            if self.boundary_vertex_flags[i] {
                let v = Point::from_column_slice(&g[i * dim..(i + 1) * dim]);
                let p = self.admissible(mesh, i, v)?;
                g[i * dim..(i + 1) * dim].copy_from_slice(p.as_slice());
            }
        }
        Ok(g)
    }

    /// Applies per-vertex displacements and restores the constraints.
    /// Returns `None` when a boundary vertex cannot be kept within `δ` or a
    /// triangle collapses.
    fn displaced(&self, step: &[f64]) -> Result<Option<(TriangleMesh, f64)>> {
        let dim = self.mesh.dim();
        let limit = self.delta * (1.0 - 1e-9);
        let mut coords = Vec::with_capacity(step.len());
        let mut max_drift: f64 = 0.0;
        for i in 0..self.mesh.vertex_count() {
            let x = self.mesh.vertex_point(i) + Point::from_column_slice(&step[i * dim..(i + 1) * dim]);
            let y = if self.boundary_vertex_flags[i] {
                let mut y = self.dom.project_to_boundary(&x)?;
                let d = self.drift(i, &y);
                if d >= limit {
                    let r = self.reference.vertex_point(i);
                    y = self.dom.project_to_boundary(&(&r + (&y - &r) * (0.999 * limit / d)))?;
                }
                let d = self.drift(i, &y);
                if d >= limit {
                    return Ok(None);
                }
                max_drift = max_drift.max(d);
                y
            } else {
                let g = self.dom.gauge(&x);
                if g > 1.0 {
                    x / g
                } else {
                    x
                }
            };
            coords.extend(y.iter());
        }
        let mesh = self.mesh.with_coords(coords)?;
        if (0..mesh.triangles().len()).any(|t| mesh.triangle_area(t) < MIN_TRIANGLE_AREA) {
            return Ok(None);
        }
        Ok(Some((mesh, max_drift)))
    }

    fn with_mesh(&self, mesh: TriangleMesh, max_drift: f64) -> Self {
        SlidingState { mesh, max_boundary_drift: max_drift, ..self.clone() }
    }
}

/// Random δ-sliding perturbation of `state` by a smooth field of norm at most
/// `amplitude`. Halves the amplitude up to ten times when the constraints
/// cannot be restored.
pub fn random_sliding_perturbation(state: &SlidingState, amplitude: f64, seed: u64) -> Result<SlidingState> {
    if !(amplitude >= 0.0 && amplitude < state.delta) {
        return invalid(format!("amplitude {amplitude} must lie in [0, delta = {})", state.delta));
    }
    if amplitude == 0.0 {
        return Ok(state.clone());
    }
    let dim = state.mesh.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = SmoothField::random(dim, 6, &mut rng);
    let mut base: Vec<f64> = Vec::with_capacity(state.mesh.coords().len());
    for i in 0..state.mesh.vertex_count() {
        let x = state.mesh.vertex_point(i);
        let v = state.admissible(&state.mesh, i, field.eval(&x))?;
        base.extend(v.iter());
    }
    let mut amp = amplitude;
    for _ in 0..=10 {
        let step: Vec<f64> = base.iter().map(|v| v * amp).collect();
        if let Some((mesh, drift)) = state.displaced(&step)? {
            return Ok(state.with_mesh(mesh, drift));
        }
        amp *= 0.5;
    }
    Err(Error::Numerical("sliding perturbation failed after 10 amplitude halvings".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TerminalReason {
    Converged,
    MaxIter,
    ConstraintHit,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DescentStep {
    pub step: usize,
    pub area: f64,
    pub gradient_norm: f64,
    pub max_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub iterations: Vec<DescentStep>,
    pub terminal_reason: TerminalReason,
}

impl DescentTrace {
    pub fn csv(&self) -> String {
        let mut s = String::from("iteration,area,grad_norm,max_drift\n");
        for it in &self.iterations {
            s.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", it.step, it.area, it.gradient_norm, it.max_drift));
        }
        s
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected nonlinear conjugate gradients (Polak–Ribière+) with Armijo
/// backtracking. Every accepted step strictly lowers the area.
pub fn area_descent(state: &SlidingState, max_iter: usize, tol_grad: f64) -> Result<(DescentTrace, SlidingState)> {
    let mut cur = state.clone();
    let mut area = cur.area();
    let mut g = cur.projected_gradient(&cur.mesh)?;
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut g_prev = g.clone();
    let mut alpha = 0.1;
    let mut iterations = vec![DescentStep { step: 0, area, gradient_norm: norm(&g), max_drift: cur.max_boundary_drift }];
    let mut stalls = 0;
    let mut reason = TerminalReason::MaxIter;
    for it in 1..=max_iter {
        let gn = norm(&g);
        if gn < tol_grad {
            reason = TerminalReason::Converged;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|x| -x).collect();
            slope = -gn * gn;
        }
        let mut a = alpha * 4.0;
        let mut accepted = None;
        let mut blocked = false;
        for _ in 0..60 {
            let step: Vec<f64> = d.iter().map(|x| x * a).collect();
            match cur.displaced(&step)? {
                Some((mesh, drift)) => {
                    let new_area = mesh_area(&mesh);
                    if new_area < area && new_area <= area + 1e-4 * a * slope {
                        accepted = Some((mesh, drift, new_area));
                        break;
                    }
                }
                None => blocked = true,
            }
            a *= 0.5;
        }
        let Some((mesh, drift, new_area)) = accepted else {
            if dot(&d, &g) < -gn * gn * (1.0 - 1e-12) || d.iter().zip(&g).all(|(x, y)| *x == -*y) {
                reason = if blocked { TerminalReason::ConstraintHit } else { TerminalReason::Converged };
                break;
            }
            // retry along the steepest descent direction
            d = g.iter().map(|x| -x).collect();
            continue;
        };
        alpha = a;
        let decrease = area - new_area;
        cur = cur.with_mesh(mesh, drift);
        area = new_area;
        g_prev.clone_from(&g);
        g = cur.projected_gradient(&cur.mesh)?;
        let y: Vec<f64> = g.iter().zip(&g_prev).map(|(a, b)| a - b).collect();
        let beta = (dot(&g, &y) / dot(&g_prev, &g_prev)).max(0.0);
        d = g.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        // keep the search direction admissible at the new point
        let dim = cur.mesh.dim();
        for i in 0..cur.mesh.vertex_count() {
            if cur.boundary_vertex_flags[i] {
                let v = Point::from_column_slice(&d[i * dim..(i + 1) * dim]);
                let p = cur.admissible(&cur.mesh, i, v)?;
                d[i * dim..(i + 1) * dim].copy_from_slice(p.as_slice());
            }
        }
        iterations.push(DescentStep { step: it, area, gradient_norm: norm(&g), max_drift: cur.max_boundary_drift });
        stalls = if decrease < 1e-15 * area { stalls + 1 } else { 0 };
        if stalls >= 10 {
            reason = TerminalReason::Converged;
            break;
        }
    }
    Ok((DescentTrace { iterations, terminal_reason: reason }, cur))
}

/// Knobs for [`stability_experiment`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentOptions {
    pub resolution: usize,
    pub amplitude: f64,
    pub max_iter: usize,
    pub tol_grad: f64,
    /// Allowed shortfall of a final area below the cone area.
    pub tol: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { resolution: 8, amplitude: 0.05, max_iter: 400, tol_grad: 1e-7, tol: 1e-3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub initial_area: f64,
    pub final_area: f64,
    pub terminal_reason: TerminalReason,
    pub iterations: usize,
    pub max_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub cone: String,
    pub eta: f64,
    pub delta: f64,
    pub trials: usize,
    /// Area of the unperturbed cone mesh; final areas are compared with it.
    pub cone_area: f64,
    /// `H²(K ∩ Ū)` from the closed form.
    pub analytic_area: f64,
    /// Projected gradient norm of the unperturbed mesh.
    pub stationarity_gradient: f64,
    pub min_final_area: f64,
    /// Share of trials ending within `tol` of the cone area.
    pub converged_fraction: f64,
    pub results: Vec<TrialResult>,
    pub pass: bool,
    #[serde(skip)]
    pub counterexample: Option<TriangleMesh>,
    #[serde(skip)]
    pub traces: Vec<DescentTrace>,
    /// The unperturbed cone mesh.
    #[serde(skip)]
    pub initial_mesh: Option<TriangleMesh>,
    #[serde(skip)]
    pub final_meshes: Vec<TriangleMesh>,
}

/// Runs `trials` perturb-and-descend cycles on the cone mesh of `spec` in
/// `U(spec, η)`. Trials run in parallel; trial `k` uses stream `k` of `seed`.
pub fn stability_experiment(
    spec: &ConeSpec,
    eta: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentSummary> {
    let dom = ConvexDomain::new(spec.clone(), eta)?;
    let r1 = dom.r1();
    if !(delta > 0.0 && delta <= r1 + 1e-12) {
        return invalid(format!("delta = {delta} must lie in (0, R1(eta) = {r1}]"));
    }
    let cm = cone_mesh(&dom, opts.resolution)?;
    let base = SlidingState::new(&dom, cm.mesh.clone(), delta)?;
    let cone_area = base.area();
    let stationarity_gradient = norm(&base.projected_gradient(&base.mesh)?);
    let outcomes: Vec<Result<(TrialResult, DescentTrace, SlidingState)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let trial_seed: u64 = rng.gen();
            let amp = opts.amplitude.min(0.5 * delta);
            let start = random_sliding_perturbation(&base, amp, trial_seed)?;
            let initial_area = start.area();
            let (trace, fin) = area_descent(&start, opts.max_iter, opts.tol_grad)?;
            let res = TrialResult {
                seed: trial_seed,
                initial_area,
                final_area: fin.area(),
                terminal_reason: trace.terminal_reason,
                iterations: trace.iterations.len() - 1,
                max_drift: fin.max_boundary_drift,
            };
            Ok((res, trace, fin))
        })
        .collect();
    let mut results = Vec::with_capacity(trials);
    let mut traces = Vec::with_capacity(trials);
    let mut counterexample = None;
    let mut final_meshes = Vec::with_capacity(trials);
    let mut min_final_area = f64::INFINITY;
    for o in outcomes {
        let (res, trace, fin) = o?;
        if res.final_area < cone_area - opts.tol && counterexample.is_none() {
            counterexample = Some(fin.mesh.clone());
        }
        min_final_area = min_final_area.min(res.final_area);
        results.push(res);
        traces.push(trace);
        final_meshes.push(fin.mesh);
    }
    let close = results.iter().filter(|r| (r.final_area - cone_area).abs() <= opts.tol).count();
    Ok(ExperimentSummary {
        cone: spec.kind().name().to_string(),
        eta,
        delta,
        trials,
        cone_area,
        analytic_area: untranslated_area_closed_form(&dom),
        stationarity_gradient,
        min_final_area,
        converged_fraction: if trials == 0 { 1.0 } else { close as f64 / trials as f64 },
        pass: min_final_area >= cone_area - opts.tol,
        results,
        counterexample,
        traces,
        initial_mesh: Some(cm.mesh),
        final_meshes,
    })
}
