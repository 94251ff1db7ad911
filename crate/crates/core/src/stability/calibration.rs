//! Calibration of the tetrahedral cone by the constant fields `a_j`.
//!
//! `U \ T` has four cells `O_j`, cell `j` containing `−a_j`. A competitor
//! `F` with the same trace splits `U` the same way; each cell is bounded by
//! its interface pieces `F_j` and its wall `D_j ⊂ ∂U`. Since `a_j` is
//! divergence free, `∫_{F_j} ⟨v_j, a_j⟩ = H²(π_j(D_j))`, and summing over `j`
//! pairs each interface triangle with `a_from − a_to`, whose length is
//! `2√2/√3`. Hence the flux is at most `(2√2/√3)·H²(F)`, with equality for
//! `T` itself.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{boundary_mesh, triangle_normal, BoundaryMesh};
use crate::cones::ConeKind;
use crate::deform::{cone_mesh_on, ConeMesh, SmoothField};
use crate::domain::{BoundaryRegion, ConvexDomain};
use crate::error::{invalid, Error, Result};
use crate::geom::{cross3, Point, TriangleMesh};
use crate::measure::{clipped_cone_area, QuadratureBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SurfaceLabel {
    /// Interface piece of sheet `piece`; the triangle normal points out of
    /// cell `from` into cell `to`.
    Interface { piece: usize, from: usize, to: usize },
    /// Part of the wall `D_region` on `∂U`, normal pointing out of `U`.
    Wall { region: usize },
}

/// Interface and wall triangles of a partition of `U`, in one mesh.
#[derive(Clone, Debug)]
pub struct LabeledSurface {
    pub mesh: TriangleMesh,
    pub labels: Vec<SurfaceLabel>,
    /// Calibrating direction of each cell.
    pub directions: Vec<[f64; 3]>,
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn vector_area(mesh: &TriangleMesh, t: usize) -> [f64; 3] {
    let [a, b, c] = mesh.triangles()[t].map(|i| mesh.vertex(i));
    let n = cross3(sub(b, a), sub(c, a));
    [0.5 * n[0], 0.5 * n[1], 0.5 * n[2]]
}

const INV_CAL: f64 = 0.612_372_435_695_794_5; // √3 / (2√2)

impl LabeledSurface {
    pub fn new(mesh: TriangleMesh, labels: Vec<SurfaceLabel>, directions: Vec<[f64; 3]>) -> Result<Self> {
        if mesh.dim() != 3 {
            return invalid("calibration surfaces live in R^3");
        }
        if labels.len() != mesh.triangles().len() {
            return invalid("one label per triangle is required");
        }
        let n = directions.len();
        for l in &labels {
            let ok = match *l {
                SurfaceLabel::Interface { from, to, .. } => from < n && to < n && from != to,
                SurfaceLabel::Wall { region } => region < n,
            };
            if !ok {
                return invalid(format!("label {l:?} refers to a missing cell"));
            }
        }
        Ok(LabeledSurface { mesh, labels, directions })
    }

    /// The tetrahedral configuration: `interface` has the connectivity of
    /// `cone` (whose sheets fix the labels), walls are the components of `bm`.
    pub fn tetrahedral(dom: &ConvexDomain, bm: &BoundaryMesh, cone: &ConeMesh, interface: &TriangleMesh) -> Result<Self> {
        let spec = dom.spec();
        if spec.kind() != ConeKind::T || dom.dim() != 3 {
            return invalid("the tetrahedral calibration needs the T cone in R^3");
        }
        if interface.triangles() != cone.mesh.triangles() {
            return invalid("interface mesh does not share the cone mesh connectivity");
        }
        let dirs: Vec<[f64; 3]> =
            spec.singular_dirs().iter().map(|a| [a.as_point()[0], a.as_point()[1], a.as_point()[2]]).collect();
        // walls must avoid their own plate and the bands next to it
        for (t, &c) in bm.components.iter().enumerate() {
            let bad = match bm.regions[t] {
                BoundaryRegion::Plate(j) => j == c,
                BoundaryRegion::Band(k) => spec.arcs()[k].i == c || spec.arcs()[k].j == c,
                _ => false,
            };
            if bad {
                return Err(Error::Numerical(format!("wall {c} touches its own plate or band (face {t})")));
            }
        }
        let n_pieces = bm.base().piece_chains.len();
        let mut orient = vec![None; n_pieces];
        for (t, &piece) in cone.sheets.iter().enumerate() {
            if orient[piece].is_some() {
                continue;
            }
            let arc = &spec.arcs()[piece];
            let mut cells = (0..4).filter(|&c| c != arc.i && c != arc.j);
            let (a, b) = (cells.next().expect("four cells"), cells.next().expect("four cells"));
            let n = triangle_normal(&cone.mesh, t);
            let d = sub(&dirs[a], &dirs[b]);
            orient[piece] = Some(if dot(n, d) > 0.0 { (a, b) } else { (b, a) });
        }
        let mut coords = interface.coords().to_vec();
        let offset = interface.vertex_count();
        coords.extend_from_slice(bm.mesh.coords());
        let mut tris = interface.triangles().to_vec();
        let mut labels: Vec<SurfaceLabel> = cone
            .sheets
            .iter()
            .map(|&piece| {
                let (from, to) = orient[piece].expect("every sheet has triangles");
                SurfaceLabel::Interface { piece, from, to }
            })
            .collect();
        for (t, tri) in bm.mesh.triangles().iter().enumerate() {
            tris.push(tri.map(|v| v + offset));
            labels.push(SurfaceLabel::Wall { region: bm.components[t] });
        }
        let count = tris.len();
        let mesh = TriangleMesh::new(3, coords, tris)?;
        if mesh.triangles().len() != count {
            return Err(Error::InvalidMesh("competitor has collapsed triangles".into()));
        }
        LabeledSurface::new(mesh, labels, dirs)
    }

    pub fn interface_area(&self) -> f64 {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, SurfaceLabel::Interface { .. }))
            .map(|(t, _)| self.mesh.triangle_area(t))
            .sum()
    }

    /// `|∫_{∂O_j} ν|` for every cell: zero when `F_j ∪ D_j` is closed.
    pub fn closure_defects(&self) -> Vec<f64> {
        let mut sums = vec![[0.0; 3]; self.directions.len()];
        let mut add = |j: usize, v: [f64; 3], s: f64| {
            for k in 0..3 {
                sums[j][k] += s * v[k];
            }
        };
        for (t, l) in self.labels.iter().enumerate() {
            let v = vector_area(&self.mesh, t);
            match *l {
                SurfaceLabel::Interface { from, to, .. } => {
                    add(from, v, 1.0);
                    add(to, v, -1.0);
                }
                SurfaceLabel::Wall { region } => add(region, v, 1.0),
            }
        }
        sums.iter().map(|s| dot(*s, *s).sqrt()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationResult {
    /// `Σ_j ∫_{F_j} ⟨v_j, a_j⟩`.
    pub flux: f64,
    /// `Σ_F |a_from − a_to|·area`, which is `(2√2/√3)·H²(F)` for T.
    pub bound: f64,
    pub interface_area: f64,
    /// `∫_{D_j} |⟨n, a_j⟩|` per cell.
    pub projected: Vec<f64>,
    pub closure_defects: Vec<f64>,
}

impl CalibrationResult {
    pub fn ratio(&self) -> f64 {
        self.flux / self.bound
    }

    pub fn projected_total(&self) -> f64 {
        self.projected.iter().sum()
    }
}

/// Largest closure defect accepted by [`calibration_functional`].
pub const CLOSURE_TOL: f64 = 1e-6;

pub fn calibration_functional(ls: &LabeledSurface) -> Result<CalibrationResult> {
    let closure_defects = ls.closure_defects();
    if let Some(d) = closure_defects.iter().cloned().find(|d| *d > CLOSURE_TOL) {
        return Err(Error::InvalidMesh(format!("a cell boundary is not closed: flux defect {d:e}")));
    }
    let (mut flux, mut bound, mut interface_area) = (0.0, 0.0, 0.0);
    let mut projected = vec![0.0; ls.directions.len()];
    for (t, l) in ls.labels.iter().enumerate() {
        let v = vector_area(&ls.mesh, t);
        match *l {
            SurfaceLabel::Interface { from, to, .. } => {
                let d = sub(&ls.directions[from], &ls.directions[to]);
                let area = ls.mesh.triangle_area(t);
                flux += dot(v, d);
                bound += dot(d, d).sqrt() * area;
                interface_area += area;
            }
            SurfaceLabel::Wall { region } => projected[region] += dot(v, ls.directions[region]).abs(),
        }
    }
    Ok(CalibrationResult { flux, bound, interface_area, projected, closure_defects })
}

/// Copy of the cone mesh with interior vertices pushed by a smooth field of
/// norm at most `amplitude` (kept inside `Ū`); boundary vertices stay put.
pub fn perturbed_competitor(dom: &ConvexDomain, cone: &ConeMesh, amplitude: f64, seed: u64) -> Result<TriangleMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = SmoothField::random(dom.dim(), 6, &mut rng);
    let flags = cone.mesh.boundary_vertex_flags();
    let mut coords = Vec::with_capacity(cone.mesh.coords().len());
    for i in 0..cone.mesh.vertex_count() {
        let x = cone.mesh.vertex_point(i);
        let y: Point = if flags[i] {
            x
        } else {
            let y = &x + field.eval(&x) * amplitude;
            let g = dom.gauge(&y);
            if g > 1.0 {
                y / g
            } else {
                y
            }
        };
        coords.extend(y.iter());
    }
    let mesh = cone.mesh.with_coords(coords)?;
    if (0..mesh.triangles().len()).any(|t| mesh.triangle_area(t) < crate::deform::MIN_TRIANGLE_AREA) {
        return Err(Error::Numerical("perturbation collapsed a triangle".into()));
    }
    Ok(mesh)
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationIdentity {
    /// `H²(T ∩ Ū)` by quadrature.
    pub lhs: f64,
    pub lhs_error: f64,
    /// `(√3/2√2)·Σ_i ∫_{Ω'_i} |⟨n, a_i⟩|` on the boundary mesh.
    pub rhs: f64,
    pub rel_gap: f64,
    pub resolution: usize,
    /// Wall vertices off the trace where the normal of `∂U` has the wrong
    /// sign against `a_i`, so that `π_i` could fold `Ω'_i`.
    pub sign_violations: usize,
    /// Flat triangles whose own normal has the wrong sign. Coarse triangles
    /// cutting across a plate rim can tilt this way; the signed flux used for
    /// `rhs` is unaffected since it only sees the boundary polygon.
    pub folded_triangles: usize,
}

pub fn t_calibration_identity(dom: &ConvexDomain, resolution: usize) -> Result<CalibrationIdentity> {
    let spec = dom.spec();
    if spec.kind() != ConeKind::T || dom.dim() != 3 {
        return invalid("the calibration identity concerns the T cone in R^3");
    }
    let lhs = clipped_cone_area(dom, spec, &crate::cones::Translation::zero(3), &QuadratureBudget::default())?;
    let bm = boundary_mesh(dom, resolution)?;
    let dirs = spec.singular_dirs();
    // signed flux: the projected area of each wall's boundary polygon
    let mut proj = 0.0;
    let mut folded_triangles = 0;
    let mut seen = vec![false; bm.mesh.vertex_count()];
    let mut sign_violations = 0;
    for (t, &c) in bm.components.iter().enumerate() {
        let a = dirs[c].as_point();
        let v = vector_area(&bm.mesh, t);
        let s = v[0] * a[0] + v[1] * a[1] + v[2] * a[2];
        if s >= 0.0 {
            folded_triangles += 1;
        }
        proj -= s;
        for &i in &bm.mesh.triangles()[t] {
            if !seen[i] {
                seen[i] = true;
                let x = bm.mesh.vertex_point(i);
                if dom.dist_to_cone(&x) > 1e-9 && dom.outward_normal(&x)?.dot(a) >= 0.0 {
                    sign_violations += 1;
                }
            }
        }
    }
    let rhs = INV_CAL * proj;
    Ok(CalibrationIdentity {
        lhs: lhs.value,
        lhs_error: lhs.error_estimate,
        rhs,
        rel_gap: (lhs.value - rhs).abs() / lhs.value,
        resolution,
        sign_violations,
        folded_triangles,
    })
}

/// Labeled surface of the unperturbed T at boundary resolution `resolution`.
pub fn t_labeled_surface(dom: &ConvexDomain, resolution: usize) -> Result<(BoundaryMesh, ConeMesh, LabeledSurface)> {
    let bm = boundary_mesh(dom, resolution)?;
    let cm = cone_mesh_on(&bm, resolution)?;
    let ls = LabeledSurface::tetrahedral(dom, &bm, &cm, &cm.mesh)?;
    Ok((bm, cm, ls))
}
