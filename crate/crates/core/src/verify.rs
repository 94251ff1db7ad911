//! The verification battery. Each check turns one statement of the theory
//! into a [`VerificationReport`] plus any plot-ready CSV tables.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::boundary::DEFAULT_RESOLUTION;
use crate::cones::{build, ConeKind};
use crate::deform::cone_mesh;
use crate::domain::ConvexDomain;
use crate::error::{invalid, Error, Result};
use crate::geom::{cylinder_mesh, mesh_area, Point, UnitVector};
use crate::measure::{coarea_lower_bound, QuadratureBudget};
use crate::report::{Op, VerificationReport};
use crate::stability::{
    band_constant_check, calibration_functional, fermat_lower_bound, measure_stability_scan, perturbed_competitor,
    plate_constant_check, recentered_cone_gap, t_calibration_identity, t_labeled_surface, viviani_sum, BandSpec,
    EquilateralTriangle, LabeledSurface, PlateSpec, Side,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Viviani,
    BandConstant,
    PlateConstant,
    MeasureScan,
    QuadraticRemainder,
    Coarea,
    CalibrationIdentity,
    CalibrationBound,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Viviani,
        Check::BandConstant,
        Check::PlateConstant,
        Check::MeasureScan,
        Check::QuadraticRemainder,
        Check::Coarea,
        Check::CalibrationIdentity,
        Check::CalibrationBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Viviani => "viviani",
            Check::BandConstant => "band-constant",
            Check::PlateConstant => "plate-constant",
            Check::MeasureScan => "measure-scan",
            Check::QuadraticRemainder => "quadratic-remainder",
            Check::Coarea => "coarea",
            Check::CalibrationIdentity => "calibration-identity",
            Check::CalibrationBound => "calibration-bound",
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check '{s}'")))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub cone: ConeKind,
    pub dim: usize,
    pub eta: f64,
    pub budget: QuadratureBudget,
    /// Boundary mesh resolution for the calibration checks.
    pub resolution: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            cone: ConeKind::Y,
            dim: 3,
            eta: 0.1,
            budget: QuadratureBudget::default(),
            resolution: DEFAULT_RESOLUTION,
            seed: 0,
        }
    }
}

impl CheckConfig {
    fn domain(&self) -> Result<ConvexDomain> {
        ConvexDomain::new(build(self.cone, self.dim)?, self.eta)
    }

    fn rng(&self, check: Check) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(check as u64);
        rng
    }

    fn base_report(&self, check: Check, paper_ref: &str, tolerance: f64) -> VerificationReport {
        let mut r = VerificationReport::new(check.name(), paper_ref, tolerance);
        r.param("cone", self.cone.name()).param("dim", self.dim).param("eta", self.eta).param("seed", self.seed);
        r
    }
}

/// A finished check: its report and named CSV tables.
#[derive(Clone, Debug)]
pub struct CheckOutput {
    pub report: VerificationReport,
    pub tables: Vec<(String, String)>,
}

impl CheckOutput {
    fn bare(report: VerificationReport) -> Self {
        CheckOutput { report: report.finish(), tables: Vec::new() }
    }
}

pub fn random_direction(dim: usize, rng: &mut impl Rng) -> Result<UnitVector> {
    loop {
        let v = Point::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > 1e-3 {
            return UnitVector::normalize(v);
        }
    }
}

pub fn run_check(check: Check, cfg: &CheckConfig) -> Result<CheckOutput> {
    match check {
        Check::Viviani => viviani(cfg),
        Check::BandConstant => band_constant(cfg),
        Check::PlateConstant => plate_constant(cfg),
        Check::MeasureScan => measure_scan(cfg),
        Check::QuadraticRemainder => quadratic_remainder(cfg),
        Check::Coarea => coarea(cfg),
        Check::CalibrationIdentity => calibration_identity(cfg),
        Check::CalibrationBound => calibration_bound(cfg),
    }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

pub const VIVIANI_POINTS: usize = 1000;

fn viviani(cfg: &CheckConfig) -> Result<CheckOutput> {
    let mut rng = cfg.rng(Check::Viviani);
    let tri = EquilateralTriangle::new(
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.0..PI),
    )?;
    let [a, b, c] = tri.vertices;
    let mut sums = Vec::with_capacity(VIVIANI_POINTS);
    for _ in 0..VIVIANI_POINTS {
        // uniform in the triangle
        let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        let p = [0, 1].map(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]));
        sums.push(viviani_sum(&tri, p)?);
    }
    let height = tri.height();
    let max_dev = sums.iter().map(|s| (s - height).abs()).fold(0.0, f64::max);
    // gates anywhere on the three sides give the same Fermat bound
    let lines = tri.lines();
    let mut fermat_dev: f64 = 0.0;
    for _ in 0..100 {
        let gates = [0, 1, 2].map(|k| {
            let (p, q) = (tri.vertices[(k + 1) % 3], tri.vertices[(k + 2) % 3]);
            let s: f64 = rng.gen_range(0.05..0.95);
            [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
        });
        fermat_dev = fermat_dev.max((fermat_lower_bound(gates, lines)? - height).abs());
    }
    let mut r = cfg.base_report(
        Check::Viviani,
        "distance sum to the sides of an equilateral triangle is constant (slice length bound)",
        1e-12,
    );
    r.param("points", VIVIANI_POINTS).param("side", tri.side());
    r.quantity("height", height)
        .quantity("spread", spread(&sums))
        .quantity("max_deviation", max_dev)
        .quantity("fermat_deviation", fermat_dev);
    r.rule("spread", Op::Le, 1e-12).rule("max_deviation", Op::Le, 1e-12).rule("fermat_deviation", Op::Le, 1e-10);
    Ok(CheckOutput::bare(r))
}

pub const BAND_ALPHAS: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2];
pub const BAND_THETAS: [f64; 2] = [FRAC_PI_2, PI];
const PARTITIONS: usize = 100;

fn band_constant(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = cfg.domain()?;
    let mut rng = cfg.rng(Check::BandConstant);
    let (n_beta, n_w) = (24, 6);
    let (mut max_spread, mut max_err) = (0.0f64, 0.0f64);
    let mut table = String::from("alpha,theta,constant,rhs,lhs_min,lhs_max\n");
    for &alpha in &BAND_ALPHAS {
        for &theta in &BAND_THETAS {
            let band = BandSpec::for_domain(&dom, theta, alpha)?;
            let mut lhs = Vec::with_capacity(PARTITIONS);
            let mut rhs = 0.0;
            for _ in 0..PARTITIONS {
                let part: Vec<Side> =
                    (0..n_beta * n_w).map(|_| if rng.gen() { Side::Plus } else { Side::Minus }).collect();
                let c = band_constant_check(&band, &part, n_beta, n_w)?;
                lhs.push(c.lhs);
                rhs = c.rhs;
            }
            max_spread = max_spread.max(spread(&lhs) / rhs);
            max_err = max_err.max(lhs.iter().map(|l| (l - rhs).abs() / rhs).fold(0.0, f64::max));
            let lo = lhs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = lhs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            table.push_str(&format!("{alpha:.16e},{theta:.16e},{:.16e},{rhs:.16e},{lo:.16e},{hi:.16e}\n", band.constant()));
        }
    }
    let mut r = cfg.base_report(
        Check::BandConstant,
        "projection constant of a band onto two tilted planes is independent of the split",
        1e-6,
    );
    r.param("alphas", BAND_ALPHAS).param("thetas", BAND_THETAS).param("partitions", PARTITIONS);
    r.param("grid", [n_beta, n_w]).param("r1", dom.r1());
    r.quantity("max_rel_spread", max_spread).quantity("max_rel_error", max_err);
    r.rule("max_rel_spread", Op::Le, 1e-6).rule("max_rel_error", Op::Le, 1e-6);
    Ok(CheckOutput { report: r.finish(), tables: vec![("band_constant.csv".into(), table)] })
}

pub const PLATE_ALPHAS: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

fn plate_constant(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = cfg.domain()?;
    let mut rng = cfg.rng(Check::PlateConstant);
    let (n_phi, n_r) = (6, 3);
    let (mut max_spread, mut max_err) = (0.0f64, 0.0f64);
    for &alpha in &PLATE_ALPHAS {
        let plate = PlateSpec::for_domain(&dom, alpha)?;
        let n = plate.cells(n_phi, n_r).len();
        let mut lhs = Vec::with_capacity(PARTITIONS);
        let mut rhs = 0.0;
        for _ in 0..PARTITIONS {
            let coloring: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let c = plate_constant_check(&plate, &coloring, n_phi, n_r)?;
            lhs.push(c.lhs);
            rhs = c.rhs;
        }
        max_spread = max_spread.max(spread(&lhs) / rhs);
        max_err = max_err.max(lhs.iter().map(|l| (l - rhs).abs() / rhs).fold(0.0, f64::max));
    }
    let mut r = cfg.base_report(
        Check::PlateConstant,
        "projection constant of a plate onto three equally tilted planes is independent of the colouring",
        1e-10,
    );
    r.param("alphas", PLATE_ALPHAS).param("colorings", PARTITIONS).param("grid", [n_phi, n_r]);
    r.param("plate_radius", dom.plate_radius()).param("chord_distance", dom.chord_distance());
    r.quantity("max_rel_spread", max_spread).quantity("max_rel_error", max_err);
    r.rule("max_rel_spread", Op::Le, 1e-10).rule("max_rel_error", Op::Le, 1e-10);
    Ok(CheckOutput::bare(r))
}

pub const SCAN_DIRECTIONS: usize = 5;
pub const SCAN_TOL: f64 = 1e-4;

/// 11 translations spaced evenly in `[−0.05, 0.05]`, shrunk to
/// `[−η/2, η/2]` when η is smaller than 0.1.
pub fn scan_grid(eta: f64) -> Vec<f64> {
    let half = 0.05f64.min(0.5 * eta);
    (-5..=5).map(|k| half * k as f64 / 5.0).collect()
}

fn measure_scan(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = cfg.domain()?;
    let mut rng = cfg.rng(Check::MeasureScan);
    let grid = scan_grid(cfg.eta);
    let mut r = cfg.base_report(
        Check::MeasureScan,
        "area of a minimal cone clipped to its convex domain is stable under small translations",
        SCAN_TOL,
    );
    let (mut var, mut slope, mut numerics) = (0.0f64, 0.0f64, 0.0f64);
    let mut tables = Vec::new();
    let mut dirs = Vec::new();
    for i in 0..SCAN_DIRECTIONS {
        let q = random_direction(cfg.dim, &mut rng)?;
        let (scan, v) = measure_stability_scan(&dom, dom.spec(), &q, &grid, &cfg.budget, SCAN_TOL)?;
        var = var.max(v.max_rel_variation);
        slope = slope.max(v.slope.abs() / v.tol_slope);
        numerics = numerics.max(v.numerical_rel_error);
        r.quantity(&format!("rel_variation_q{i}"), v.max_rel_variation);
        tables.push((format!("scan_q{i}.csv"), scan.csv()));
        dirs.push(q.as_point().as_slice().to_vec());
    }
    r.param("directions", dirs).param("t_grid", &grid).param("budget", cfg.budget);
    r.quantity("max_rel_variation", var).quantity("max_slope_ratio", slope).quantity("numerical_rel_error", numerics);
    r.rule("max_rel_variation", Op::Le, SCAN_TOL).rule("max_slope_ratio", Op::Le, 1.0);
    Ok(CheckOutput { report: r.finish(), tables })
}

pub const GAP_S: [f64; 4] = [0.04, 0.02, 0.01, 0.005];
pub const GAP_SLOPE: f64 = 1.9;

fn quadratic_remainder(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = cfg.domain()?;
    let mut rng = cfg.rng(Check::QuadraticRemainder);
    let q = random_direction(cfg.dim, &mut rng)?;
    // the default values need η > 0.06; smaller η shrinks them in proportion
    let scale = (cfg.eta / 0.1).min(1.0);
    let t0 = 0.02 * scale;
    let s_list = GAP_S.map(|s| s * scale);
    let g = recentered_cone_gap(&dom, dom.spec(), &q, t0, &s_list)?;
    let mut table = String::from("s,gap,plate_bound\n");
    let mut excess = f64::NEG_INFINITY;
    for s in &g.samples {
        table.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.s, s.gap, s.plate_bound));
        for p in &s.plate_gaps {
            excess = excess.max(-p).max(p - s.plate_bound);
        }
    }
    let mut r = cfg.base_report(
        Check::QuadraticRemainder,
        "recentred cones over old and new boundary traces differ in area by a quadratic remainder",
        GAP_SLOPE,
    );
    r.param("q", q.as_point().as_slice()).param("t0", t0).param("s", s_list);
    for (k, s) in g.samples.iter().enumerate() {
        r.quantity(&format!("gap_{k}"), s.gap);
    }
    r.quantity("slope", g.slope);
    r.rule("slope", Op::Ge, GAP_SLOPE);
    if excess.is_finite() {
        r.quantity("plate_bound_excess", excess).rule("plate_bound_excess", Op::Le, 1e-10);
    }
    Ok(CheckOutput { report: r.finish(), tables: vec![("gap.csv".into(), table)] })
}

pub const COAREA_MESHES: usize = 100;
pub const COAREA_TOL: f64 = 1e-3;

fn coarea(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = cfg.domain()?;
    let mut rng = cfg.rng(Check::Coarea);
    let cm = cone_mesh(&dom, 12)?;
    let mut max_ratio: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    let mut table = String::from("mesh,area,coarea,error\n");
    for k in 0..COAREA_MESHES {
        let amp = rng.gen_range(0.01..0.05);
        let mesh = perturbed_competitor(&dom, &cm, amp, rng.gen())?;
        let axis = random_direction(cfg.dim, &mut rng)?;
        let h: Vec<f64> = (0..mesh.vertex_count()).map(|i| axis.dot(&mesh.vertex_point(i))).collect();
        let range = (h.iter().cloned().fold(f64::INFINITY, f64::min), h.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let c = coarea_lower_bound(&mesh, &axis, range, 400)?;
        let area = mesh_area(&mesh);
        max_ratio = max_ratio.max(c.integral / area);
        max_err = max_err.max(c.error_estimate / area);
        table.push_str(&format!("{k},{area:.16e},{:.16e},{:.16e}\n", c.integral, c.error_estimate));
    }
    let cyl = cylinder_mesh(0.5, 1.2, 64, 7)?;
    let z = UnitVector::axis(3, 2);
    let cyl_ratio = coarea_lower_bound(&cyl, &z, (0.0, 1.2), 200)?.integral / mesh_area(&cyl);
    let mut r = cfg.base_report(
        Check::Coarea,
        "integral of slice lengths is at most the area, with equality when the slicing function has unit gradient",
        COAREA_TOL,
    );
    r.param("meshes", COAREA_MESHES).param("slices", 400).param("cone_mesh_resolution", 12);
    r.quantity("max_ratio", max_ratio)
        .quantity("max_rel_quadrature_error", max_err)
        .quantity("cylinder_deviation", (cyl_ratio - 1.0).abs());
    r.rule("max_ratio", Op::Le, 1.0 + COAREA_TOL).rule("cylinder_deviation", Op::Le, COAREA_TOL);
    Ok(CheckOutput { report: r.finish(), tables: vec![("coarea.csv".into(), table)] })
}

fn require_t(cfg: &CheckConfig, check: Check) -> Result<ConvexDomain> {
    if cfg.cone != ConeKind::T || cfg.dim != 3 {
        return invalid(format!("{check} applies to the T cone in R^3 (--cone t --dim 3)"));
    }
    cfg.domain()
}

pub const CALIBRATION_TOL: f64 = 1e-3;

/// Largest deviation of the pairwise distances of the T directions from
/// `2√2/√3`.
pub fn tetra_frame_deviation(dom: &ConvexDomain) -> f64 {
    let d = dom.spec().singular_dirs();
    let target = 2.0 * 2f64.sqrt() / 3f64.sqrt();
    let mut dev: f64 = 0.0;
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            dev = dev.max(((d[i].as_point() - d[j].as_point()).norm() - target).abs());
        }
    }
    dev
}

fn calibration_identity(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = require_t(cfg, Check::CalibrationIdentity)?;
    let a = t_calibration_identity(&dom, cfg.resolution)?;
    let b = t_calibration_identity(&dom, 2 * cfg.resolution)?;
    let mut r = cfg.base_report(
        Check::CalibrationIdentity,
        "area of the T cone equals the rescaled projected area of the boundary walls",
        CALIBRATION_TOL,
    );
    r.param("resolution", cfg.resolution).param("refined_resolution", 2 * cfg.resolution);
    r.quantity("lhs", a.lhs)
        .quantity("lhs_error", a.lhs_error)
        .quantity("rhs", a.rhs)
        .quantity("rel_gap", a.rel_gap)
        .quantity("refined_rhs", b.rhs)
        .quantity("refined_rel_gap", b.rel_gap)
        .quantity("gap_ratio", b.rel_gap / a.rel_gap)
        .quantity("sign_violations", (a.sign_violations + b.sign_violations) as f64)
        .quantity("folded_triangles", a.folded_triangles as f64)
        .quantity("frame_deviation", tetra_frame_deviation(&dom));
    r.rule("rel_gap", Op::Le, CALIBRATION_TOL)
        .rule("gap_ratio", Op::Le, 0.5)
        .rule("sign_violations", Op::Le, 0.0)
        .rule("frame_deviation", Op::Le, 1e-12);
    Ok(CheckOutput::bare(r))
}

pub const COMPETITORS: usize = 20;

fn calibration_bound(cfg: &CheckConfig) -> Result<CheckOutput> {
    let dom = require_t(cfg, Check::CalibrationBound)?;
    let mut rng = cfg.rng(Check::CalibrationBound);
    let res = cfg.resolution.min(16);
    let (bm, cm, ls) = t_labeled_surface(&dom, res)?;
    let base = calibration_functional(&ls)?;
    let mut table = String::from("competitor,amplitude,flux,bound,ratio\n");
    table.push_str(&format!("0,0,{:.16e},{:.16e},{:.16e}\n", base.flux, base.bound, base.ratio()));
    let mut max_ratio: f64 = 0.0;
    let mut max_closure: f64 = base.closure_defects.iter().cloned().fold(0.0, f64::max);
    for k in 1..=COMPETITORS {
        let amp = rng.gen_range(0.01..0.05);
        let f = perturbed_competitor(&dom, &cm, amp, rng.gen())?;
        let c = calibration_functional(&LabeledSurface::tetrahedral(&dom, &bm, &cm, &f)?)?;
        max_ratio = max_ratio.max(c.ratio());
        max_closure = c.closure_defects.iter().cloned().fold(max_closure, f64::max);
        table.push_str(&format!("{k},{amp:.6},{:.16e},{:.16e},{:.16e}\n", c.flux, c.bound, c.ratio()));
    }
    let mut r = cfg.base_report(
        Check::CalibrationBound,
        "paired calibration: flux through any competitor is at most 2√2/√3 times its area, with equality at T",
        CALIBRATION_TOL,
    );
    r.param("competitors", COMPETITORS).param("resolution", res);
    r.quantity("unperturbed_ratio", base.ratio())
        .quantity("unperturbed_deviation", (base.ratio() - 1.0).abs())
        .quantity("max_perturbed_ratio", max_ratio)
        .quantity("max_closure_defect", max_closure);
    r.rule("unperturbed_deviation", Op::Le, CALIBRATION_TOL).rule("max_perturbed_ratio", Op::Lt, 1.0);
    Ok(CheckOutput { report: r.finish(), tables: vec![("calibration_bound.csv".into(), table)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("volume".parse::<Check>().is_err());
    }

    #[test]
    fn cheap_checks_pass_and_recheck() {
        let cfg = CheckConfig::default();
        for c in [Check::Viviani, Check::BandConstant, Check::PlateConstant] {
            let out = run_check(c, &cfg).unwrap();
            assert!(out.report.pass, "{:?}", out.report);
            let json = serde_json::to_string(&out.report).unwrap();
            let back: crate::report::VerificationReport = serde_json::from_str(&json).unwrap();
            assert_eq!(back.recheck(), out.report.pass);
        }
    }

    #[test]
    fn scans_pass_across_eta() {
        for cone in [ConeKind::Plane, ConeKind::Y, ConeKind::T] {
            for eta in [0.05, 0.2] {
                let cfg = CheckConfig { cone, eta, ..Default::default() };
                let out = run_check(Check::MeasureScan, &cfg).unwrap();
                assert!(out.report.pass, "{cone} {eta}: {:?}", out.report.failures());
            }
        }
    }

    #[test]
    fn calibration_needs_t() {
        let cfg = CheckConfig::default();
        assert!(matches!(run_check(Check::CalibrationIdentity, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn deterministic() {
        let cfg = CheckConfig { seed: 9, ..Default::default() };
        let a = serde_json::to_string(&run_check(Check::Viviani, &cfg).unwrap().report).unwrap();
        let b = serde_json::to_string(&run_check(Check::Viviani, &cfg).unwrap().report).unwrap();
        assert_eq!(a, b);
    }
}
