//! Acceptance battery: one PASS/FAIL line per criterion, tolerances pinned.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conestab::cones::{build, ConeKind, Translation};
use conestab::deform::{
    area_descent, area_gradient, cone_mesh, stability_experiment, ExperimentOptions, SlidingState,
};
use conestab::domain::ConvexDomain;
use conestab::geom::triangle_area;
use conestab::measure::{clipped_cone_area, mc_cone_area_oracle, QuadratureBudget};
use conestab::report::VerificationReport;
use conestab::stability::perturbed_competitor;
use conestab::verify::{self, run_check, Check, CheckConfig};

const CONES: [ConeKind; 3] = [ConeKind::Plane, ConeKind::Y, ConeKind::T];
const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() <= limit_s
}

fn report_line(r: &VerificationReport) -> String {
    let mut keys: Vec<String> = r.rules.iter().map(|x| x.quantity.clone()).collect();
    keys.dedup();
    keys.iter().map(|k| format!("{k}={:.3e}", r.quantities[k])).collect::<Vec<_>>().join(" ")
}

fn cfg(cone: ConeKind, eta: f64) -> CheckConfig {
    CheckConfig { cone, eta, seed: SEED, ..Default::default() }
}

fn c1_measure_scan() -> Outcome {
    assert_eq!(verify::SCAN_TOL, 1e-4);
    assert_eq!(verify::SCAN_DIRECTIONS, 5);
    let grid = verify::scan_grid(0.1);
    assert_eq!(grid.len(), 11);
    assert!((grid[0] + 0.05).abs() < 1e-15 && (grid[10] - 0.05).abs() < 1e-15);
    let mut pass = true;
    let mut detail = Vec::new();
    for cone in CONES {
        let t = Instant::now();
        let out = run_check(Check::MeasureScan, &cfg(cone, 0.1)).unwrap();
        let per_scan = t.elapsed() / verify::SCAN_DIRECTIONS as u32;
        // the scans run multi-threaded; the per-scan budget is far above this
        pass &= out.report.pass && within(per_scan, 30.0);
        detail.push(format!("{cone}: {} ({:.2}s/scan)", report_line(&out.report), per_scan.as_secs_f64()));
    }
    outcome(pass, detail.join("; "))
}

fn c2_quadratic_remainder() -> Outcome {
    assert_eq!(verify::GAP_S, [0.04, 0.02, 0.01, 0.005]);
    assert_eq!(verify::GAP_SLOPE, 1.9);
    let t = Instant::now();
    let out = run_check(Check::QuadraticRemainder, &cfg(ConeKind::Y, 0.1)).unwrap();
    assert_eq!(out.report.params["t0"], 0.02);
    let el = t.elapsed();
    outcome(out.report.pass && within(el, 60.0), format!("{} ({:.2}s)", report_line(&out.report), el.as_secs_f64()))
}

fn c3_viviani() -> Outcome {
    assert_eq!(verify::VIVIANI_POINTS, 1000);
    let out = run_check(Check::Viviani, &cfg(ConeKind::Y, 0.1)).unwrap();
    let spread = out.report.quantities["spread"];
    outcome(out.report.pass && spread <= 1e-12, report_line(&out.report))
}

fn c4_band_constant() -> Outcome {
    assert_eq!(verify::BAND_ALPHAS, [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2]);
    assert_eq!(verify::BAND_THETAS, [FRAC_PI_2, PI]);
    let t = Instant::now();
    let out = run_check(Check::BandConstant, &cfg(ConeKind::Y, 0.1)).unwrap();
    let el = t.elapsed();
    let q = &out.report.quantities;
    let pass = out.report.pass && q["max_rel_spread"] <= 1e-6 && q["max_rel_error"] <= 1e-6 && within(el, 10.0);
    outcome(pass, format!("{} ({:.2}s)", report_line(&out.report), el.as_secs_f64()))
}

fn c5_plate_constant() -> Outcome {
    let out = run_check(Check::PlateConstant, &cfg(ConeKind::Y, 0.1)).unwrap();
    let q = &out.report.quantities;
    let pass = out.report.pass && q["max_rel_spread"] <= 1e-10 && q["max_rel_error"] <= 1e-10;
    outcome(pass, report_line(&out.report))
}

fn c6_tetra_frame() -> Outcome {
    let dom = ConvexDomain::new(build(ConeKind::T, 3).unwrap(), 0.1).unwrap();
    let dev = verify::tetra_frame_deviation(&dom);
    outcome(dev <= 1e-12, format!("max |‖a_i − a_j‖ − 2√2/√3| = {dev:.3e}"))
}

fn c7_calibration_identity() -> Outcome {
    assert_eq!(verify::CALIBRATION_TOL, 1e-3);
    let mut pass = true;
    let mut detail = Vec::new();
    for eta in [0.05, 0.1] {
        let t = Instant::now();
        let out = run_check(Check::CalibrationIdentity, &cfg(ConeKind::T, eta)).unwrap();
        let el = t.elapsed();
        let q = &out.report.quantities;
        pass &= out.report.pass && q["rel_gap"] <= 1e-3 && q["gap_ratio"] <= 0.5 && within(el, 60.0);
        detail.push(format!("eta={eta}: {} ({:.2}s)", report_line(&out.report), el.as_secs_f64()));
    }
    outcome(pass, detail.join("; "))
}

fn c8_calibration_bound() -> Outcome {
    assert_eq!(verify::COMPETITORS, 20);
    let t = Instant::now();
    let out = run_check(Check::CalibrationBound, &cfg(ConeKind::T, 0.1)).unwrap();
    let el = t.elapsed();
    let q = &out.report.quantities;
    let pass = out.report.pass && q["max_perturbed_ratio"] < 1.0 && q["unperturbed_deviation"] <= 1e-3 && within(el, 120.0);
    outcome(pass, format!("{} ({:.2}s)", report_line(&out.report), el.as_secs_f64()))
}

fn c9_coarea() -> Outcome {
    assert_eq!(verify::COAREA_MESHES, 100);
    assert_eq!(verify::COAREA_TOL, 1e-3);
    let t = Instant::now();
    let out = run_check(Check::Coarea, &cfg(ConeKind::Y, 0.1)).unwrap();
    let el = t.elapsed();
    let q = &out.report.quantities;
    let pass = out.report.pass && q["max_ratio"] <= 1.0 + 1e-3 && q["cylinder_deviation"] <= 1e-3 && within(el, 60.0);
    outcome(pass, format!("{} ({:.2}s)", report_line(&out.report), el.as_secs_f64()))
}

fn c10_sliding_stability() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (cone, trials, tol) in [(ConeKind::Plane, 20, 1e-3), (ConeKind::Y, 20, 1e-3), (ConeKind::T, 10, 2e-3)] {
        let spec = build(cone, 3).unwrap();
        let dom = ConvexDomain::new(spec.clone(), 0.1).unwrap();
        let delta = dom.r1();
        let opts = ExperimentOptions { tol, ..Default::default() };
        let s = stability_experiment(&spec, 0.1, delta, trials, SEED, &opts).unwrap();
        let shortfall = s.results.iter().map(|r| s.cone_area - r.final_area).fold(f64::NEG_INFINITY, f64::max);
        // stationarity: small projected gradient, and no area drift under descent
        let disc_err = (s.cone_area - s.analytic_area).abs();
        let cm = cone_mesh(&dom, opts.resolution).unwrap();
        let state = SlidingState::new(&dom, cm.mesh, delta).unwrap();
        let (_, fin) = area_descent(&state, 100, 0.0).unwrap();
        let drift = (fin.area() - state.area()).abs();
        let ok = s.results.len() == trials
            && s.results.iter().all(|r| r.final_area >= s.cone_area - tol)
            && s.stationarity_gradient <= 10.0 * disc_err
            && drift < 1e-6;
        pass &= ok;
        detail.push(format!(
            "{cone}: trials={trials} worst_shortfall={shortfall:.2e} (tol {tol:.0e}) grad={:.2e} <= 10*{disc_err:.2e} drift={drift:.1e}",
            s.stationarity_gradient
        ));
    }
    let el = t.elapsed();
    pass &= within(el, 600.0);
    detail.push(format!("{:.1}s", el.as_secs_f64()));
    outcome(pass, detail.join("; "))
}

fn c11_oracles() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for cone in CONES {
        let dom = ConvexDomain::new(build(cone, 3).unwrap(), 0.1).unwrap();
        let tr = Translation::zero(3);
        let q = clipped_cone_area(&dom, dom.spec(), &tr, &QuadratureBudget::default()).unwrap();
        let mc = mc_cone_area_oracle(&dom, dom.spec(), &tr, 1_000_000, SEED).unwrap();
        let z = (q.value - mc.value).abs() / mc.stderr;
        pass &= z <= 3.0;
        let mut d = format!("{cone}: quad={:.8} mc={:.5}±{:.1e} z={z:.2}", q.value, mc.value, mc.stderr);
        if cone == ConeKind::Y {
            // disk of radius 0.9 minus two segments at distance 0.8, per sheet
            let (r, h) = (0.9f64, 0.8f64);
            let analytic = 3.0 * (PI * r * r / 2.0 - (r * r * (h / r).acos() - h * (r * r - h * h).sqrt()));
            let e1 = (analytic - q.value).abs();
            let e2 = (analytic - mc.value).abs();
            pass &= e1 <= 1e-3 && e2 <= 1e-3;
            d.push_str(&format!(" analytic={analytic:.8} |Δquad|={e1:.1e} |Δmc|={e2:.1e}"));
        }
        detail.push(d);
    }
    outcome(pass, detail.join("; "))
}

fn c12_gradient() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for cone in CONES {
        let dom = ConvexDomain::new(build(cone, 3).unwrap(), 0.1).unwrap();
        let cm = cone_mesh(&dom, 8).unwrap();
        // away from the stationary cone so that the gradient is not tiny
        let mesh = perturbed_competitor(&dom, &cm, 0.04, rng.gen()).unwrap();
        let g = area_gradient(&mesh);
        let d = mesh.dim();
        let h = 1e-6;
        for _ in 0..20 {
            let v = rng.gen_range(0..mesh.vertex_count());
            // only the triangles around v change, so difference their area
            let star: Vec<[usize; 3]> = mesh.triangles().iter().filter(|t| t.contains(&v)).copied().collect();
            let star_area = |coords: &[f64]| -> f64 {
                let p = |i: usize| &coords[i * d..(i + 1) * d];
                star.iter().map(|t| triangle_area(p(t[0]), p(t[1]), p(t[2]))).sum()
            };
            let mut fd = vec![0.0; d];
            for (k, fk) in fd.iter_mut().enumerate() {
                let mut plus = mesh.coords().to_vec();
                let mut minus = plus.clone();
                plus[v * d + k] += h;
                minus[v * d + k] -= h;
                *fk = (star_area(&plus) - star_area(&minus)) / (2.0 * h);
            }
            let an = &g[v * d..(v + 1) * d];
            let err: f64 = fd.iter().zip(an).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = an.iter().map(|a| a * a).sum::<f64>().sqrt();
            worst = worst.max(err / scale);
        }
    }
    outcome(worst <= 1e-5, format!("worst relative error {worst:.2e} over 60 vertices"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("measure stability scan", c1_measure_scan),
        ("quadratic remainder", c2_quadratic_remainder),
        ("viviani constancy", c3_viviani),
        ("band constant", c4_band_constant),
        ("plate constant", c5_plate_constant),
        ("tetrahedron frame", c6_tetra_frame),
        ("calibration identity", c7_calibration_identity),
        ("calibration bound", c8_calibration_bound),
        ("coarea inequality", c9_coarea),
        ("sliding stability", c10_sliding_stability),
        ("oracle agreement", c11_oracles),
        ("mesh gradient", c12_gradient),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
