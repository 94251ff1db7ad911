//! Clipped area of `K + tq` along a grid of translations.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{ConeSpec, Translation};
use crate::domain::ConvexDomain;
use crate::error::{invalid, Result};
use crate::geom::UnitVector;
use crate::measure::{clipped_cone_area, QuadratureBudget};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanSample {
    pub t: f64,
    pub area: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationScan {
    pub direction: UnitVector,
    /// Sorted by `t`.
    pub samples: Vec<ScanSample>,
    /// Apex positions `t·q`.
    pub center_offsets: Vec<Vec<f64>>,
    /// `(c0, c1, c2)` of the least-squares fit `c0 + c1 t + c2 t²`.
    pub fitted_quadratic: [f64; 3],
}

impl TranslationScan {
    pub fn csv(&self) -> String {
        let mut s = String::from("t,area,error\n");
        for p in &self.samples {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.t, p.area, p.error));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanVerdict {
    /// `max_t |area(t) − area(0)| / area(0)`.
    pub max_rel_variation: f64,
    pub tol_rel: f64,
    /// Three times the largest quadrature error estimate, relative to `area(0)`.
    pub numerical_rel_error: f64,
    pub slope: f64,
    pub tol_slope: f64,
    pub pass: bool,
}

/// Scans `t ↦ H²((K + tq) ∩ U)` on `t_grid` (which must contain 0 and stay
/// inside `(−η, η)`). Passes when the relative variation is at most
/// `tol_rel` and the fitted linear coefficient is at most
/// `tol_rel · area(0) / max|t|`.
pub fn measure_stability_scan(
    dom: &ConvexDomain,
    spec: &ConeSpec,
    q: &UnitVector,
    t_grid: &[f64],
    budget: &QuadratureBudget,
    tol_rel: f64,
) -> Result<(TranslationScan, ScanVerdict)> {
    if t_grid.len() < 3 {
        return invalid("a scan needs at least three translations");
    }
    if let Some(t) = t_grid.iter().find(|t| !(t.abs() < dom.eta())) {
        return invalid(format!("translation {t} is outside (−η, η) with η = {}", dom.eta()));
    }
    if !t_grid.contains(&0.0) {
        return invalid("the scan grid must contain t = 0");
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let samples: Vec<ScanSample> = ts
        .par_iter()
        .map(|&t| {
            let tr = Translation::signed(q, t)?;
            let m = clipped_cone_area(dom, spec, &tr, budget)?;
            Ok(ScanSample { t, area: m.value, error: m.error_estimate })
        })
        .collect::<Result<_>>()?;
    let center_offsets = ts.iter().map(|&t| (q.as_point() * t).as_slice().to_vec()).collect();
    let fitted_quadratic = fit_quadratic(&samples);
    let a0 = samples.iter().find(|s| s.t == 0.0).map(|s| s.area).unwrap_or(f64::NAN);
    let max_rel_variation = samples.iter().map(|s| (s.area - a0).abs() / a0).fold(0.0, f64::max);
    let numerical_rel_error = 3.0 * samples.iter().map(|s| s.error).fold(0.0, f64::max) / a0;
    let t_max = ts.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let tol_slope = tol_rel * a0 / t_max;
    let slope = fitted_quadratic[1];
    let pass = max_rel_variation <= tol_rel && slope.abs() <= tol_slope;
    let scan = TranslationScan { direction: q.clone(), samples, center_offsets, fitted_quadratic };
    Ok((scan, ScanVerdict { max_rel_variation, tol_rel, numerical_rel_error, slope, tol_slope, pass }))
}

fn fit_quadratic(samples: &[ScanSample]) -> [f64; 3] {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for s in samples {
        let row = Vector3::new(1.0, s.t, s.t * s.t);
        ata += row * row.transpose();
        atb += row * s.area;
    }
    match ata.lu().solve(&atb) {
        Some(c) => [c[0], c[1], c[2]],
        None => [f64::NAN; 3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{build, ConeKind};

    fn grid() -> Vec<f64> {
        (-5..=5).map(|k| k as f64 * 0.01).collect()
    }

    #[test]
    fn y_along_spine() {
        let spec = build(ConeKind::Y, 3).unwrap();
        let dom = ConvexDomain::new(spec.clone(), 0.1).unwrap();
        let q = UnitVector::axis(3, 2);
        let (scan, v) = measure_stability_scan(&dom, &spec, &q, &grid(), &QuadratureBudget::default(), 1e-4).unwrap();
        assert!(v.pass, "{v:?}");
        assert!(scan.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(scan.fitted_quadratic[1].abs() < 1e-6);
    }

    #[test]
    fn plane_normal_translation_is_exact() {
        let spec = build(ConeKind::Plane, 3).unwrap();
        let dom = ConvexDomain::new(spec.clone(), 0.1).unwrap();
        let q = UnitVector::axis(3, 2);
        let (_, v) = measure_stability_scan(&dom, &spec, &q, &grid(), &QuadratureBudget::default(), 1e-4).unwrap();
        assert!(v.max_rel_variation < 1e-12, "{v:?}");
    }

    #[test]
    fn rejects_out_of_range() {
        let spec = build(ConeKind::T, 3).unwrap();
        let dom = ConvexDomain::new(spec.clone(), 0.1).unwrap();
        let q = UnitVector::axis(3, 0);
        let r = measure_stability_scan(&dom, &spec, &q, &[-0.1, 0.0, 0.05], &QuadratureBudget::default(), 1e-4);
        assert!(r.is_err());
    }
}
