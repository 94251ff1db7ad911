//! Verification battery: translation scans, the quadratic remainder of the
//! recentred cones, planar slice bounds, the band and plate projection
//! constants, and the tetrahedral calibration.

pub mod band;
pub mod calibration;
pub mod gap;
pub mod planar;
pub mod plate;
pub mod scan;

pub use band::{band_constant_check, BandCheck, BandSpec, Side};
pub use calibration::{
    calibration_functional, perturbed_competitor, t_calibration_identity, CalibrationIdentity, CalibrationResult,
    t_labeled_surface, LabeledSurface, SurfaceLabel,
};
pub use gap::{recentered_cone_gap, GapReport};
pub use planar::{fermat_lower_bound, fermat_point, viviani_sum, EquilateralTriangle, Line2};
pub use plate::{plate_constant_check, PlateCheck, PlateSpec};
pub use scan::{measure_stability_scan, ScanSample, ScanVerdict, TranslationScan};

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
