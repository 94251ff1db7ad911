//! Projection constant of a plate: the disk `B(0, R)` cut by three chords at
//! distance `d`, projected piecewise onto three planes that all meet it at
//! the angle `α`.

use serde::Serialize;

use crate::domain::{segment_area, ConvexDomain};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlateSpec {
    pub radius: f64,
    pub chord_distance: f64,
    pub alpha: f64,
}

/// One cell of the polar partition of the plate.
#[derive(Clone, Copy, Debug)]
pub struct PlateCell {
    pub phi: (f64, f64),
    pub fraction: (f64, f64),
    pub area: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl PlateSpec {
    pub fn new(radius: f64, chord_distance: f64, alpha: f64) -> Result<Self> {
        if !(chord_distance > 0.0 && chord_distance < radius) {
            return invalid("chords must cut the disk: 0 < d < R");
        }
        if (chord_distance / radius).acos() >= std::f64::consts::FRAC_PI_3 {
            return invalid("neighbouring chords overlap inside the disk");
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&alpha) {
            return invalid("plate tilt must lie in [0, π/2)");
        }
        Ok(PlateSpec { radius, chord_distance, alpha })
    }

    pub fn for_domain(dom: &ConvexDomain, alpha: f64) -> Result<Self> {
        PlateSpec::new(dom.plate_radius(), dom.chord_distance(), alpha)
    }

    /// Direction of the normal to chord `k`.
    pub fn chord_angle(&self, k: usize) -> f64 {
        std::f64::consts::TAU * k as f64 / 3.0
    }

    pub fn area(&self) -> f64 {
        let r = self.radius;
        std::f64::consts::PI * r * r - 3.0 * segment_area(r, self.chord_distance)
    }

    /// Unit normal of the plane `P_j`, spanned by the chord tangent `w_j` and
    /// `sin α a − cos α v_j`, where `a = e3` is the plate normal and `v_j`
    /// points at chord `j`.
    pub fn plane_normal(&self, j: usize) -> [f64; 3] {
        let (s, c) = self.chord_angle(j).sin_cos();
        let v = [c, s, 0.0];
        let (sa, ca) = self.alpha.sin_cos();
        [sa * v[0], sa * v[1], ca]
    }

    /// Jacobian of the projection of the plate onto `P_j`.
    pub fn jacobian(&self, j: usize) -> f64 {
        dot([0.0, 0.0, 1.0], self.plane_normal(j)).abs()
    }

    /// Polar cells: each of the six angular pieces (three chord pieces, three
    /// rim arcs) split into `n_phi` sectors, each sector into `n_r` radial
    /// bands of equal radius fraction. Cell areas are exact.
    pub fn cells(&self, n_phi: usize, n_r: usize) -> Vec<PlateCell> {
        let (r, d) = (self.radius, self.chord_distance);
        let gamma = (d / r).acos();
        let mut pieces: Vec<(f64, f64, Option<f64>)> = Vec::new();
        for k in 0..3 {
            let phi = self.chord_angle(k);
            pieces.push((phi - gamma, phi + gamma, Some(phi)));
            pieces.push((phi + gamma, self.chord_angle(k + 1) - gamma, None));
        }
        let sector = |a: f64, b: f64, chord: Option<f64>| match chord {
            None => 0.5 * r * r * (b - a),
            Some(phi) => 0.5 * d * d * ((b - phi).tan() - (a - phi).tan()),
        };
        let mut cells = Vec::with_capacity(6 * n_phi * n_r);
        for (a, b, chord) in pieces {
            for i in 0..n_phi {
                let p0 = a + (b - a) * i as f64 / n_phi as f64;
                let p1 = a + (b - a) * (i + 1) as f64 / n_phi as f64;
                let s = sector(p0, p1, chord);
                for k in 0..n_r {
                    let f0 = k as f64 / n_r as f64;
                    let f1 = (k + 1) as f64 / n_r as f64;
                    cells.push(PlateCell { phi: (p0, p1), fraction: (f0, f1), area: (f1 * f1 - f0 * f0) * s });
                }
            }
        }
        cells
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlateCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub areas: [f64; 3],
}

/// `Σ_j H²(π_j(E_j))` for a 3-colouring of the polar cells, against
/// `cos α · H²(A)`.
pub fn plate_constant_check(plate: &PlateSpec, coloring: &[u8], n_phi: usize, n_r: usize) -> Result<PlateCheck> {
    let cells = plate.cells(n_phi, n_r);
    if coloring.len() != cells.len() {
        return invalid(format!("coloring has {} labels for {} cells", coloring.len(), cells.len()));
    }
    let mut areas = [0.0; 3];
    for (cell, &c) in cells.iter().zip(coloring) {
        if c > 2 {
            return invalid(format!("colour {c} is not in 0..3"));
        }
        areas[c as usize] += cell.area;
    }
    let total: f64 = areas.iter().sum();
    let defect = (total - plate.area()).abs();
    if defect > 1e-8 {
        return invalid(format!("partition misses {defect:e} of the plate"));
    }
    let lhs = (0..3).map(|j| plate.jacobian(j) * areas[j]).sum();
    Ok(PlateCheck { lhs, rhs: plate.alpha.cos() * plate.area(), areas })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64) -> PlateSpec {
        let eta: f64 = 0.1;
        PlateSpec::new(crate::domain::plate_radius(eta), crate::domain::chord_distance(eta), alpha).unwrap()
    }

    #[test]
    fn cells_tile_the_plate() {
        let p = spec(0.3);
        let total: f64 = p.cells(7, 3).iter().map(|c| c.area).sum();
        assert!((total - p.area()).abs() < 1e-14);
    }

    #[test]
    fn untilted_is_the_area() {
        let p = spec(0.0);
        let n = p.cells(4, 2).len();
        let r = plate_constant_check(&p, &vec![1; n], 4, 2).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-15);
        assert!((r.lhs - p.area()).abs() < 1e-15);
    }

    #[test]
    fn single_colour() {
        let p = spec(0.7);
        let n = p.cells(4, 2).len();
        let r = plate_constant_check(&p, &vec![0; n], 4, 2).unwrap();
        assert!((r.lhs - 0.7f64.cos() * p.area()).abs() < 1e-15);
        assert!((p.jacobian(2) - 0.7f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn bad_colourings() {
        let p = spec(0.7);
        assert!(plate_constant_check(&p, &[0; 3], 4, 2).is_err());
        let n = p.cells(4, 2).len();
        assert!(plate_constant_check(&p, &vec![3; n], 4, 2).is_err());
    }
}
