//! Projection constant of a band `Ξ = ξ × [−R1 v, R1 v]` onto the two tilted
//! planes `Q±`.
//!
//! At the band point with angle `β` from the arc midpoint the surface normal
//! is `cos β e1 + sin β e2`, and both `Q+` and `Q−` make it contribute
//! `sin α cos β`. Every ± split of the band therefore projects to the same
//! total area.

use serde::Serialize;

use crate::domain::ConvexDomain;
use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Band over an arc of angle `theta` (unit radius) with half-width `r1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BandSpec {
    pub theta: f64,
    pub alpha: f64,
    pub r1: f64,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub v: [f64; 3],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

impl BandSpec {
    pub fn new(theta: f64, alpha: f64, r1: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= std::f64::consts::PI) {
            return invalid("band angle must lie in (0, π]");
        }
        if !(alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_2) {
            return invalid("band tilt must lie in (0, π/2]");
        }
        if !(r1 > 0.0) {
            return invalid("band half-width must be positive");
        }
        Ok(BandSpec { theta, alpha, r1, e1: [1.0, 0.0, 0.0], e2: [0.0, 1.0, 0.0], v: [0.0, 0.0, 1.0] })
    }

    /// Band of `U(K, η)` over an arc of angle `theta`, with `R1(η)`.
    pub fn for_domain(dom: &ConvexDomain, theta: f64, alpha: f64) -> Result<Self> {
        BandSpec::new(theta, alpha, dom.r1())
    }

    /// Unit normal of `Q+` or `Q−`.
    pub fn plane_normal(&self, side: Side) -> [f64; 3] {
        let (s, c) = self.alpha.sin_cos();
        let sign = match side {
            Side::Plus => -1.0,
            Side::Minus => 1.0,
        };
        // orthogonal to e2 and to cos α e1 ± sin α v
        unit([0, 1, 2].map(|k| s * self.e1[k] + sign * c * self.v[k]))
    }

    pub fn surface_normal(&self, beta: f64) -> [f64; 3] {
        let (s, c) = beta.sin_cos();
        [0, 1, 2].map(|k| c * self.e1[k] + s * self.e2[k])
    }

    pub fn area(&self) -> f64 {
        2.0 * self.r1 * self.theta
    }

    /// `C(α, θ) = 2 sin α sin(θ/2) / θ`.
    pub fn constant(&self) -> f64 {
        2.0 * self.alpha.sin() * (self.theta / 2.0).sin() / self.theta
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BandCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

/// Projected area of a ± partition of the band into an `n_beta × n_w` grid
/// of cells (row-major in `β`), integrating the Jacobian `|⟨n(β), ν±⟩|` of
/// each cell against its own plane, compared with `C(α,θ)·H²(Ξ)`.
pub fn band_constant_check(band: &BandSpec, partition: &[Side], n_beta: usize, n_w: usize) -> Result<BandCheck> {
    if n_beta == 0 || n_w == 0 || partition.len() != n_beta * n_w {
        return invalid(format!(
            "partition has {} labels for a {n_beta} x {n_w} grid",
            partition.len()
        ));
    }
    let (x, w) = gauss_legendre(8);
    let h_beta = band.theta / n_beta as f64;
    let h_w = 2.0 * band.r1 / n_w as f64;
    let normals = [band.plane_normal(Side::Plus), band.plane_normal(Side::Minus)];
    let mut lhs = 0.0;
    for i in 0..n_beta {
        let b0 = -band.theta / 2.0 + i as f64 * h_beta;
        for j in 0..n_w {
            let nu = match partition[i * n_w + j] {
                Side::Plus => normals[0],
                Side::Minus => normals[1],
            };
            let jac: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * dot(band.surface_normal(b0 + 0.5 * h_beta * (xi + 1.0)), nu).abs())
                .sum::<f64>()
                * 0.5
                * h_beta;
            lhs += jac * h_w;
        }
    }
    Ok(BandCheck { lhs, rhs: band.constant() * band.area(), constant: band.constant() })
}
