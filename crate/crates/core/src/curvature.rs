//! Scalar curvature of the Bures metric on two-qubit states and the
//! isoperimetric comparison against Euclidean balls.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state_space::Spectrum;
use crate::linalg::ipow;

const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementaryInvariants {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl ElementaryInvariants {
    pub fn of(l: &[f64; 4]) -> Self {
        let [a, b, c, d] = *l;
        Self {
            e1: a + b + c + d,
            e2: a * b + a * c + a * d + b * c + b * d + c * d,
            e3: a * b * c + a * b * d + a * c * d + b * c * d,
            e4: a * b * c * d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    Finite(f64),
    /// The curvature is unbounded at this spectrum.
    Singular,
}

impl Curvature {
    pub fn finite(self) -> Option<f64> {
        match self {
            Curvature::Finite(x) => Some(x),
            Curvature::Singular => None,
        }
    }
}

pub fn scalar_curvature(s: &Spectrum) -> Curvature {
    let l = s.as_array();
    if l.iter().filter(|&&x| x <= DEGENERATE_TOL).count() >= 2 {
        return Curvature::Singular;
    }
    let ElementaryInvariants { e2, e3, e4, .. } = ElementaryInvariants::of(&l);
    let den = e4 + e3 * e3 - e2 * e3;
    if den == 0.0 {
        return Curvature::Singular;
    }
    let num = 63.0 * e4 + 35.0 * e3 * e3 - 43.0 * e2 * e3 - 7.0 * e3 - 3.0 * e2 * e2;
    Curvature::Finite(6.0 * num / den)
}

/// Minimum of the scalar curvature over `m`-level states.
pub fn min_scalar_curvature(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 levels, got {m}")));
    }
    let m2 = f64::from(m * m);
    Ok((5.0 * m2 - 4.0) * (m2 - 1.0) / 2.0)
}

/// `Γ(d/2 + 1)` for a positive integer `d`.
fn gamma_half_plus_one(d: u32) -> f64 {
    let (mut g, mut x) = if d.is_multiple_of(2) { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt() / 2.0, 1.5) };
    let target = f64::from(d) / 2.0 + 1.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGeometry {
    pub dimension: u32,
    pub radius: f64,
    pub volume: f64,
    pub area: f64,
}

/// Volume of the Euclidean `d`-ball of radius `r` and area of its boundary.
pub fn ball_geometry(d: u32, r: f64) -> Result<BallGeometry> {
    if d == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("ball needs d >= 1 and r > 0, got d={d}, r={r}")));
    }
    let half = f64::from(d) / 2.0;
    let volume = std::f64::consts::PI.powf(half) * ipow(r, d as i32) / gamma_half_plus_one(d);
    Ok(BallGeometry { dimension: d, radius: r, volume, area: f64::from(d) * volume / r })
}

/// Radius of the `d`-ball enclosing `volume`.
pub fn ball_radius(d: u32, volume: f64) -> Result<f64> {
    let unit = ball_geometry(d, 1.0)?.volume;
    if !(volume >= 0.0) {
        return Err(Error::Domain(format!("negative volume {volume}")));
    }
    Ok((volume / unit).powf(1.0 / f64::from(d)))
}

pub const STATE_SPACE_DIMENSION: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoperimetricComparison {
    pub dimension: u32,
    pub alpha: f64,
    pub unit_ball_volume: f64,
    pub unit_sphere_area: f64,
    pub total_radius: f64,
    pub total_area: f64,
    pub sep_radius: f64,
    pub sep_area: f64,
    /// Boundary area of a unit-ball fraction with volume `α Ṽ`, over `Ṽ`.
    pub w: f64,
    /// `A_sep / V_total`.
    pub ratio: f64,
    pub inequality_holds: bool,
}

/// Compare the separable boundary with the Levy–Gromov bound for a
/// 15-dimensional manifold of Ricci curvature at least that of the unit sphere.
pub fn levy_gromov_comparison(v_sep: f64, v_total: f64, a_sep: f64) -> Result<IsoperimetricComparison> {
    if !(v_total > 0.0 && v_sep >= 0.0 && v_sep <= v_total && a_sep >= 0.0) {
        return Err(Error::Domain(format!(
            "need 0 <= V_sep <= V_total, A_sep >= 0; got {v_sep}, {v_total}, {a_sep}"
        )));
    }
    let d = STATE_SPACE_DIMENSION;
    let unit = ball_geometry(d, 1.0)?;
    let alpha = v_sep / v_total;
    let s = if alpha == 0.0 { 0.0 } else { f64::from(d) * unit.volume * alpha.powf(1.0 - 1.0 / f64::from(d)) };
    let w = s / unit.volume;
    let total_radius = ball_radius(d, v_total)?;
    let sep_radius = ball_radius(d, v_sep)?;
    let sep_area = if v_sep == 0.0 { 0.0 } else { ball_geometry(d, sep_radius)?.area };
    let ratio = a_sep / v_total;
    Ok(IsoperimetricComparison {
        dimension: d,
        alpha,
        unit_ball_volume: unit.volume,
        unit_sphere_area: unit.area,
        total_radius,
        total_area: ball_geometry(d, total_radius)?.area,
        sep_radius,
        sep_area,
        w,
        ratio,
        inequality_holds: ratio >= w,
    })
}
