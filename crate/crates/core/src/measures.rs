//! Conditional SD/Bures volume element on the eigenvalue simplex, its
//! integrals over the simplex, and the boundary-restricted element.
//!
//! An `m`-level spectrum is parameterized by `m-1` angles in `[0, π/2]`:
//!
//! ```text
//! λ_1 = s_1² s_2² … s_{m-1}²
//! λ_j = c_{j-1}² s_j² … s_{m-1}²      (1 < j < m)
//! λ_m = c_{m-1}²
//! ```
//!
//! In these coordinates the Jacobian divided by `√Πλ` collapses to
//! `2^{m-1} Π_k s_k^{k-1}`, so the angle-space weight is bounded and can be
//! evaluated right up to the faces of the box.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmc::{HaltonStream, Scramble};
use crate::quadrature::{QuadEstimate, TanhSinh};
use crate::linalg::ipow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricConvention {
    /// Statistical distinguishability; four times the Bures metric.
    #[default]
    Sd,
    Bures,
}

impl MetricConvention {
    pub fn pair_factor(self) -> f64 {
        match self {
            MetricConvention::Sd => 4.0,
            MetricConvention::Bures => 1.0,
        }
    }

    /// Ratio of the SD volume element to the Bures one for `m` levels.
    pub fn sd_over_bures(m: usize) -> f64 {
        ipow(4.0, (m * (m - 1) / 2) as i32)
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricConvention::Sd => "sd",
            MetricConvention::Bures => "bures",
        }
    }
}

/// Value of a volume element that may be non-integrably large at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Finite(f64),
    /// A zero eigenvalue: the element is unbounded (integrably) here.
    Singular,
}

impl Density {
    pub fn finite(self) -> Option<f64> {
        match self {
            Density::Finite(x) => Some(x),
            Density::Singular => None,
        }
    }
}

/// `(λ_i - λ_j)² / (λ_i + λ_j)`, with the `0/0` case taken as its limit 0.
#[inline]
fn pair_term(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s > 0.0 {
        (a - b) * (a - b) / s
    } else {
        0.0
    }
}

fn pair_product(l: &[f64], factor: f64) -> f64 {
    let mut p = 1.0;
    for i in 0..l.len() {
        for j in (i + 1)..l.len() {
            p *= factor * pair_term(l[i], l[j]);
        }
    }
    p
}

fn check_simplex(l: &[f64]) -> Result<()> {
    if l.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Domain(format!("negative eigenvalue in {l:?}")));
    }
    let sum: f64 = l.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("eigenvalues sum to {sum}, not 1")));
    }
    Ok(())
}

/// `Π_{i<j} 4(λ_i-λ_j)²/(λ_i+λ_j) / √Πλ_i` (without the 4 for Bures).
///
/// Any zero eigenvalue yields [`Density::Singular`].
pub fn conditional_density(l: &[f64], convention: MetricConvention) -> Result<Density> {
    check_simplex(l)?;
    if l.contains(&0.0) {
        return Ok(Density::Singular);
    }
    let root: f64 = l.iter().product::<f64>().sqrt();
    Ok(Density::Finite(pair_product(l, convention.pair_factor()) / root))
}

pub const MAX_CHAIN_LEVELS: usize = 8;

fn chain_into(angles: &[f64], l: &mut [f64]) {
    let mut tail = 1.0;
    for k in (0..angles.len()).rev() {
        let (s, c) = angles[k].sin_cos();
        l[k + 1] = tail * c * c;
        tail *= s * s;
    }
    l[0] = tail;
}

/// Spectrum of `m = angles.len() + 1` levels from the nested chain.
pub fn chain_spectrum(angles: &[f64]) -> Vec<f64> {
    let mut l = vec![0.0; angles.len() + 1];
    chain_into(angles, &mut l);
    l
}

/// `|∂(λ_1..λ_{m-1})/∂(θ_1..θ_{m-1})| = Π_k sin^{2(k-1)}θ_k · sin 2θ_k`.
pub fn chain_jacobian(angles: &[f64]) -> f64 {
    angles
        .iter()
        .enumerate()
        .map(|(k, &t)| ipow(t.sin(), 2 * k as i32) * (2.0 * t).sin())
        .product::<f64>()
        .max(0.0)
}

/// `Π_k 2 sin^{k-1}θ_k`, which equals `chain_jacobian / √Πλ`.
fn chain_root_ratio(angles: &[f64]) -> f64 {
    angles
        .iter()
        .enumerate()
        .map(|(k, &t)| 2.0 * ipow(t.sin(), k as i32))
        .product()
}

/// Volume element times Jacobian in angle coordinates. Bounded on the whole box.
pub fn chain_weight(angles: &[f64], convention: MetricConvention) -> f64 {
    assert!(angles.len() < MAX_CHAIN_LEVELS, "chain supports at most {MAX_CHAIN_LEVELS} levels");
    let mut buf = [0.0; MAX_CHAIN_LEVELS];
    let l = &mut buf[..angles.len() + 1];
    chain_into(angles, l);
    pair_product(l, convention.pair_factor()) * chain_root_ratio(angles)
}

/// The angle-space element on the face `θ_1 = 0` (where `λ_1 = 0`), as a
/// function of the remaining `m-2` angles.
pub fn boundary_chain_weight(rest: &[f64], convention: MetricConvention) -> f64 {
    let mut buf = [0.0; MAX_CHAIN_LEVELS];
    buf[1..rest.len() + 1].copy_from_slice(rest);
    chain_weight(&buf[..rest.len() + 1], convention)
}

pub const MIN_LEVELS: usize = 2;
pub const MAX_SIMPLEX_LEVELS: usize = 5;
pub const MAX_BOUNDARY_LEVELS: usize = 6;

/// Accepted relative error for simplex constants.
pub const SIMPLEX_REL_TOL: f64 = 1e-8;
/// Accepted relative error for boundary-restricted integrals.
pub const BOUNDARY_REL_TOL: f64 = 1e-8;

fn quad_for(dim: usize) -> TanhSinh {
    TanhSinh::with_rel_tol(if dim <= 2 { 1e-12 } else { 1e-10 })
}

/// `D_m`: integral of the conditional element over the `(m-1)`-simplex.
pub fn simplex_constant(m: usize, convention: MetricConvention) -> Result<QuadEstimate> {
    if !(MIN_LEVELS..=MAX_SIMPLEX_LEVELS).contains(&m) {
        return Err(Error::Config(format!(
            "simplex constant supports m in {MIN_LEVELS}..={MAX_SIMPLEX_LEVELS}, got {m}"
        )));
    }
    let d = m - 1;
    // θ_1 innermost: the integrand is rational in sin²θ_1 there
    quad_for(d).integrate_box(
        |a| {
            let mut buf = [0.0; MAX_CHAIN_LEVELS];
            for (k, &x) in a.iter().rev().enumerate() {
                buf[k] = x;
            }
            chain_weight(&buf[..a.len()], convention)
        },
        &vec![0.0; d],
        &vec![FRAC_PI_2; d],
        SIMPLEX_REL_TOL,
    )
}

/// QMC estimate of `D_m` from the first `n` points of a Halton stream.
pub fn simplex_constant_qmc(m: usize, n: u64, scramble: Scramble, convention: MetricConvention) -> Result<f64> {
    if m < MIN_LEVELS {
        return Err(Error::Config(format!("m must be >= {MIN_LEVELS}")));
    }
    let d = m - 1;
    let stream = HaltonStream::with_scramble(scramble, d)?;
    let mut x = vec![0.0; d];
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 1..=n {
        stream.fill(i, &mut x)?;
        x.iter_mut().for_each(|v| *v *= FRAC_PI_2);
        let y = chain_weight(&x, convention) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(ipow(FRAC_PI_2, d as i32) * sum / n as f64)
}

/// Integral of the boundary element (one eigenvalue set to zero) over the
/// remaining `(m-2)`-simplex. For `m = 2` the simplex is a point.
pub fn boundary_restricted_integral(m: usize, convention: MetricConvention) -> Result<QuadEstimate> {
    if !(MIN_LEVELS..=MAX_BOUNDARY_LEVELS).contains(&m) {
        return Err(Error::Config(format!(
            "boundary integral supports m in {MIN_LEVELS}..={MAX_BOUNDARY_LEVELS}, got {m}"
        )));
    }
    let d = m - 2;
    quad_for(d).integrate_box(
        |a| {
            let mut buf = [0.0; MAX_CHAIN_LEVELS];
            for (k, &x) in a.iter().rev().enumerate() {
                buf[k] = x;
            }
            boundary_chain_weight(&buf[..a.len()], convention)
        },
        &vec![0.0; d],
        &vec![FRAC_PI_2; d],
        BOUNDARY_REL_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn density_examples() {
        let sd = MetricConvention::Sd;
        assert_eq!(conditional_density(&[0.25; 4], sd).unwrap(), Density::Finite(0.0));
        assert_eq!(conditional_density(&[1.0, 0.0, 0.0, 0.0], sd).unwrap(), Density::Singular);
        assert!(conditional_density(&[0.5, 0.6, 0.0, -0.1], sd).is_err());
        assert!(conditional_density(&[0.5, 0.6, 0.0, 0.0], sd).is_err());
    }

    #[test]
    fn density_hand_value() {
        // (0.4, 0.3, 0.2, 0.1), pairwise (Δ², Σ):
        // (.01,.7) (.04,.6) (.09,.5) (.01,.5) (.04,.4) (.01,.3)
        let pairs: f64 = (0.01 / 0.7) * (0.04 / 0.6) * (0.09 / 0.5) * (0.01 / 0.5) * (0.04 / 0.4) * (0.01 / 0.3);
        let want = 4096.0 * pairs / (0.4f64 * 0.3 * 0.2 * 0.1).sqrt();
        let got = conditional_density(&[0.4, 0.3, 0.2, 0.1], MetricConvention::Sd)
            .unwrap()
            .finite()
            .unwrap();
        assert!((got - want).abs() < 1e-15 * want.max(1.0), "{got} vs {want}");
        let bures = conditional_density(&[0.4, 0.3, 0.2, 0.1], MetricConvention::Bures)
            .unwrap()
            .finite()
            .unwrap();
        assert!((got / bures - 4096.0).abs() < 1e-9);
    }

    #[test]
    fn chain_matches_four_level_formula() {
        let a = [0.3, 0.9, 1.2];
        let got = chain_spectrum(&a);
        let s = crate::state_space::spectrum_from_angles(crate::state_space::EigenAngles::new(a).unwrap());
        for (x, y) in got.iter().zip(s.as_array()) {
            assert!((x - y).abs() < 1e-15);
        }
        let j = crate::state_space::angle_jacobian(crate::state_space::EigenAngles::new(a).unwrap());
        assert!((chain_jacobian(&a) - j).abs() < 1e-15);
    }

    #[test]
    fn weight_is_density_times_jacobian() {
        for a in [[0.3, 0.9, 1.2], [1.1, 0.2, 0.7], [0.05, 1.5, 0.4]] {
            let l = chain_spectrum(&a);
            let d = conditional_density(&l, MetricConvention::Sd).unwrap().finite().unwrap();
            let w = chain_weight(&a, MetricConvention::Sd);
            assert!((w - d * chain_jacobian(&a)).abs() < 1e-12 * w.abs().max(1e-300));
        }
    }

    #[test]
    fn weight_on_faces_is_finite() {
        for a in [[0.0, 0.0, 0.0], [FRAC_PI_2; 3], [0.0, FRAC_PI_2, 0.3]] {
            assert!(chain_weight(&a, MetricConvention::Sd).is_finite());
        }
    }

    #[test]
    fn d2_is_two_pi() {
        let r = simplex_constant(2, MetricConvention::Sd).unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn d3_closed_form() {
        let r = simplex_constant(3, MetricConvention::Sd).unwrap();
        assert!((r.value / (64.0 * PI / 35.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn restricted_low_levels() {
        // m = 2: the face is a single point with weight 2·4
        let r = boundary_restricted_integral(2, MetricConvention::Sd).unwrap();
        assert_eq!(r.value, 8.0);
        let r = boundary_restricted_integral(3, MetricConvention::Sd).unwrap();
        assert!((r.value - 512.0 / 63.0).abs() < 1e-10);
    }

    #[test]
    fn range_errors() {
        assert!(simplex_constant(1, MetricConvention::Sd).is_err());
        assert!(simplex_constant(6, MetricConvention::Sd).is_err());
        assert!(boundary_restricted_integral(7, MetricConvention::Sd).is_err());
    }
}
