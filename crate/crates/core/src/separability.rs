//! Partial transposition, the PPT separability verdict, negativity and
//! concurrence for two-qubit states.
//!
//! For 4×4 states at most one eigenvalue of the partial transpose can be
//! negative, so the sign of its determinant decides separability.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::state_space::DensityMatrix;

/// `|det ρ^{T_B}|` at or below this counts as a boundary hit.
pub const BOUNDARY_DET_TOL: f64 = 1e-14;

/// Blockwise transpose: each 2×2 block of `m` is transposed in place.
pub fn partial_transpose_matrix(m: &Mat4) -> Mat4 {
    let mut out = *m;
    for bi in 0..2 {
        for bj in 0..2 {
            let (r, c) = (2 * bi, 2 * bj);
            out[r][c + 1] = m[r + 1][c];
            out[r + 1][c] = m[r][c + 1];
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct PartialTranspose {
    pub matrix: Mat4,
    /// Ascending.
    pub spectrum: [f64; 4],
    pub determinant: f64,
}

pub fn partial_transpose(rho: &DensityMatrix) -> PartialTranspose {
    let matrix = partial_transpose_matrix(rho.matrix());
    PartialTranspose {
        matrix,
        spectrum: linalg::hermitian_eigenvalues(&matrix),
        determinant: linalg::determinant(&matrix).re,
    }
}

/// `det ρ^{T_B}` without the eigen-decomposition.
pub fn pt_determinant(rho: &DensityMatrix) -> f64 {
    linalg::determinant(&partial_transpose_matrix(rho.matrix())).re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Separable,
    /// `|det| <= BOUNDARY_DET_TOL`; counted as separable.
    Boundary,
    Entangled,
}

impl Verdict {
    pub fn from_determinant(det: f64) -> Self {
        if det.abs() <= BOUNDARY_DET_TOL {
            Verdict::Boundary
        } else if det > 0.0 {
            Verdict::Separable
        } else {
            Verdict::Entangled
        }
    }

    pub fn is_separable(self) -> bool {
        self != Verdict::Entangled
    }
}

pub fn verdict(rho: &DensityMatrix) -> Verdict {
    Verdict::from_determinant(pt_determinant(rho))
}

pub fn is_separable(rho: &DensityMatrix) -> bool {
    verdict(rho).is_separable()
}

/// `2·max(0, -λ_min(ρ^{T_B}))`; 1 for a Bell state.
pub fn negativity_from_pt(pt_spectrum: &[f64; 4]) -> f64 {
    2.0 * (-pt_spectrum[0]).max(0.0)
}

pub fn negativity(rho: &DensityMatrix) -> f64 {
    negativity_from_pt(&partial_transpose(rho).spectrum)
}

/// `(σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// `σ_y⊗σ_y` is the real antidiagonal matrix with signs `(-1, 1, 1, -1)`,
/// so the flip reduces to `ρ̃_{ij} = s_i s_j ρ*_{3-i,3-j}`.
pub fn spin_flip(m: &Mat4) -> Mat4 {
    const SIGN: [f64; 4] = [1.0, -1.0, -1.0, 1.0];
    let mut out = linalg::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = m[3 - i][3 - j].conj() * (SIGN[i] * SIGN[j]);
        }
    }
    out
}

const MU_TOL: f64 = 1e-10;

/// Wootters concurrence given `ρ` and its positive square root.
///
/// The `μ_i` are the eigenvalues of the Hermitian `√ρ ρ̃ √ρ`, which coincide
/// with those of `ρ ρ̃`.
pub fn concurrence_with_sqrt(rho: &Mat4, sqrt_rho: &Mat4) -> Result<f64> {
    let flipped = spin_flip(rho);
    let m = linalg::mul(&linalg::mul(sqrt_rho, &flipped), sqrt_rho);
    let mu = linalg::hermitian_eigenvalues(&m);
    if mu[0] < -MU_TOL {
        return Err(Error::Numerical(format!("spin-flip eigenvalue {:e} < 0", mu[0])));
    }
    let r = mu.map(|x| x.max(0.0).sqrt());
    Ok((r[3] - r[2] - r[1] - r[0]).max(0.0))
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let eg = linalg::hermitian_eigen(rho.matrix());
    let roots = eg.values.map(|x| x.max(0.0).sqrt());
    let sqrt_rho = linalg::conjugate_diag(&eg.vectors, &roots);
    concurrence_with_sqrt(rho.matrix(), &sqrt_rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementMeasures {
    pub negativity: f64,
    pub concurrence: f64,
}

pub fn entanglement_measures(rho: &DensityMatrix) -> Result<EntanglementMeasures> {
    Ok(EntanglementMeasures {
        negativity: negativity(rho),
        concurrence: concurrence(rho)?,
    })
}

/// Full classification as reported by the `classify` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub separable: bool,
    pub det_pt: f64,
    pub pt_eigenvalues: [f64; 4],
    pub negativity: f64,
    pub concurrence: f64,
}

pub fn classify(rho: &DensityMatrix) -> Result<Classification> {
    let pt = partial_transpose(rho);
    let v = Verdict::from_determinant(pt.determinant);
    Ok(Classification {
        verdict: v,
        separable: v.is_separable(),
        det_pt: pt.determinant,
        pt_eigenvalues: pt.spectrum,
        negativity: negativity_from_pt(&pt.spectrum),
        concurrence: concurrence(rho)?,
    })
}

/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> DensityMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    DensityMatrix::pure([h, z, z, h])
}

/// `p·Φ⁺ + (1-p)·I/4`.
pub fn werner(p: f64) -> DensityMatrix {
    DensityMatrix::mix(p, &bell_phi_plus(), &DensityMatrix::maximally_mixed())
}
