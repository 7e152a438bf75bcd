//! From hypercube coordinates to two-qubit density matrices.
//!
//! Three angles give the spectrum through a nested sin²/cos² chain; twelve
//! coordinates give an eigenvector frame distributed according to the
//! invariant (Haar) measure on frames modulo column phases. The state is
//! `ρ = U Λ U†`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::linalg::ipow;

const ANGLE_SLACK: f64 = 1e-15;

/// Three spherical angles, each in `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenAngles([f64; 3]);

impl EigenAngles {
    pub fn new(theta: [f64; 3]) -> Result<Self> {
        let mut t = theta;
        for x in t.iter_mut() {
            if !(*x >= -ANGLE_SLACK && *x <= FRAC_PI_2 + ANGLE_SLACK) {
                return Err(Error::Domain(format!("angle {x} outside [0, pi/2]")));
            }
            *x = x.clamp(0.0, FRAC_PI_2);
        }
        Ok(Self(t))
    }

    /// Angles from unit-interval coordinates, `θ = v·π/2`.
    pub fn from_unit(v: [f64; 3]) -> Result<Self> {
        Self::new(v.map(|x| x * FRAC_PI_2))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

/// Four eigenvalues, nonnegative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum([f64; 4]);

impl Spectrum {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|&x| !(-1e-15..=1.0 + 1e-12).contains(&x)) {
            return Err(Error::Domain(format!("eigenvalues {values:?} outside [0, 1]")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("eigenvalues sum to {sum}, not 1")));
        }
        Ok(Self(values.map(|x| x.max(0.0))))
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn sqrt(&self) -> [f64; 4] {
        self.0.map(f64::sqrt)
    }
}

/// `λ = (s₁²s₂²s₃², c₁²s₂²s₃², c₂²s₃², c₃²)`.
pub fn spectrum_from_angles(a: EigenAngles) -> Spectrum {
    let [t1, t2, t3] = a.0;
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    let (s3, c3) = t3.sin_cos();
    let (s1, c1, s2, c2, s3, c3) = (s1 * s1, c1 * c1, s2 * s2, c2 * c2, s3 * s3, c3 * c3);
    Spectrum([s1 * s2 * s3, c1 * s2 * s3, c2 * s3, c3])
}

/// `|det ∂(λ₁,λ₂,λ₃)/∂(θ₁,θ₂,θ₃)| = sin⁴θ₃ sin²θ₂ sin2θ₁ sin2θ₂ sin2θ₃`.
pub fn angle_jacobian(a: EigenAngles) -> f64 {
    let [t1, t2, t3] = a.0;
    let s2 = t2.sin();
    let s3 = t3.sin();
    let j = ipow(s3, 4) * s2 * s2 * (2.0 * t1).sin() * (2.0 * t2).sin() * (2.0 * t3).sin();
    j.max(0.0)
}

fn arccot_cos(x: f64) -> f64 {
    (1.0 / x.cos()).atan()
}

/// Membership in the angle region that yields `λ₁ ≥ λ₂ ≥ λ₃ ≥ λ₄`.
pub fn ordered_range_membership(a: EigenAngles) -> bool {
    let [t1, t2, t3] = a.0;
    t1 >= PI / 4.0 && t2 >= arccot_cos(t1) && t3 >= arccot_cos(t2)
}

/// Twelve coordinates in the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryCoords([f64; 12]);

impl UnitaryCoords {
    pub fn new(u: [f64; 12]) -> Result<Self> {
        if let Some(x) = u.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Domain(format!(
                "unitary coordinate {x} not strictly inside (0, 1)"
            )));
        }
        Ok(Self(u))
    }

    pub fn as_array(&self) -> [f64; 12] {
        self.0
    }
}

/// Unitary eigenvector frame; columns are the eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosetUnitary(Mat4);

impl CosetUnitary {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn column(&self, k: usize) -> [Complex64; 4] {
        [self.0[0][k], self.0[1][k], self.0[2][k], self.0[3][k]]
    }

    /// Wraps an arbitrary matrix; the caller vouches for unitarity.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        Self(m)
    }
}

/// Squared moduli of a uniform point on the unit sphere of `C^n`: a flat
/// Dirichlet point built by stick-breaking with inverse Beta(1, k) CDFs.
fn flat_simplex<const N: usize>(u: &[f64]) -> [f64; N] {
    let mut out = [0.0; N];
    let mut rest = 1.0;
    for k in 0..N - 1 {
        let remaining = (N - 1 - k) as f64;
        let frac = 1.0 - u[k].powf(1.0 / remaining);
        out[k] = rest * frac;
        rest -= out[k];
    }
    out[N - 1] = rest.max(0.0);
    out
}

fn unit_vector<const N: usize>(moduli: &[f64], phases: &[f64]) -> [Complex64; N] {
    let sq: [f64; N] = flat_simplex::<N>(moduli);
    let mut z = [Complex64::new(0.0, 0.0); N];
    z[0] = Complex64::new(sq[0].sqrt(), 0.0);
    for k in 1..N {
        z[k] = Complex64::from_polar(sq[k].sqrt(), 2.0 * PI * phases[k - 1]);
    }
    z
}

/// A unitary whose first column is `z` (`|z| = 1`), embedded in the trailing
/// `N×N` block of a 4×4 identity.
///
/// Householder reflection `H = I - 2vv†/|v|²` with `v = e₁ + e^{-iβ}z`,
/// `β = arg z₁` (taken as 0 when `z₁ = 0`), scaled by `-e^{iβ}`.
fn completion<const N: usize>(z: &[Complex64; N]) -> Mat4 {
    let phase = if z[0].norm() > 0.0 {
        z[0] / z[0].norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut v = [Complex64::new(0.0, 0.0); N];
    for k in 0..N {
        v[k] = z[k] * phase.conj();
    }
    v[0] += 1.0;
    let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let off = 4 - N;
    let mut m = linalg::identity();
    for i in 0..N {
        for j in 0..N {
            let delta = if i == j { 1.0 } else { 0.0 };
            let h = Complex64::new(delta, 0.0) - v[i] * v[j].conj() * (2.0 / vnorm2);
            m[off + i][off + j] = -phase * h;
        }
    }
    m
}

/// Eigenvector frame from twelve unit-interval coordinates.
///
/// Coordinates 0–5 place the first column uniformly on the unit sphere of
/// `C⁴` (three moduli, three phases); 6–9 place the second column in the
/// orthogonal complement (two moduli, two phases); 10–11 the third. The last
/// column completes the frame. Each stage is uniform on its sphere, so the
/// frame is Haar distributed modulo column phases.
pub fn unitary_from_coords(u: UnitaryCoords) -> CosetUnitary {
    let c = &u.0;
    let z4: [Complex64; 4] = unit_vector(&c[0..3], &c[3..6]);
    let z3: [Complex64; 3] = unit_vector(&c[6..8], &c[8..10]);
    let z2: [Complex64; 2] = unit_vector(&c[10..11], &c[11..12]);
    let q4 = completion(&z4);
    let q3 = completion(&z3);
    let q2 = completion(&z2);
    CosetUnitary(linalg::mul(&linalg::mul(&q4, &q3), &q2))
}

/// A 4×4 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity (-1e-10).
    pub fn from_matrix(m: Mat4) -> Result<Self> {
        let herm = linalg::max_abs_diff(&m, &linalg::adjoint(&m));
        if herm > 1e-12 {
            return Err(Error::Domain(format!("matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Domain(format!("trace is {tr}, not 1")));
        }
        let min = linalg::hermitian_eigenvalues(&m)[0];
        if min < -1e-10 {
            return Err(Error::Domain(format!("matrix has eigenvalue {min:e} < 0")));
        }
        Ok(Self(m))
    }

    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn maximally_mixed() -> Self {
        Self(linalg::scale(&linalg::identity(), 0.25))
    }

    /// Projector onto a (normalized by this call) pure state.
    pub fn pure(psi: [Complex64; 4]) -> Self {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut m = linalg::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = psi[i] * psi[j].conj() / (n * n);
            }
        }
        Self(m)
    }

    /// `p·a + (1-p)·b`.
    pub fn mix(p: f64, a: &Self, b: &Self) -> Self {
        Self(linalg::add(&linalg::scale(&a.0, p), &linalg::scale(&b.0, 1.0 - p)))
    }
}

/// `ρ = U·diag(λ)·U†`.
pub fn assemble_density(u: &CosetUnitary, s: &Spectrum) -> DensityMatrix {
    DensityMatrix(linalg::conjugate_diag(&u.0, &s.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angles(a: f64, b: f64, c: f64) -> EigenAngles {
        EigenAngles::new([a, b, c]).unwrap()
    }

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn spectrum_corners() {
        let s = spectrum_from_angles(angles(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2));
        assert!(close(s.as_array(), [1.0, 0.0, 0.0, 0.0], 1e-15));
        let s = spectrum_from_angles(angles(PI / 4.0, (1.0 / 3f64.sqrt()).acos(), PI / 3.0));
        assert!(close(s.as_array(), [0.25; 4], 1e-15));
        let s = spectrum_from_angles(angles(PI / 4.0, FRAC_PI_2, FRAC_PI_2));
        assert!(close(s.as_array(), [0.5, 0.5, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn angle_domain() {
        assert!(EigenAngles::new([-0.1, 0.0, 0.0]).is_err());
        assert!(EigenAngles::new([0.0, FRAC_PI_2 + 1e-9, 0.0]).is_err());
        assert!(EigenAngles::new([0.0, FRAC_PI_2 + 1e-16, -1e-16]).is_ok());
        assert!(EigenAngles::new([f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn jacobian_values() {
        let q = PI / 4.0;
        assert!((angle_jacobian(angles(q, q, q)) - 0.125).abs() < 1e-15);
        assert_eq!(angle_jacobian(angles(0.0, 0.3, 0.4)), 0.0);
        assert!(angle_jacobian(angles(0.3, FRAC_PI_2, 0.4)) < 1e-15);
    }

    #[test]
    fn ordered_corner() {
        let a = angles(PI / 4.0, (1.0 / 3f64.sqrt()).acos(), PI / 3.0);
        assert!(ordered_range_membership(a));
        assert!(!ordered_range_membership(angles(0.5, 1.2, 1.2)));
    }

    #[test]
    fn unitary_coords_domain() {
        let mut u = [0.5; 12];
        assert!(UnitaryCoords::new(u).is_ok());
        u[4] = 0.0;
        assert!(UnitaryCoords::new(u).is_err());
        u[4] = 1.0;
        assert!(UnitaryCoords::new(u).is_err());
    }

    #[test]
    fn frames_are_unitary() {
        let grid = [0.013, 0.21, 0.5, 0.77, 0.999];
        for (n, &a) in grid.iter().enumerate() {
            for &b in &grid {
                let mut u = [0.0; 12];
                for (k, x) in u.iter_mut().enumerate() {
                    *x = ((a * (k as f64 + 1.0) + b * (n as f64 + 0.5) * 0.37) % 1.0).max(1e-9);
                }
                let frame = unitary_from_coords(UnitaryCoords::new(u).unwrap());
                let m = frame.matrix();
                let g = linalg::mul(&linalg::adjoint(m), m);
                assert!(linalg::max_abs_diff(&g, &linalg::identity()) < 1e-12);
            }
        }
    }

    #[test]
    fn first_column_modulus_is_stick_break() {
        let mut u = [0.5; 12];
        u[0] = 0.3;
        let frame = unitary_from_coords(UnitaryCoords::new(u).unwrap());
        let want = 1.0 - 0.3f64.powf(1.0 / 3.0);
        assert!((frame.matrix()[0][0].norm_sqr() - want).abs() < 1e-14);
    }

    #[test]
    fn assemble_maximally_mixed() {
        let frame = unitary_from_coords(UnitaryCoords::new([0.31; 12]).unwrap());
        let rho = assemble_density(&frame, &Spectrum::new([0.25; 4]).unwrap());
        assert!(linalg::max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed().matrix()) < 1e-15);
        let id = CosetUnitary::from_matrix_unchecked(linalg::identity());
        let rho = assemble_density(&id, &Spectrum::new([0.25; 4]).unwrap());
        assert_eq!(rho, DensityMatrix::maximally_mixed());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_matrix(*DensityMatrix::maximally_mixed().matrix()).is_ok());
        let mut m = linalg::zeros();
        m[0][0] = Complex64::new(1.5, 0.0);
        m[1][1] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::from_matrix(m).is_err());
        let mut m = *DensityMatrix::maximally_mixed().matrix();
        m[0][1] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new([0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(Spectrum::new([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(Spectrum::new([1.2, -0.2, 0.0, 0.0]).is_err());
    }
}
