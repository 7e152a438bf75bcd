//! Independent oracles shared by the integration tests: Haar frames from
//! Gram–Schmidt on complex Gaussian matrices, random states and local
//! unitaries, and a pseudo-random separability-probability estimator.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use bures_sep::linalg::{self, Mat4};
use bures_sep::measures::{self, MetricConvention};
use bures_sep::separability::{self, Verdict};
use bures_sep::state_space::DensityMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(r), StandardNormal.sample(r))
}

/// Haar-random unitary of size `n` (columns of a Gaussian matrix,
/// orthonormalized in order).
pub fn haar_columns<const N: usize>(r: &mut impl Rng) -> [[Complex64; N]; N] {
    let mut cols = [[Complex64::new(0.0, 0.0); N]; N];
    for k in 0..N {
        let mut v = [Complex64::new(0.0, 0.0); N];
        for z in v.iter_mut() {
            *z = gaussian(r);
        }
        for prev in cols.iter().take(k) {
            let dot: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= dot * p;
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= n;
        }
        cols[k] = v;
    }
    // transpose the list of columns into a row-major matrix
    let mut m = [[Complex64::new(0.0, 0.0); N]; N];
    for i in 0..N {
        for j in 0..N {
            m[i][j] = cols[j][i];
        }
    }
    m
}

pub fn haar_unitary(r: &mut impl Rng) -> Mat4 {
    haar_columns::<4>(r)
}

/// Flat-Dirichlet point on the 3-simplex.
pub fn random_spectrum(r: &mut impl Rng) -> [f64; 4] {
    let e: [f64; 4] = std::array::from_fn(|_| Exp1.sample(r));
    let s: f64 = e.iter().sum();
    e.map(|x| x / s)
}

pub fn random_state(r: &mut impl Rng) -> DensityMatrix {
    let u = haar_unitary(r);
    DensityMatrix::from_matrix_unchecked(linalg::conjugate_diag(&u, &random_spectrum(r)))
}

/// Random pure product state `|a⟩⊗|b⟩` mixed into a product of qubit states.
pub fn random_product_state(r: &mut impl Rng) -> DensityMatrix {
    let qubit = |r: &mut ChaCha8Rng| {
        let u = haar_columns::<2>(r);
        let p: f64 = r.random();
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = u[i][0] * u[j][0].conj() * p + u[i][1] * u[j][1].conj() * (1.0 - p);
            }
        }
        m
    };
    let mut rr = ChaCha8Rng::seed_from_u64(r.random());
    let a = qubit(&mut rr);
    let b = qubit(&mut rr);
    DensityMatrix::from_matrix_unchecked(kron(&a, &b))
}

pub fn kron(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> Mat4 {
    let mut m = linalg::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
        }
    }
    m
}

pub fn random_local_unitary(r: &mut impl Rng) -> Mat4 {
    let v = haar_columns::<2>(r);
    let w = haar_columns::<2>(r);
    kron(&v, &w)
}

/// `U ρ U†`.
pub fn conjugate(u: &Mat4, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(linalg::mul(&linalg::mul(u, rho.matrix()), &linalg::adjoint(u)))
}

pub struct OracleEstimate {
    pub p_sep: f64,
    pub batch_se: f64,
    pub mean_weight: f64,
}

/// Separability probability from pseudo-random points: Gaussian-orthonormalized
/// frames and uniform angles weighted by the angle-space element.
pub fn pseudo_random_psep(n: usize, seed: u64, batches: usize) -> OracleEstimate {
    let mut r = rng(seed);
    let per = n / batches;
    let mut ratios = Vec::with_capacity(batches);
    let (mut tw, mut ts) = (0.0, 0.0);
    for _ in 0..batches {
        let (mut bw, mut bs) = (0.0, 0.0);
        for _ in 0..per {
            let u = haar_unitary(&mut r);
            let theta: [f64; 3] = std::array::from_fn(|_| r.random::<f64>() * FRAC_PI_2);
            let w = measures::chain_weight(&theta, MetricConvention::Sd);
            let l = measures::chain_spectrum(&theta);
            let rho = linalg::conjugate_diag(&u, &[l[0], l[1], l[2], l[3]]);
            let det = linalg::determinant(&separability::partial_transpose_matrix(&rho)).re;
            bw += w;
            if Verdict::from_determinant(det).is_separable() {
                bs += w;
            }
        }
        ratios.push(bs / bw);
        tw += bw;
        ts += bs;
    }
    let b = batches as f64;
    let mean = ratios.iter().sum::<f64>() / b;
    let var = ratios.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    OracleEstimate {
        p_sep: ts / tw,
        batch_se: (var / b).sqrt(),
        mean_weight: tw / (per * batches) as f64,
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
