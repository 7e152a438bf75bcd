//! Scrambled Halton point sets.
//!
//! Coordinate `j` of point `i` is the radical inverse of `i` in the `j`-th
//! prime base, with every digit passed through a per-base bijection on
//! `{0, …, b-1}`. Points are computed directly from their index, so any index
//! range can be evaluated independently of any other.
//!
//! Digits are taken at every position `k` with `b^k <= 2^63`, including the
//! leading zeros of the index. With the identity permutation those zeros add
//! nothing and the classical van der Corput value comes out; with a
//! permutation that moves 0 they fill in the low-order part of the fraction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The first 64 primes. Sets the largest supported dimension.
pub const PRIMES: [u32; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293,
    307, 311,
];

pub const MAX_DIMENSION: usize = PRIMES.len();

/// Where a digit permutation set comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scramble {
    /// No scrambling.
    #[serde(alias = "none")]
    Identity,
    /// Faure's deterministic recursive permutations.
    Faure,
    /// Uniform random permutations drawn from a ChaCha stream keyed by `(seed, base)`.
    Seeded { seed: u64 },
}

impl Scramble {
    pub fn label(&self) -> &'static str {
        match self {
            Scramble::Identity => "none",
            Scramble::Faure => "faure",
            Scramble::Seeded { .. } => "seeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPermutationSet {
    bases: Vec<u32>,
    perms: Vec<Vec<u32>>,
    provenance: Scramble,
}

impl DigitPermutationSet {
    pub fn new(provenance: Scramble, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if dimension > MAX_DIMENSION {
            return Err(Error::Config(format!(
                "dimension {dimension} exceeds the prime table ({MAX_DIMENSION})"
            )));
        }
        let bases = PRIMES[..dimension].to_vec();
        let perms = bases
            .iter()
            .map(|&b| match provenance {
                Scramble::Identity => (0..b).collect(),
                Scramble::Faure => faure_permutation(b),
                Scramble::Seeded { seed } => seeded_permutation(seed, b),
            })
            .collect();
        Ok(Self {
            bases,
            perms,
            provenance,
        })
    }

    pub fn dimension(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[u32] {
        &self.bases
    }

    pub fn permutation(&self, j: usize) -> &[u32] {
        &self.perms[j]
    }

    pub fn provenance(&self) -> Scramble {
        self.provenance
    }
}

/// Faure's permutation of `{0, …, b-1}`.
///
/// `σ_2 = (0, 1)`. For even `b`, `σ_b = (2σ_{b/2}, 2σ_{b/2} + 1)`. For odd
/// `b`, take `σ_{b-1}`, shift every entry `>= (b-1)/2` up by one and insert
/// `(b-1)/2` in the middle.
pub fn faure_permutation(b: u32) -> Vec<u32> {
    assert!(b >= 2);
    if b == 2 {
        return vec![0, 1];
    }
    if b.is_multiple_of(2) {
        let half = faure_permutation(b / 2);
        half.iter()
            .map(|&x| 2 * x)
            .chain(half.iter().map(|&x| 2 * x + 1))
            .collect()
    } else {
        let c = (b - 1) / 2;
        let prev = faure_permutation(b - 1);
        let mut out: Vec<u32> = prev
            .into_iter()
            .map(|x| if x >= c { x + 1 } else { x })
            .collect();
        out.insert(c as usize, c);
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_permutation(seed: u64, b: u32) -> Vec<u32> {
    let key = splitmix64(seed ^ splitmix64(b as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut p: Vec<u32> = (0..b).collect();
    p.shuffle(&mut rng);
    p
}

/// Number of digit positions `k` with `b^k <= 2^63`.
fn digit_count(b: u32) -> usize {
    let limit = 1u128 << 63;
    let mut pow = 1u128;
    let mut n = 0;
    while pow <= limit {
        n += 1;
        pow *= b as u128;
    }
    n
}

/// Cell `[j/b, (j+1)/b)` of leading digit `j`, as `(lo, largest value below hi)`.
fn leading_cell(j: u32, base: u32) -> (f64, f64) {
    let lo = f64::from(j) / f64::from(base);
    let hi = f64::from(j + 1) / f64::from(base);
    (lo, f64::from_bits(hi.to_bits() - 1))
}

/// Scrambled radical inverse `Σ_k perm(d_k) b^{-k-1}` of `index`.
pub fn radical_inverse(index: u64, base: u32, perm: &[u32]) -> f64 {
    debug_assert!(base >= 2 && perm.len() == base as usize);
    let n = digit_count(base);
    let b = base as u64;
    let mut digits = Vec::with_capacity(n);
    let mut i = index;
    for _ in 0..n {
        digits.push((i % b) as usize);
        i /= b;
    }
    let inv = 1.0 / base as f64;
    let mut x = 0.0;
    for &d in digits.iter().rev() {
        x = (perm[d] as f64 + x) * inv;
    }
    // rounding must not move the point out of its leading-digit cell
    let (lo, hi) = leading_cell(perm[digits[0]], base);
    x.clamp(lo, hi)
}

/// Per-base evaluation table.
#[derive(Debug, Clone)]
struct BaseTable {
    base: u64,
    inv: f64,
    perm: Vec<f64>,
    /// `tail[n]`: contribution of zero digits at positions `n..`, in Horner form.
    tail: Vec<f64>,
    /// Leading-digit cells indexed by unpermuted digit.
    cells: Vec<(f64, f64)>,
}

impl BaseTable {
    fn new(base: u32, perm: &[u32]) -> Self {
        let n = digit_count(base);
        let inv = 1.0 / base as f64;
        let perm: Vec<f64> = perm.iter().map(|&p| p as f64).collect();
        let mut tail = vec![0.0; n + 1];
        for k in (0..n).rev() {
            tail[k] = (perm[0] + tail[k + 1]) * inv;
        }
        let cells = (0..base as usize).map(|d| leading_cell(perm[d] as u32, base)).collect();
        Self {
            base: base as u64,
            inv,
            perm,
            tail,
            cells,
        }
    }

    #[inline]
    fn eval(&self, index: u64) -> f64 {
        let mut digits = [0u8; 64];
        let mut n = 0;
        let mut i = index;
        while i > 0 {
            digits[n] = (i % self.base) as u8;
            i /= self.base;
            n += 1;
        }
        let mut x = self.tail[n];
        for &d in digits[..n].iter().rev() {
            x = (self.perm[d as usize] + x) * self.inv;
        }
        let (lo, hi) = self.cells[digits[0] as usize];
        x.clamp(lo, hi)
    }
}

/// Random-access scrambled Halton sequence in dimension `m`.
#[derive(Debug, Clone)]
pub struct HaltonStream {
    perms: DigitPermutationSet,
    tables: Vec<BaseTable>,
    start_index: u64,
}

impl HaltonStream {
    pub fn new(perms: DigitPermutationSet, start_index: u64) -> Result<Self> {
        if start_index == 0 {
            return Err(Error::Config("index 0 is never emitted".into()));
        }
        let tables = perms
            .bases()
            .iter()
            .enumerate()
            .map(|(j, &b)| BaseTable::new(b, perms.permutation(j)))
            .collect();
        Ok(Self {
            perms,
            tables,
            start_index,
        })
    }

    pub fn with_scramble(scramble: Scramble, dimension: usize) -> Result<Self> {
        Self::new(DigitPermutationSet::new(scramble, dimension)?, 1)
    }

    pub fn dimension(&self) -> usize {
        self.tables.len()
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn permutations(&self) -> &DigitPermutationSet {
        &self.perms
    }

    /// Writes point `index` into `out`, which must have length `dimension()`.
    pub fn fill(&self, index: u64, out: &mut [f64]) -> Result<()> {
        if index == 0 {
            return Err(Error::Domain("Halton index must be >= 1".into()));
        }
        if index >= 1 << 63 {
            return Err(Error::Domain("Halton index exceeds 2^63".into()));
        }
        if out.len() != self.tables.len() {
            return Err(Error::Config(format!(
                "point buffer has length {}, stream dimension is {}",
                out.len(),
                self.tables.len()
            )));
        }
        for (o, t) in out.iter_mut().zip(&self.tables) {
            *o = t.eval(index);
        }
        Ok(())
    }

    pub fn point(&self, index: u64) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dimension()];
        self.fill(index, &mut v)?;
        Ok(v)
    }

    /// Sequential iterator starting at `start_index`.
    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (self.start_index..).map(move |i| self.point(i).expect("valid index"))
    }
}
