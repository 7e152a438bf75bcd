//! Fixed-size 4×4 complex matrix kernels.
//!
//! Everything here works on stack arrays; nothing allocates. The Hermitian
//! eigensolver is a cyclic complex Jacobi iteration, which is slow for large
//! matrices but accurate and branch-light at this size.

use num_complex::Complex64;

pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros() -> Mat4 {
    [[ZERO; 4]; 4]
}

pub fn identity() -> Mat4 {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = zeros();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Mat4) -> Mat4 {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn conj(a: &Mat4) -> Mat4 {
    let mut out = *a;
    for row in out.iter_mut() {
        for z in row.iter_mut() {
            *z = z.conj();
        }
    }
    out
}

pub fn scale(a: &Mat4, s: f64) -> Mat4 {
    let mut out = *a;
    for row in out.iter_mut() {
        for z in row.iter_mut() {
            *z *= s;
        }
    }
    out
}

pub fn add(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn trace(a: &Mat4) -> Complex64 {
    (0..4).map(|i| a[i][i]).sum()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// `U · diag(d) · U†`.
pub fn conjugate_diag(u: &Mat4, d: &[f64; 4]) -> Mat4 {
    let mut out = zeros();
    for i in 0..4 {
        for j in i..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += u[i][k] * u[j][k].conj() * d[k];
            }
            out[i][j] = acc;
            out[j][i] = acc.conj();
        }
        out[i][i] = Complex64::new(out[i][i].re, 0.0);
    }
    out
}

/// `x^n` by repeated multiplication, so the result does not depend on how
/// the compiler lowers `powi`.
pub fn ipow(x: f64, n: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n.unsigned_abs() {
        acc *= x;
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// Determinant by Gaussian elimination with full pivoting.
pub fn determinant(a: &Mat4) -> Complex64 {
    let mut m = *a;
    let mut det = ONE;
    for col in 0..4 {
        let (mut pr, mut pc, mut best) = (col, col, -1.0);
        for (r, row) in m.iter().enumerate().skip(col) {
            for (c, z) in row.iter().enumerate().skip(col) {
                let n = z.norm_sqr();
                if n > best {
                    best = n;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if pr != col {
            m.swap(pr, col);
            det = -det;
        }
        if pc != col {
            for row in m.iter_mut() {
                row.swap(pc, col);
            }
            det = -det;
        }
        let pivot = m[col][col];
        det *= pivot;
        let inv = ONE / pivot;
        for r in (col + 1)..4 {
            let f = m[r][col] * inv;
            if f == ZERO {
                continue;
            }
            for c in (col + 1)..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    det
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: [f64; 4],
    /// Unit eigenvectors stored as columns, in the order of `values`.
    pub vectors: Mat4,
}

const MAX_SWEEPS: usize = 50;

fn jacobi(a: &Mat4, want_vectors: bool) -> ([f64; 4], Mat4) {
    let mut m = *a;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(row[i].re, 0.0);
    }
    let mut v = identity();
    let scale: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    if scale == 0.0 {
        return ([0.0; 4], v);
    }
    let tiny = scale * 1e-36;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += m[p][q].norm_sqr();
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let b = m[p][q];
                let babs = b.norm();
                if babs * babs <= tiny * 1e-4 {
                    continue;
                }
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                let theta = (aqq - app) / (2.0 * babs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // phase e = exp(-i arg b); J = [[c, s], [-s e, c e]]
                let e = b.conj() / babs;
                let jpq = Complex64::new(s, 0.0);
                let jqp = -e * s;
                let jqq = e * c;

                // m <- m J (columns p, q)
                for row in m.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = xp * c + xq * jqp;
                    row[q] = xp * jpq + xq * jqq;
                }
                // m <- J† m (rows p, q)
                for k in 0..4 {
                    let xp = m[p][k];
                    let xq = m[q][k];
                    m[p][k] = xp * c + xq * jqp.conj();
                    m[q][k] = xp * jpq.conj() + xq * jqq.conj();
                }
                m[p][q] = ZERO;
                m[q][p] = ZERO;
                m[p][p] = Complex64::new(m[p][p].re, 0.0);
                m[q][q] = Complex64::new(m[q][q].re, 0.0);

                if want_vectors {
                    for row in v.iter_mut() {
                        let xp = row[p];
                        let xq = row[q];
                        row[p] = xp * c + xq * jqp;
                        row[q] = xp * jpq + xq * jqq;
                    }
                }
            }
        }
    }
    ([m[0][0].re, m[1][1].re, m[2][2].re, m[3][3].re], v)
}

pub fn hermitian_eigen(a: &Mat4) -> HermitianEigen {
    let (vals, vecs) = jacobi(a, true);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let mut values = [0.0; 4];
    let mut vectors = zeros();
    for (col, &src) in order.iter().enumerate() {
        values[col] = vals[src];
        for r in 0..4 {
            vectors[r][col] = vecs[r][src];
        }
    }
    HermitianEigen { values, vectors }
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(a: &Mat4) -> [f64; 4] {
    let (mut vals, _) = jacobi(a, false);
    vals.sort_by(|x, y| x.total_cmp(y));
    vals
}
