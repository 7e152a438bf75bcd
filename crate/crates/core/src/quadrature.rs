//! Double-exponential (tanh-sinh) quadrature, one-dimensional and nested.
//!
//! The integrands handled here are bounded but lose smoothness on faces and
//! edges of the integration box. Tanh-sinh nodes cluster doubly-exponentially
//! at the endpoints, which absorbs that kind of boundary behaviour without
//! explicit subdivision.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const BASE_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    /// Difference between the last two refinement levels, accumulated over
    /// nesting.
    pub error: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_level: u32,
    /// Half-width of the truncated `t` range.
    pub t_max: f64,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_level: 8,
            t_max: 6.0,
        }
    }
}

impl TanhSinh {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`. Never fails; `error` is the estimate at
    /// the last level and `converged` whether it met the tolerance.
    ///
    /// The `t` range is cut where node contributions fall below 1e-18 of the
    /// running sum (never beyond `t_max`). Error estimates follow Bailey:
    /// with `d1 = log10|S_k - S_{k-1}|`, `d2 = log10|S_k - S_{k-2}|`, the error
    /// is `10^max(d1²/d2, 2·d1)`, relative to `|S_k|`.
    pub fn integrate_raw<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> (QuadEstimate, bool) {
        let half = 0.5 * (b - a);
        let mut evals = 0u64;
        let mut eval_at = |t: f64, evals: &mut u64| -> f64 {
            let u = FRAC_PI_2 * t.sinh();
            let cu = u.cosh();
            let w = FRAC_PI_2 * t.cosh() / (cu * cu);
            if w == 0.0 || !w.is_finite() {
                return 0.0;
            }
            // distance from the nearer endpoint, computed without cancellation
            let e = (-2.0 * u.abs()).exp();
            let d = 2.0 * half * e / (1.0 + e);
            let x = if t >= 0.0 { b - d } else { a + d };
            *evals += 1;
            w * f(x)
        };

        let mut h = BASE_STEP;
        let mut sum = eval_at(0.0, &mut evals);
        let mut k = 1u32;
        let mut t_cut = 0.0;
        loop {
            let t = k as f64 * h;
            if t > self.t_max {
                break;
            }
            let term = eval_at(t, &mut evals) + eval_at(-t, &mut evals);
            sum += term;
            t_cut = t;
            if t >= 2.0 && term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            k += 1;
        }
        let mut history = vec![half * h * sum];
        let mut err = f64::INFINITY;
        let mut converged = false;
        let tiny = f64::MIN_POSITIVE;
        for _ in 1..=self.max_level {
            h *= 0.5;
            let mut k = 1u32;
            while k as f64 * h <= t_cut {
                let t = k as f64 * h;
                sum += eval_at(t, &mut evals) + eval_at(-t, &mut evals);
                k += 2;
            }
            let cur = half * h * sum;
            let n = history.len();
            let diff1 = (cur - history[n - 1]).abs();
            err = if n >= 2 {
                let diff2 = (cur - history[n - 2]).abs();
                let scale = cur.abs().max(tiny);
                let r1 = diff1 / scale;
                let r2 = diff2 / scale;
                if r1 == 0.0 {
                    0.0
                } else if r2 >= 1.0 || r1 >= 1.0 {
                    diff1
                } else {
                    let d1 = r1.log10();
                    let d2 = r2.log10();
                    let e = (d1 * d1 / d2).max(2.0 * d1).min(0.0);
                    // never claim more than the last difference allows
                    (10f64.powf(e) * scale).min(diff1).max(f64::EPSILON * scale)
                }
            } else {
                diff1
            };
            history.push(cur);
            if err <= self.abs_tol.max(self.rel_tol * cur.abs()) {
                converged = true;
                break;
            }
        }
        (
            QuadEstimate {
                value: *history.last().unwrap(),
                error: err,
                evaluations: evals,
            },
            converged,
        )
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadEstimate> {
        let (est, ok) = self.integrate_raw(f, a, b);
        if ok {
            Ok(est)
        } else {
            Err(Error::Quadrature {
                estimate: est.value,
                error: est.error,
            })
        }
    }

    /// Nested integration of `f` over the box `Π [lo_i, hi_i]`.
    ///
    /// A coarse pilot pass fixes the overall scale; each inner integral then
    /// gets an absolute tolerance equal to its share of `rel_tol × scale`, so
    /// regions where the integrand is negligible do not force refinement.
    ///
    /// The result is rejected when the accumulated error exceeds
    /// `accept_rel × |value|`.
    pub fn integrate_box<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        lo: &[f64],
        hi: &[f64],
        accept_rel: f64,
    ) -> Result<QuadEstimate> {
        assert_eq!(lo.len(), hi.len());
        if lo.is_empty() {
            return Ok(QuadEstimate {
                value: f(&[]),
                error: 0.0,
                evaluations: 1,
            });
        }
        let mut x = vec![0.0; lo.len()];
        let pilot_rule = TanhSinh {
            rel_tol: 1e-3,
            max_level: 3,
            ..*self
        };
        let pilot_tols = vec![0.0; lo.len()];
        let pilot = pilot_rule.nested(&f, lo, hi, 0, &mut x, &pilot_tols);
        let scale = pilot.value.abs();
        let mut tols = Vec::with_capacity(lo.len());
        let mut outer = 1.0;
        for d in 0..lo.len() {
            tols.push(self.abs_tol.max(self.rel_tol * scale / outer));
            outer *= hi[d] - lo[d];
        }
        let est = self.nested(&f, lo, hi, 0, &mut x, &tols);
        let evaluations = est.evaluations + pilot.evaluations;
        if est.error <= self.abs_tol.max(accept_rel * est.value.abs()) {
            Ok(QuadEstimate { evaluations, ..est })
        } else {
            Err(Error::Quadrature {
                estimate: est.value,
                error: est.error,
            })
        }
    }

    fn nested<F: Fn(&[f64]) -> f64>(
        &self,
        f: &F,
        lo: &[f64],
        hi: &[f64],
        depth: usize,
        x: &mut Vec<f64>,
        abs_tols: &[f64],
    ) -> QuadEstimate {
        let last = depth + 1 == lo.len();
        let mut inner_err = 0.0;
        let mut inner_evals = 0u64;
        let rule = TanhSinh {
            abs_tol: self.abs_tol.max(abs_tols[depth]),
            ..*self
        };
        let (est, _) = rule.integrate_raw(
            |xi| {
                x[depth] = xi;
                if last {
                    f(x)
                } else {
                    let inner = self.nested(f, lo, hi, depth + 1, x, abs_tols);
                    inner_err = f64::max(inner_err, inner.error);
                    inner_evals += inner.evaluations;
                    inner.value
                }
            },
            lo[depth],
            hi[depth],
        );
        let width = hi[depth] - lo[depth];
        QuadEstimate {
            value: est.value,
            error: est.error + inner_err * width,
            evaluations: if last { est.evaluations } else { inner_evals },
        }
    }
}
