//! Minimum-norm synthesis of bandlimited signals with prescribed amplitudes.
//!
//! A bandlimited function constrained to pass through given points has a
//! unique minimum-L2-norm representative: a weighted sum of sinc kernels
//! centered on the constraint times, with weights solving the Gram system
//! `S b = a`. Forcing sub-band-period oscillation makes `S` nearly singular
//! and the weights (and the signal outside the constrained window) grow
//! exponentially with the number of constraints, which is why the solver
//! carries an extended-precision fallback.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dd::{Dd, DD_PI};
use crate::error::{Error, Result};

/// Constraint times closer than this are rejected as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Condition number above which the machine-precision solve is retried in
/// extended precision.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

/// Arithmetic used by the constraint solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    #[default]
    Machine,
    Extended,
}

/// A set of amplitude constraints on an `Omega`-bandlimited function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub bandlimit: f64,
    /// (time, amplitude) pairs.
    pub points: Vec<(f64, f64)>,
}

impl ConstraintSpec {
    pub fn new(bandlimit: f64, points: Vec<(f64, f64)>) -> Result<Self> {
        let spec = ConstraintSpec { bandlimit, points };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandlimit.is_finite() && self.bandlimit > 0.0) {
            return Err(Error::ValidationFailed {
                path: "bandlimit".into(),
                message: format!("must be finite and positive, got {}", self.bandlimit),
            });
        }
        if self.points.is_empty() {
            return Err(Error::ValidationFailed {
                path: "points".into(),
                message: "at least one constraint point is required".into(),
            });
        }
        for (k, (t, a)) in self.points.iter().enumerate() {
            if !(t.is_finite() && a.is_finite()) {
                return Err(Error::ValidationFailed {
                    path: format!("points[{k}]"),
                    message: format!("non-finite entry ({t}, {a})"),
                });
            }
        }
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let (t0, t1) = (self.points[i].0, self.points[j].0);
                if (t0 - t1).abs() < DUPLICATE_TOL {
                    return Err(Error::DuplicateTimes {
                        t0,
                        t1,
                        tol: DUPLICATE_TOL,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Gram matrix of shifted sinc kernels: entry (j, i) is
/// `sin(W (t_j - t_i)) / (pi (t_j - t_i))`, with the limit `W/pi` on the
/// diagonal.
pub fn gram_matrix(spec: &ConstraintSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let t = spec.times();
    let n = t.len();
    let w = spec.bandlimit;
    let mut s = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            s[(j, i)] = if i == j {
                w / PI
            } else {
                let d = t[j] - t[i];
                (w * d).sin() / (PI * d)
            };
        }
    }
    Ok(s)
}

/// Options for [`solve_min_norm_with`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub precision: PrecisionMode,
    pub condition_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            precision: PrecisionMode::Machine,
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
        }
    }
}

/// A bandlimited signal represented exactly as a weighted sum of shifted
/// sinc kernels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SincExpansion {
    pub bandlimit: f64,
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    /// Low words of the weights when the solve ran in extended precision;
    /// `weights[i] + weights_lo[i]` is the double-double weight. Without
    /// them, rounding of large alternating weights limits evaluation to
    /// roughly `eps * sum|b_i|` absolute accuracy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_lo: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub condition_number: f64,
    #[serde(default)]
    pub precision_mode: PrecisionMode,
    /// Set when the condition threshold was exceeded during the solve.
    #[serde(default)]
    pub ill_conditioned: bool,
}

fn one() -> f64 {
    1.0
}

impl SincExpansion {
    /// Assemble an expansion directly from centers and weights, bypassing the
    /// constraint solve. Weights may be empty (the zero signal).
    pub fn raw(bandlimit: f64, centers: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(centers.len(), weights.len());
        SincExpansion {
            bandlimit,
            centers,
            weights,
            weights_lo: None,
            condition_number: 1.0,
            precision_mode: PrecisionMode::Machine,
            ill_conditioned: false,
        }
    }

    pub fn zero(bandlimit: f64) -> Self {
        Self::raw(bandlimit, Vec::new(), Vec::new())
    }

    pub fn bandlimit(&self) -> f64 {
        self.bandlimit
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the shifted sinc kernels at `t`, with the removable singularity
    /// replaced by its limit inside |t - t_i| < 1e-8.
    pub fn evaluate(&self, t: f64) -> f64 {
        let w = self.bandlimit;
        let mut sum = 0.0;
        for (&ti, &bi) in self.centers.iter().zip(self.weights.iter()) {
            let x = t - ti;
            sum += if x.abs() < 1e-8 {
                bi * w / PI
            } else {
                bi * (w * x).sin() / (PI * x)
            };
        }
        sum
    }

    /// Weight `i` as a double-double (low word zero for machine solves).
    pub(crate) fn weight_dd(&self, i: usize) -> Dd {
        Dd {
            hi: self.weights[i],
            lo: self.weights_lo.as_ref().map_or(0.0, |lo| lo[i]),
        }
    }

    /// Extended-precision evaluation for signals whose weights span more
    /// decades than `f64` summation can cancel.
    pub fn evaluate_extended(&self, t: f64) -> f64 {
        let w = Dd::from_f64(self.bandlimit);
        let mut sum = Dd::zero();
        for (i, &ti) in self.centers.iter().enumerate() {
            let x = Dd::from_f64(t) - Dd::from_f64(ti);
            let term = if x.hi.abs() < 1e-8 {
                self.weight_dd(i) * w / DD_PI
            } else {
                self.weight_dd(i) * (w * x).sin() / (DD_PI * x)
            };
            sum = sum + term;
        }
        sum.to_f64()
    }

    /// Evaluation in the arithmetic matching `precision_mode`.
    pub fn evaluate_auto(&self, t: f64) -> f64 {
        match self.precision_mode {
            PrecisionMode::Machine => self.evaluate(t),
            PrecisionMode::Extended => self.evaluate_extended(t),
        }
    }

    /// Absolute noise scale of machine-precision evaluation: cancellation of
    /// the weighted kernel terms cannot do better than this anywhere.
    pub fn noise_scale(&self) -> f64 {
        let sum_abs: f64 = self.weights.iter().map(|b| b.abs()).sum();
        f64::EPSILON * sum_abs * (self.bandlimit / PI)
    }

    /// Fourier transform under the convention
    /// `f(t) = (2 pi)^{-1/2} int_{-W}^{W} ft(w) e^{i w t} dw`:
    /// `(2 pi)^{-1/2} sum_i b_i e^{-i w t_i}` on the band, exactly zero
    /// outside it.
    pub fn evaluate_spectrum(&self, omega: f64) -> Complex64 {
        if omega.abs() > self.bandlimit {
            return Complex64::new(0.0, 0.0);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (&ti, &bi) in self.centers.iter().zip(self.weights.iter()) {
            s += bi * Complex64::new(0.0, -omega * ti).exp();
        }
        s / (2.0 * PI).sqrt()
    }

    /// Squared L2 norm via the reproducing-kernel identity `b^T S b`,
    /// accumulated in extended precision (the bilinear form cancels
    /// catastrophically for strongly superoscillating signals).
    pub fn norm_squared(&self) -> f64 {
        let n = self.centers.len();
        let s = gram_matrix_dd(self.bandlimit, &self.centers);
        let mut acc = Dd::zero();
        for j in 0..n {
            for i in 0..n {
                acc = acc + self.weight_dd(j) * self.weight_dd(i) * s[j * n + i];
            }
        }
        acc.to_f64()
    }

    /// Sum of a linear functional `sum_i c_i b_i` in extended precision.
    pub(crate) fn weight_dot(&self, c: &[f64]) -> f64 {
        let mut acc = Dd::zero();
        for (i, &ci) in c.iter().enumerate() {
            acc = acc + self.weight_dd(i) * Dd::from_f64(ci);
        }
        acc.to_f64()
    }
}

/// Solve the constrained minimum-norm problem.
pub fn solve_min_norm(spec: &ConstraintSpec, precision: PrecisionMode) -> Result<SincExpansion> {
    solve_min_norm_with(
        spec,
        SolveOptions {
            precision,
            ..SolveOptions::default()
        },
    )
}

/// Solve with an explicit condition threshold.
pub fn solve_min_norm_with(spec: &ConstraintSpec, opts: SolveOptions) -> Result<SincExpansion> {
    let s = gram_matrix(spec)?;
    let a = spec.amplitudes();
    let n = a.len();

    // f64 spectral estimate; lambda_min below f64 resolution means the
    // condition number must come from the extended factorization instead.
    let eig = s.clone().symmetric_eigenvalues();
    let lam_max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let lam_min = eig.iter().cloned().fold(f64::MAX, f64::min);
    let f64_floor = 64.0 * f64::EPSILON * lam_max * n as f64;

    let mut condition = if lam_min > f64_floor {
        lam_max / lam_min
    } else {
        f64::INFINITY
    };

    let use_extended = opts.precision == PrecisionMode::Extended
        || !condition.is_finite()
        || condition > opts.condition_threshold;

    let (weights, weights_lo, mode_used) = if use_extended {
        let s_dd = gram_matrix_dd(spec.bandlimit, &spec.times());
        let chol = DdCholesky::factor(&s_dd, n).ok_or(Error::IllConditioned {
            condition,
            residual: f64::INFINITY,
            bound: 0.0,
        })?;
        if !condition.is_finite() || condition > opts.condition_threshold {
            condition = lam_max / chol.smallest_eigenvalue(n);
        }
        let b = chol.solve_dd(&a);
        let hi: Vec<f64> = b.iter().map(|v| v.hi).collect();
        let lo: Vec<f64> = b.iter().map(|v| v.lo).collect();
        (hi, Some(lo), PrecisionMode::Extended)
    } else {
        let chol = s
            .clone()
            .cholesky()
            .ok_or_else(|| Error::IllConditioned {
                condition,
                residual: f64::INFINITY,
                bound: 0.0,
            })?;
        let b = chol.solve(&DVector::from_column_slice(&a));
        (
            b.iter().cloned().collect::<Vec<f64>>(),
            None,
            PrecisionMode::Machine,
        )
    };

    let expansion = SincExpansion {
        bandlimit: spec.bandlimit,
        centers: spec.times(),
        weights,
        weights_lo,
        condition_number: condition,
        precision_mode: mode_used,
        ill_conditioned: condition > opts.condition_threshold,
    };

    // interpolation residual of the returned (f64-rounded) weights, measured
    // in extended precision against the Gram system
    let max_a = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bound = (condition * f64::EPSILON * max_a).max(1e-9);
    let residual = gram_residual(&expansion, &a);
    if residual > bound {
        if mode_used == PrecisionMode::Machine {
            // retry once in extended precision before giving up
            return solve_min_norm_with(
                spec,
                SolveOptions {
                    precision: PrecisionMode::Extended,
                    ..opts
                },
            );
        }
        return Err(Error::IllConditioned {
            condition,
            residual,
            bound,
        });
    }
    Ok(expansion)
}

/// Gram matrix rebuilt entirely in double-double arithmetic. Beyond
/// condition numbers of roughly 1/eps the `f64`-rounded entries already make
/// the stored matrix indefinite, so the extended factorization must start
/// from entries accurate past `f64`.
fn gram_matrix_dd(bandlimit: f64, times: &[f64]) -> Vec<Dd> {
    let n = times.len();
    let w = Dd::from_f64(bandlimit);
    let mut s = vec![Dd::zero(); n * n];
    for j in 0..n {
        for i in 0..n {
            s[j * n + i] = if i == j {
                w / DD_PI
            } else {
                let d = Dd::from_f64(times[j]) - Dd::from_f64(times[i]);
                (w * d).sin() / (DD_PI * d)
            };
        }
    }
    s
}

/// max_i |(S b - a)_i| with extended-precision entries and accumulation.
fn gram_residual(f: &SincExpansion, a: &[f64]) -> f64 {
    let n = a.len();
    let s = gram_matrix_dd(f.bandlimit, &f.centers);
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut acc = Dd::from_f64(-a[i]);
        for j in 0..n {
            acc = acc + s[i * n + j] * f.weight_dd(j);
        }
        worst = worst.max(acc.to_f64().abs());
    }
    worst
}

/// Cholesky factorization carried out entirely in double-double arithmetic.
struct DdCholesky {
    n: usize,
    l: Vec<Dd>, // lower triangle, row-major
}

impl DdCholesky {
    fn factor(s: &[Dd], n: usize) -> Option<Self> {
        let mut l = vec![Dd::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = s[i * n + j];
                for k in 0..j {
                    sum = sum - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum.to_f64() <= 0.0 {
                        return None;
                    }
                    l[i * n + j] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(DdCholesky { n, l })
    }

    fn solve_dd(&self, a: &[f64]) -> Vec<Dd> {
        let n = self.n;
        let mut y = vec![Dd::zero(); n];
        for i in 0..n {
            let mut sum = Dd::from_f64(a[i]);
            for k in 0..i {
                sum = sum - self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        let mut x = vec![Dd::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum = sum - self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }

    fn solve(&self, a: &[f64]) -> Vec<f64> {
        self.solve_dd(a).iter().map(|v| v.to_f64()).collect()
    }

    /// Smallest eigenvalue estimate by inverse power iteration through the
    /// extended factorization.
    fn smallest_eigenvalue(&self, n: usize) -> f64 {
        let mut x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut lambda = f64::INFINITY;
        for _ in 0..60 {
            let y = self.solve(&x);
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(ny.is_finite() && ny > 0.0) {
                break;
            }
            // Rayleigh quotient of S^{-1}: x . y with normalized x
            let xy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            lambda = 1.0 / xy.abs().max(f64::MIN_POSITIVE);
            for (xi, yi) in x.iter_mut().zip(y.iter()) {
                *xi = yi / ny;
            }
        }
        lambda
    }
}

/// Summary of where a signal is large, where it oscillates, and how fast.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignalCharacterization {
    pub window: (f64, f64),
    pub peak_inside: f64,
    pub peak_outside: f64,
    pub dynamic_range: f64,
    /// Twice the median spacing of consecutive zero crossings inside the
    /// window; `None` when fewer than two crossings were found.
    pub local_period_estimate: Option<f64>,
    pub zero_crossings: Vec<f64>,
}

/// Scan |f| on a grid, refine peaks, and locate zero crossings.
///
/// `scan_horizon` is the absolute |t| out to which the outside region is
/// searched; it must lie beyond the window.
pub fn characterize(
    f: &SincExpansion,
    window: (f64, f64),
    scan_horizon: f64,
    grid_step: f64,
) -> Result<SignalCharacterization> {
    if !(grid_step > 0.0) {
        return Err(Error::ValidationFailed {
            path: "grid_step".into(),
            message: "must be positive".into(),
        });
    }
    let (w0, w1) = window;
    if !(w1 > w0) {
        return Err(Error::ValidationFailed {
            path: "window".into(),
            message: "empty window".into(),
        });
    }
    if scan_horizon <= w1.abs().max(w0.abs()) {
        return Err(Error::ValidationFailed {
            path: "scan_horizon".into(),
            message: "must lie beyond the window".into(),
        });
    }
    if w1 - w0 < grid_step {
        return Err(Error::EmptyWindow { lo: w0, hi: w1 });
    }

    let eval = |t: f64| f.evaluate_auto(t);

    let peak_inside = scan_peak(&eval, w0, w1, grid_step);
    let left = scan_peak(&eval, -scan_horizon, w0, grid_step);
    let right = scan_peak(&eval, w1, scan_horizon, grid_step);
    let peak_outside = left.max(right);

    // zero crossings by sign change + bisection
    let mut zeros = Vec::new();
    let n = ((w1 - w0) / grid_step).floor() as usize;
    let mut prev_t = w0;
    let mut prev_v = eval(prev_t);
    for k in 1..=n {
        let t = w0 + grid_step * k as f64;
        let v = eval(t);
        if prev_v == 0.0 {
            zeros.push(prev_t);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_t, t, prev_v);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let fm = eval(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }

    let local_period_estimate = if zeros.len() >= 2 {
        let mut sp: Vec<f64> = zeros.windows(2).map(|z| z[1] - z[0]).collect();
        sp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(2.0 * sp[sp.len() / 2])
    } else {
        None
    };

    Ok(SignalCharacterization {
        window,
        peak_inside,
        peak_outside,
        dynamic_range: peak_outside / peak_inside,
        local_period_estimate,
        zero_crossings: zeros,
    })
}

/// Default outside-scan horizon: ten sidelobe widths (pi/W each) beyond the
/// furthest window edge.
pub fn default_scan_horizon(window: (f64, f64), bandlimit: f64) -> f64 {
    window.0.abs().max(window.1.abs()) + 10.0 * PI / bandlimit
}

fn scan_peak<F: Fn(f64) -> f64>(eval: &F, a: f64, b: f64, step: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut best_t = a;
    let mut best = eval(a).abs();
    for k in 1..=n {
        let t = a + h * k as f64;
        let v = eval(t).abs();
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // golden-section refinement of |f| around the best grid point
    let (mut lo, mut hi) = ((best_t - h).max(a), (best_t + h).min(b));
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let mut x1 = lo + phi * (hi - lo);
    let mut x2 = hi - phi * (hi - lo);
    let mut f1 = eval(x1).abs();
    let mut f2 = eval(x2).abs();
    for _ in 0..64 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - phi * (hi - lo);
            f2 = eval(x2).abs();
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + phi * (hi - lo);
            f1 = eval(x1).abs();
        }
    }
    best.max(f1).max(f2)
}
