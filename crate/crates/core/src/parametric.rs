//! Parametrically driven oscillator: classical mode functions for a
//! time-dependent frequency, Bogoliubov coefficients extracted from their
//! asymptotics, and resonance scans over the modulation frequency.
//!
//! A positive-frequency plane wave is launched in the static past, carried
//! through the time-dependent region, and decomposed into plane waves in the
//! static future; `|beta|^2` is the mean number of created quanta. The
//! Wronskian of the complex mode is conserved, which pins
//! `|alpha|^2 - |beta|^2 = 1`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::linspace;
use crate::ode::{integrate_dense, OdeOptions};

/// Endpoint-flatness threshold: |w'(t)/w(t)^2| below this counts as static.
pub const FLATNESS_THRESHOLD: f64 = 1e-6;

/// Time-dependent oscillator frequency, static at both ends.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyProfile {
    Constant {
        omega: f64,
    },
    /// Smooth step from `omega_in` to `omega_out` around `center`.
    TanhStep {
        omega_in: f64,
        omega_out: f64,
        center: f64,
        width: f64,
    },
    /// Gaussian excursion on a constant background.
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Sinusoidal modulation with a flat-top envelope of half-width
    /// `envelope_width` and Gaussian edges:
    /// `w(t) = base (1 + depth sin(mod_frequency t) env(t))`.
    Modulated {
        base: f64,
        depth: f64,
        mod_frequency: f64,
        envelope_width: f64,
    },
}

impl FrequencyProfile {
    pub fn omega(&self, t: f64) -> f64 {
        match *self {
            FrequencyProfile::Constant { omega } => omega,
            FrequencyProfile::TanhStep {
                omega_in,
                omega_out,
                center,
                width,
            } => omega_in + (omega_out - omega_in) * 0.5 * (1.0 + ((t - center) / width).tanh()),
            FrequencyProfile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => base + amplitude * (-((t - center) / width).powi(2) / 2.0).exp(),
            FrequencyProfile::Modulated {
                base,
                depth,
                mod_frequency,
                envelope_width,
            } => base * (1.0 + depth * (mod_frequency * t).sin() * flat_top(t, envelope_width)),
        }
    }

    pub fn omega_dot(&self, t: f64) -> f64 {
        match *self {
            FrequencyProfile::Constant { .. } => 0.0,
            FrequencyProfile::TanhStep {
                omega_in,
                omega_out,
                center,
                width,
            } => {
                let s = ((t - center) / width).cosh();
                (omega_out - omega_in) * 0.5 / (width * s * s)
            }
            FrequencyProfile::GaussianBump {
                base: _,
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                -amplitude * u / width * (-u * u / 2.0).exp()
            }
            FrequencyProfile::Modulated {
                base,
                depth,
                mod_frequency,
                envelope_width,
            } => {
                let env = flat_top(t, envelope_width);
                let denv = flat_top_dot(t, envelope_width);
                base * depth
                    * (mod_frequency * (mod_frequency * t).cos() * env
                        + (mod_frequency * t).sin() * denv)
            }
        }
    }

    /// Frequency in the asymptotic past / future.
    pub fn omega_in(&self) -> f64 {
        match *self {
            FrequencyProfile::Constant { omega } => omega,
            FrequencyProfile::TanhStep { omega_in, .. } => omega_in,
            FrequencyProfile::GaussianBump { base, .. } => base,
            FrequencyProfile::Modulated { base, .. } => base,
        }
    }

    pub fn omega_out(&self) -> f64 {
        match *self {
            FrequencyProfile::Constant { omega } => omega,
            FrequencyProfile::TanhStep { omega_out, .. } => omega_out,
            FrequencyProfile::GaussianBump { base, .. } => base,
            FrequencyProfile::Modulated { base, .. } => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ValidationFailed {
                    path: format!("profile.{what}"),
                    message: format!("must be finite and positive, got {v}"),
                })
            }
        };
        match *self {
            FrequencyProfile::Constant { omega } => positive(omega, "omega"),
            FrequencyProfile::TanhStep {
                omega_in,
                omega_out,
                width,
                ..
            } => {
                positive(omega_in, "omega_in")?;
                positive(omega_out, "omega_out")?;
                positive(width, "width")
            }
            FrequencyProfile::GaussianBump {
                base,
                amplitude,
                width,
                ..
            } => {
                positive(base, "base")?;
                positive(width, "width")?;
                if base + amplitude.min(0.0) <= 0.0 {
                    return Err(Error::ValidationFailed {
                        path: "profile.amplitude".into(),
                        message: "frequency dips to zero or below".into(),
                    });
                }
                Ok(())
            }
            FrequencyProfile::Modulated {
                base,
                depth,
                mod_frequency,
                envelope_width,
            } => {
                positive(base, "base")?;
                positive(mod_frequency, "mod_frequency")?;
                positive(envelope_width, "envelope_width")?;
                if depth.abs() >= 1.0 {
                    return Err(Error::ValidationFailed {
                        path: "profile.depth".into(),
                        message: "modulation depth must stay below 1".into(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Profile mirrored in time, `t -> -t`.
    pub fn reversed(&self) -> ReversedProfile {
        ReversedProfile(*self)
    }
}

/// Flat top of half-width `w`, Gaussian edges of sigma `w/4`.
fn flat_top(t: f64, w: f64) -> f64 {
    let sigma = w / 4.0;
    let excess = (t.abs() - w).max(0.0);
    (-(excess / sigma).powi(2) / 2.0).exp()
}

fn flat_top_dot(t: f64, w: f64) -> f64 {
    let sigma = w / 4.0;
    let excess = t.abs() - w;
    if excess <= 0.0 {
        0.0
    } else {
        -excess / (sigma * sigma) * (-(excess / sigma).powi(2) / 2.0).exp() * t.signum()
    }
}

/// Time-mirrored view of a profile (for time-reversal checks).
#[derive(Clone, Copy, Debug)]
pub struct ReversedProfile(FrequencyProfile);

impl ReversedProfile {
    pub fn omega(&self, t: f64) -> f64 {
        self.0.omega(-t)
    }
}

/// Complex mode function and its derivative on a grid.
#[derive(Clone, Debug)]
pub struct ModeTrace {
    pub times: Vec<f64>,
    pub q: Vec<Complex64>,
    pub q_dot: Vec<Complex64>,
    /// max_t |W(t) - W(t_start)| of the Wronskian `q qdot* - q* qdot`.
    pub wronskian_drift: f64,
    pub omega_in: f64,
    pub omega_out: f64,
    /// |w'/w^2| at the two endpoints.
    pub flatness: (f64, f64),
}

fn flatness_of<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(w: &F, wd: &G, t: f64) -> f64 {
    let om = w(t);
    (wd(t) / (om * om)).abs()
}

/// Integrate `q'' + w(t)^2 q = 0` from plane-wave initial data in the static
/// past. Fails unless the profile is static (flat) at both endpoints.
pub fn integrate_mode(
    profile: &FrequencyProfile,
    t_start: f64,
    t_end: f64,
    ode_tol: f64,
) -> Result<ModeTrace> {
    profile.validate()?;
    let w = |t: f64| profile.omega(t);
    let wd = |t: f64| profile.omega_dot(t);
    integrate_mode_with(&w, &wd, profile.omega_in(), t_start, t_end, ode_tol)
}

/// Same as [`integrate_mode`] for an arbitrary frequency function (used for
/// reversed profiles and compositions).
pub fn integrate_mode_with<W, Wd>(
    omega: &W,
    omega_dot: &Wd,
    omega_in: f64,
    t_start: f64,
    t_end: f64,
    ode_tol: f64,
) -> Result<ModeTrace>
where
    W: Fn(f64) -> f64,
    Wd: Fn(f64) -> f64,
{
    for t in [t_start, t_end] {
        let fl = flatness_of(omega, omega_dot, t);
        if fl > FLATNESS_THRESHOLD {
            return Err(Error::NotAsymptoticallyStatic {
                t,
                flatness: fl,
                threshold: FLATNESS_THRESHOLD,
            });
        }
    }
    let span = t_end - t_start;
    let n = ((span * omega_in).ceil() as usize).clamp(200, 20_000);
    let grid = linspace(t_start, t_end, n);

    let q0 = Complex64::new(0.0, -omega_in * t_start).exp() / (2.0 * omega_in).sqrt();
    let qd0 = q0 * Complex64::new(0.0, -omega_in);
    let y0 = DVector::from_vec(vec![q0, qd0]);
    let rhs = |t: f64, y: &DVector<Complex64>| {
        let om = omega(t);
        DVector::from_vec(vec![y[1], -y[0] * (om * om)])
    };
    let states = integrate_dense(&rhs, t_start, y0, &grid, &OdeOptions::with_tol(ode_tol))?;

    let wronskian = |q: Complex64, qd: Complex64| q * qd.conj() - q.conj() * qd;
    let w0 = wronskian(states[0][0], states[0][1]);
    let mut drift = 0.0f64;
    let mut q = Vec::with_capacity(grid.len());
    let mut q_dot = Vec::with_capacity(grid.len());
    for s in &states {
        drift = drift.max((wronskian(s[0], s[1]) - w0).norm());
        q.push(s[0]);
        q_dot.push(s[1]);
    }
    Ok(ModeTrace {
        times: grid,
        q,
        q_dot,
        wronskian_drift: drift,
        omega_in,
        omega_out: omega(t_end),
        flatness: (
            flatness_of(omega, omega_dot, t_start),
            flatness_of(omega, omega_dot, t_end),
        ),
    })
}

/// Complex pair relating past and future ladder operators.
#[derive(Clone, Copy, Debug)]
pub struct BogoliubovPair {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `| |alpha|^2 - |beta|^2 - 1 |`.
    pub normalization_residual: f64,
    /// Endpoint flatness carried over from the mode trace.
    pub flatness_residual: f64,
}

/// Decompose the final mode value into future plane waves.
pub fn extract_bogoliubov(trace: &ModeTrace) -> Result<BogoliubovPair> {
    let fl = trace.flatness.1;
    if fl > FLATNESS_THRESHOLD {
        return Err(Error::NotAsymptoticallyStatic {
            t: *trace.times.last().unwrap(),
            flatness: fl,
            threshold: FLATNESS_THRESHOLD,
        });
    }
    let t = *trace.times.last().unwrap();
    let q = *trace.q.last().unwrap();
    let qd = *trace.q_dot.last().unwrap();
    let w = trace.omega_out;
    let half = (w / 2.0).sqrt();
    let alpha = (q + qd * Complex64::new(0.0, 1.0 / w)) * half * Complex64::new(0.0, w * t).exp();
    let beta = (q - qd * Complex64::new(0.0, 1.0 / w)) * half * Complex64::new(0.0, -w * t).exp();
    let normalization_residual = (alpha.norm_sqr() - beta.norm_sqr() - 1.0).abs();
    Ok(BogoliubovPair {
        alpha,
        beta,
        normalization_residual,
        flatness_residual: fl.max(trace.flatness.0),
    })
}

/// Parameters shared by every point of a resonance scan.
#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    /// Template profile; `scan_point` substitutes the modulation frequency.
    pub profile: FrequencyProfile,
    pub t_start: f64,
    pub t_end: f64,
    pub ode_tol: f64,
}

/// One scan evaluation at `mod_frequency`.
pub fn scan_point(cfg: &ScanConfig, mod_frequency: f64) -> Result<BogoliubovPair> {
    let profile = match cfg.profile {
        FrequencyProfile::Modulated {
            base,
            depth,
            envelope_width,
            ..
        } => FrequencyProfile::Modulated {
            base,
            depth,
            mod_frequency,
            envelope_width,
        },
        other => other,
    };
    let trace = integrate_mode(&profile, cfg.t_start, cfg.t_end, cfg.ode_tol)?;
    extract_bogoliubov(&trace)
}

/// Scan outcome for one modulation frequency.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub mod_frequency: f64,
    pub beta_sqr: f64,
    pub normalization_residual: f64,
    /// Present when this point failed; the scan continues regardless.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Modulation frequency with the largest `|beta|^2`.
    pub argmax: f64,
    /// Largest `|beta|^2` seen.
    pub peak_beta_sqr: f64,
    /// Location of the secondary maximum restricted to a window around the
    /// base frequency itself.
    pub secondary_peak: Option<f64>,
}

/// Run a modulation-frequency scan; points execute independently (in
/// parallel with the `parallel` feature) and aggregate in grid order.
pub fn resonance_scan(cfg: &ScanConfig, frequencies: &[f64]) -> Result<ScanResult> {
    if frequencies.is_empty() {
        return Err(Error::ValidationFailed {
            path: "frequencies".into(),
            message: "empty scan grid".into(),
        });
    }
    let rows: Vec<ScanRow> = exec::ordered_map(frequencies, |&f| match scan_point(cfg, f) {
        Ok(pair) => ScanRow {
            mod_frequency: f,
            beta_sqr: pair.beta.norm_sqr(),
            normalization_residual: pair.normalization_residual,
            error: None,
        },
        Err(e) => ScanRow {
            mod_frequency: f,
            beta_sqr: f64::NAN,
            normalization_residual: f64::NAN,
            error: Some(e.to_string()),
        },
    });

    let mut argmax = frequencies[0];
    let mut peak = f64::NEG_INFINITY;
    for r in rows.iter().filter(|r| r.error.is_none()) {
        if r.beta_sqr > peak {
            peak = r.beta_sqr;
            argmax = r.mod_frequency;
        }
    }

    let base = cfg.profile.omega_in();
    let mut secondary_peak = None;
    let mut sec_best = f64::NEG_INFINITY;
    for r in rows.iter().filter(|r| r.error.is_none()) {
        if (r.mod_frequency - base).abs() <= 0.25 * base && r.beta_sqr > sec_best {
            sec_best = r.beta_sqr;
            secondary_peak = Some(r.mod_frequency);
        }
    }

    Ok(ScanResult {
        rows,
        argmax,
        peak_beta_sqr: peak,
        secondary_peak,
    })
}
