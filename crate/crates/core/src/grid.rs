//! Time-grid helpers.

use crate::error::{Error, Result};

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let h = (stop - start) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { stop } else { start + h * k as f64 })
        .collect()
}

/// Grid from `start` to `stop` with spacing `step` (the last point is capped
/// at `stop`).
pub fn step_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && stop > start) {
        return Err(Error::ValidationFailed {
            path: "grid".into(),
            message: format!("invalid grid {start}:{stop}:{step}"),
        });
    }
    let n = ((stop - start) / step).ceil() as usize + 1;
    let mut g: Vec<f64> = (0..n).map(|k| start + step * k as f64).collect();
    if let Some(last) = g.last_mut() {
        if *last > stop {
            *last = stop;
        }
    }
    g.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON);
    Ok(g)
}

/// Validate strict monotonicity.
pub fn check_monotone(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::ValidationFailed {
            path: "grid".into(),
            message: "empty grid".into(),
        });
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::ValidationFailed {
                path: "grid".into(),
                message: format!("grid not strictly increasing at {} -> {}", w[0], w[1]),
            });
        }
    }
    Ok(())
}
