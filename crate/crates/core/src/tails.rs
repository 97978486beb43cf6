//! Analytic completion of oscillatory integrals over sinc tails.
//!
//! Running integrals of a sinc expansion against `exp(i mu t)` have an
//! infinite lower limit, but the integrand decays only like 1/t, so plain
//! truncation converges far too slowly. Each sinc term reduces to integrals
//! of `exp(i c v)/v`, which for large |c v| have the classical integration-
//! by-parts expansion
//!
//!   int_{-inf}^{X} exp(i c v)/v dv
//!       = exp(i c X) * sum_{k>=1} (-1)^{k-1} (k-1)! / (i c X)^k / X^0 ...
//!
//! truncated at the smallest term. The expansion is applied per term once the
//! clearance |c (X - t_i)| is large enough for the smallest term to reach
//! double precision; callers pick their truncation point accordingly via
//! [`required_clearance`].

use num_complex::Complex64;

use crate::signal::SincExpansion;

/// Smallest |c| * |X - center| for which the asymptotic series bottoms out
/// near machine precision (min term ~ sqrt(2 pi k) e^{-k} at k = |cX|).
pub const CLEARANCE: f64 = 48.0;

/// Clearance in time units needed below the earliest center (above the
/// latest) for probe frequency `mu` against bandlimit `omega_max`:
/// the slowest exponential in the reduction is `mu - omega_max`.
pub fn required_clearance(bandlimit: f64, mu: f64) -> f64 {
    let c_slow = (mu.abs() - bandlimit).abs().min(mu.abs() + bandlimit);
    if c_slow <= 0.0 {
        f64::INFINITY
    } else {
        CLEARANCE / c_slow
    }
}

/// Asymptotic value of `int_{-inf}^{X} exp(i c v)/v dv` for `X < 0`,
/// `|c X| >= CLEARANCE`. Returns the value and a remainder bound.
fn exp_over_v_lower(c: f64, x: f64) -> (Complex64, f64) {
    debug_assert!(x < 0.0);
    // repeated integration by parts:
    //   int_{-inf}^{X} e^{icv}/v dv = e^{icX} sum_{k>=1} (k-1)! / (icX)^k
    let icx = Complex64::new(0.0, c * x);
    let mut term = 1.0 / icx;
    let mut sum = term;
    let mut k = 1.0;
    let bound;
    loop {
        let next = term * k / icx;
        if next.norm() >= term.norm() {
            bound = next.norm();
            break;
        }
        sum += next;
        if next.norm() < 1e-19 * sum.norm().max(1e-300) || k > 80.0 {
            bound = next.norm();
            break;
        }
        term = next;
        k += 1.0;
    }
    let phase = Complex64::new(0.0, c * x).exp();
    (phase * sum, bound)
}

/// `int_{-inf}^{X} J(t) exp(i mu t) dt` for a sinc expansion `J`, valid when
/// `X` clears every center by [`required_clearance`].
///
/// Returns the tail value and an error bound from the truncated series.
pub fn lower_tail(j: &SincExpansion, mu: f64, x: f64) -> (Complex64, f64) {
    let omega = j.bandlimit();
    let cp = mu + omega;
    let cm = mu - omega;
    let mut total = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    // sin(W u) e^{i mu u} / (pi u) = [e^{i cp u} - e^{i cm u}] / (2 i pi u)
    let denom = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    for (&ti, &bi) in j.centers().iter().zip(j.weights().iter()) {
        let u = x - ti;
        let (ip, ep) = exp_over_v_lower(cp, u);
        let (im, em) = exp_over_v_lower(cm, u);
        let phase = Complex64::new(0.0, mu * ti).exp();
        total += phase * (ip - im) / denom * bi;
        bound += (ep + em) * bi.abs() / (2.0 * std::f64::consts::PI);
    }
    (total, bound)
}

/// `int_{X}^{inf} J(t) exp(i mu t) dt`, by reflection of the lower tail.
pub fn upper_tail(j: &SincExpansion, mu: f64, x: f64) -> (Complex64, f64) {
    // substitute t -> -t: int_X^inf J(t) e^{i mu t} dt
    //   = int_{-inf}^{-X} J(-u) e^{-i mu u} du, and J(-u) is the expansion
    //   with mirrored centers and the same weights.
    let mirrored = SincExpansion::raw(
        j.bandlimit(),
        j.centers().iter().map(|t| -t).collect(),
        j.weights().to_vec(),
    );
    lower_tail(&mirrored, -mu, -x)
}
