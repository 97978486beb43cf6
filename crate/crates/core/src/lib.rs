//! Synthesis of bandlimited superoscillating signals and simulation of the
//! oscillators and discrete-level systems they drive.
//!
//! The crate is organized around one signal carrier, [`signal::SincExpansion`]:
//! a minimum-norm bandlimited interpolant built by [`signal::solve_min_norm`].
//! Everything downstream consumes it:
//!
//! * [`response`] — running (partial) Fourier transforms `S_w(t)` and the
//!   asymptotic excitation they converge to;
//! * [`nlevel`] — first-order and exact integration of driven discrete-level
//!   systems;
//! * [`harmonic`] — closed-form observables of the driven harmonic
//!   oscillator;
//! * [`anharmonic`] — quartic oscillator: classical perturbative response and
//!   truncated-matrix spectra;
//! * [`dispersive`] — fourth-order (two-resonance) oscillator;
//! * [`parametric`] — time-dependent frequency, mode functions, Bogoliubov
//!   coefficients, resonance scans;
//! * [`sweep`] — manifest- driven experiment dispatch and parameter sweeps.
//!
//! Scans and sweeps run in parallel with the `parallel` feature (default) and
//! aggregate deterministically in grid order either way.

pub mod anharmonic;
pub mod dd;
pub mod dispersive;
pub mod error;
pub mod exec;
pub mod grid;
pub mod harmonic;
pub mod nlevel;
pub mod ode;
pub mod parametric;
pub mod quad;
pub mod response;
pub mod signal;
pub mod tails;

pub use error::{Error, Result};
