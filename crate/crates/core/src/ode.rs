//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) with
//! continuous dense output, for complex vector states.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::check_monotone;

type State = DVector<Complex64>;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..OdeOptions::default()
        }
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `y' = rhs(t, y)` from `(t0, y0)` and sample the dense solution
/// at every grid point (all grid points must satisfy `t >= t0`).
pub fn integrate_dense<F>(
    rhs: &F,
    t0: f64,
    y0: State,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<State>>
where
    F: Fn(f64, &State) -> State,
{
    check_monotone(grid)?;
    if grid[0] < t0 {
        return Err(Error::ValidationFailed {
            path: "grid".into(),
            message: "grid begins before t0".into(),
        });
    }
    let t_end = *grid.last().unwrap();
    let dim = y0.len();
    let mut out: Vec<State> = Vec::with_capacity(grid.len());
    let mut next_output = 0;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);

    // emit any grid points sitting exactly at the start
    while next_output < grid.len() && grid[next_output] <= t {
        out.push(y.clone());
        next_output += 1;
    }
    if next_output >= grid.len() {
        return Ok(out);
    }

    let mut h = initial_step(rhs, t, &y, &k1, opts).min(opts.h_max).min(t_end - t);
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        steps += 1;
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        let mut k = [
            k1.clone(),
            State::zeros(dim),
            State::zeros(dim),
            State::zeros(dim),
            State::zeros(dim),
            State::zeros(dim),
            State::zeros(dim),
        ];
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().take(s).enumerate() {
                let a = A[s - 1][j];
                if a != 0.0 {
                    ys += kj * Complex64::new(a * h, 0.0);
                }
            }
            k[s] = rhs(t + C[s] * h, &ys);
        }
        // stage 7 is evaluated at (t + h, y1), so k[6] doubles as FSAL
        let y1 = {
            let mut ys = y.clone();
            for (j, kj) in k.iter().take(6).enumerate() {
                let a = A[5][j];
                if a != 0.0 {
                    ys += kj * Complex64::new(a * h, 0.0);
                }
            }
            ys
        };
        // re-evaluate stage 7 at the actual y1 (A row 6 equals b, so ys == y1)
        let err_norm = {
            let mut err = State::zeros(dim);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    err += kj * Complex64::new(E[j] * h, 0.0);
                }
            }
            let mut acc = 0.0;
            for i in 0..dim {
                let sc = opts.atol + opts.rtol * y[i].norm().max(y1[i].norm());
                let r = err[i].norm() / sc;
                acc += r * r;
            }
            (acc / dim as f64).sqrt()
        };

        if err_norm <= 1.0 {
            // dense output over (t, t+h]
            let k7 = k[6].clone();
            while next_output < grid.len() && grid[next_output] <= t + h {
                let theta = (grid[next_output] - t) / h;
                out.push(interpolate(&y, &y1, &k, h, theta));
                next_output += 1;
            }
            t += h;
            y = y1;
            k1 = k7;
            if next_output >= grid.len() {
                break;
            }
        }

        let scale = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * scale).min(opts.h_max);
    }

    while next_output < grid.len() {
        out.push(y.clone());
        next_output += 1;
    }
    Ok(out)
}

fn interpolate(y0: &State, y1: &State, k: &[State; 7], h: f64, theta: f64) -> State {
    let ydiff = y1 - y0;
    let bspl = &k[0] * Complex64::new(h, 0.0) - &ydiff;
    let mut dsum = State::zeros(y0.len());
    for (j, kj) in k.iter().enumerate() {
        if D[j] != 0.0 {
            dsum += kj * Complex64::new(D[j] * h, 0.0);
        }
    }
    let rcont4 = &ydiff - &k[6] * Complex64::new(h, 0.0) - &bspl;
    let t1 = 1.0 - theta;
    // y0 + theta*(ydiff + t1*(bspl + theta*(rcont4 + t1*dsum)))
    let inner3 = rcont4 + dsum * Complex64::new(t1, 0.0);
    let inner2 = bspl + inner3 * Complex64::new(theta, 0.0);
    let inner1 = ydiff + inner2 * Complex64::new(t1, 0.0);
    y0 + inner1 * Complex64::new(theta, 0.0)
}

fn initial_step<F>(rhs: &F, t0: f64, y0: &State, f0: &State, opts: &OdeOptions) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let dim = y0.len();
    let sc = |y: &State, i: usize| opts.atol + opts.rtol * y[i].norm();
    let d0: f64 = (0..dim)
        .map(|i| (y0[i].norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt();
    let d1: f64 = (0..dim)
        .map(|i| (f0[i].norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = y0 + f0 * Complex64::new(h0, 0.0);
    let f1 = rhs(t0 + h0, &y1);
    let d2: f64 = (0..dim)
        .map(|i| ((f1[i] - f0[i]).norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
