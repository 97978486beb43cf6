//! Composite Gauss–Legendre quadrature with incremental accumulation.
//!
//! Oscillatory running integrals (partial Fourier transforms, retarded Green
//! convolutions, phase integrals) are all built on the same panel walk: fixed
//! 16-point panels no wider than a fraction of the shortest oscillation
//! period, an embedded 8-point error estimate, and bisection when a panel
//! misses its share of the tolerance. The walk exposes cumulative values of
//! the primary integral at every interior node so that nested integrals
//! (whose integrands depend on the running integral itself) can be formed in
//! the same pass.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const GL8_X: [f64; 8] = [
    -0.9602898564975362,
    -0.7966664774136267,
    -0.525532409916329,
    -0.18343464249564978,
    0.18343464249564978,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975362,
];
pub(crate) const GL8_W: [f64; 8] = [
    0.10122853629037626,
    0.22238103445337448,
    0.31370664587788727,
    0.362683783378362,
    0.362683783378362,
    0.31370664587788727,
    0.22238103445337448,
    0.10122853629037626,
];
pub(crate) const GL16_X: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.755404408355003,
    -0.6178762444026438,
    -0.45801677765722737,
    -0.2816035507792589,
    -0.09501250983763744,
    0.09501250983763744,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
pub(crate) const GL16_W: [f64; 16] = [
    0.027152459411754096,
    0.062253523938647894,
    0.09515851168249279,
    0.12462897125553388,
    0.14959598881657674,
    0.16915651939500254,
    0.18260341504492358,
    0.1894506104550685,
    0.1894506104550685,
    0.18260341504492358,
    0.16915651939500254,
    0.14959598881657674,
    0.12462897125553388,
    0.09515851168249279,
    0.062253523938647894,
    0.027152459411754096,
];

/// 8-point Gauss–Legendre rule on [a, b].
pub fn gl8<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        s += f(c + h * x) * *w;
    }
    s * h
}

/// 16-point Gauss–Legendre rule on [a, b].
pub fn gl16<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in GL16_X.iter().zip(GL16_W.iter()) {
        s += f(c + h * x) * *w;
    }
    s * h
}

/// Adaptive integral of `f` over [a, b] to absolute tolerance `tol`.
///
/// Returns the value and the final error estimate.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    fn rec<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> Result<(Complex64, f64)> {
        let coarse = gl8(f, a, b);
        let fine = gl16(f, a, b);
        let est = (fine - coarse).norm();
        if est <= tol || est <= 1e-17 * fine.norm() {
            return Ok((fine, est));
        }
        if depth == 0 {
            return Err(Error::TolUnachievable { a, b, tol, err: est });
        }
        let m = 0.5 * (a + b);
        let (l, el) = rec(f, a, m, 0.5 * tol, depth - 1)?;
        let (r, er) = rec(f, m, b, 0.5 * tol, depth - 1)?;
        Ok((l + r, el + er))
    }
    rec(f, a, b, tol, 48)
}

/// Cumulative panel walk over [a, b].
///
/// The primary integrand `f` is accumulated panel by panel. `visit` is called
/// at every 16-point node of every final (post-refinement) panel with the
/// node position, `f` at the node, the cumulative primary integral from the
/// walk origin up to that node (including `start`), and the node's quadrature
/// weight already scaled by the panel Jacobian; summing
/// `weight * g(node, ...)` over all calls therefore integrates a secondary
/// integrand `g` over [a, b] with the same rule.
///
/// Returns the cumulative primary integral at `b` and the accumulated error
/// estimate.
pub(crate) fn cumulative_walk<F, V>(
    f: &F,
    a: f64,
    b: f64,
    h_max: f64,
    tol_per_len: f64,
    start: Complex64,
    visit: &mut V,
) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64,
    V: FnMut(f64, Complex64, Complex64, f64),
{
    assert!(h_max > 0.0, "panel width must be positive");
    if b <= a {
        return Ok((start, 0.0));
    }
    let n_panels = ((b - a) / h_max).ceil().max(1.0) as usize;
    let width = (b - a) / n_panels as f64;
    let mut acc = start;
    let mut err = 0.0;
    for p in 0..n_panels {
        let pa = a + width * p as f64;
        let pb = if p + 1 == n_panels { b } else { pa + width };
        panel(f, pa, pb, tol_per_len * (pb - pa), 30, &mut acc, &mut err, visit)?;
    }
    Ok((acc, err))
}

fn panel<F, V>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    acc: &mut Complex64,
    err: &mut f64,
    visit: &mut V,
) -> Result<()>
where
    F: Fn(f64) -> Complex64,
    V: FnMut(f64, Complex64, Complex64, f64),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes: Vec<f64> = GL16_X.iter().map(|x| c + h * x).collect();
    let fvals: Vec<Complex64> = nodes.iter().map(|&x| f(x)).collect();

    // cumulative integral at each node from GL8 slivers between nodes
    let mut prefix = [Complex64::new(0.0, 0.0); 16];
    let mut run = Complex64::new(0.0, 0.0);
    let mut left = a;
    for j in 0..16 {
        run += gl8(f, left, nodes[j]);
        prefix[j] = run;
        left = nodes[j];
    }
    let total = run + gl8(f, left, b);

    // whole-panel value from the 16-point rule, for the error estimate
    let mut whole = Complex64::new(0.0, 0.0);
    for (fv, w) in fvals.iter().zip(GL16_W.iter()) {
        whole += fv * *w;
    }
    whole *= h;

    let est = (total - whole).norm();
    // refining below the f64 noise of the evaluated integrand is futile:
    // `scale` is the panel's L1 magnitude, whose rounding the two rules
    // cannot agree past
    let scale = fvals.iter().map(|v| v.norm()).fold(0.0f64, f64::max) * (b - a);
    if est > tol && est > 32.0 * f64::EPSILON * scale {
        if depth == 0 {
            return Err(Error::TolUnachievable { a, b, tol, err: est });
        }
        panel(f, a, c, 0.5 * tol, depth - 1, acc, err, visit)?;
        panel(f, c, b, 0.5 * tol, depth - 1, acc, err, visit)?;
        return Ok(());
    }

    for j in 0..16 {
        visit(nodes[j], fvals[j], *acc + prefix[j], GL16_W[j] * h);
    }
    *acc += total;
    *err += est;
    Ok(())
}
