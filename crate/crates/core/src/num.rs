//! Small numerical utilities: compensated summation, bracketed root finding,
//! Richardson-extrapolated finite differences.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum a slice with compensation, in slice order.
pub fn csum(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Outcome of a bracketed root solve.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub x: f64,
    pub fx: f64,
    pub evals: usize,
}

/// Find a zero of `f` on `[lo, hi]` assuming `f(lo)` and `f(hi)` have opposite
/// signs. Secant steps accelerated inside a bisection safeguard; stops when
/// `|f| <= tol_f` or the bracket shrinks below `tol_x`.
pub fn secant_bisection<F: FnMut(f64) -> crate::error::Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    tol_f: f64,
    tol_x: f64,
    max_iter: usize,
) -> crate::error::Result<RootResult> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f_lo, f_hi);
    let mut evals = 0usize;
    if fa == 0.0 {
        return Ok(RootResult { x: a, fx: fa, evals });
    }
    if fb == 0.0 {
        return Ok(RootResult { x: b, fx: fb, evals });
    }
    if fa.signum() == fb.signum() {
        return Err(crate::error::Error::Bracketing(format!(
            "no sign change on [{a}, {b}]: f = [{fa}, {fb}]"
        )));
    }
    let mut x = a;
    let mut fx = fa;
    for _ in 0..max_iter {
        // secant candidate, fall back to midpoint when degenerate or outside
        let mut c = b - fb * (b - a) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        evals += 1;
        x = c;
        fx = fc;
        if fc.abs() <= tol_f || (b - a).abs() <= tol_x {
            return Ok(RootResult { x, fx, evals });
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
    }
    if fx.abs() <= tol_f * 10.0 {
        return Ok(RootResult { x, fx, evals });
    }
    Err(crate::error::Error::NonConvergent(format!(
        "root solve stalled at x = {x}, f = {fx} after {evals} evaluations"
    )))
}

/// First derivative by central differences with one Richardson level:
/// (4 D(h/2) - D(h)) / 3 where D(h) = (f(h) - f(-h)) / 2h.
pub fn richardson_d1<F: FnMut(f64) -> crate::error::Result<f64>>(
    mut f: F,
    h: f64,
) -> crate::error::Result<f64> {
    let d = |fp: f64, fm: f64, h: f64| (fp - fm) / (2.0 * h);
    let d_h = d(f(h)?, f(-h)?, h);
    let d_h2 = d(f(h / 2.0)?, f(-h / 2.0)?, h / 2.0);
    Ok((4.0 * d_h2 - d_h) / 3.0)
}

/// Second derivative by central differences with one Richardson level.
pub fn richardson_d2<F: FnMut(f64) -> crate::error::Result<f64>>(
    mut f: F,
    h: f64,
) -> crate::error::Result<f64> {
    let f0 = f(0.0)?;
    let d2 = |fp: f64, fm: f64, h: f64| (fp - 2.0 * f0 + fm) / (h * h);
    let a = d2(f(h)?, f(-h)?, h);
    let b = d2(f(h / 2.0)?, f(-h / 2.0)?, h / 2.0);
    Ok((4.0 * b - a) / 3.0)
}

/// Plain second central difference (no extrapolation).
pub fn central_d2<F: FnMut(f64) -> crate::error::Result<f64>>(
    mut f: F,
    h: f64,
) -> crate::error::Result<f64> {
    let f0 = f(0.0)?;
    Ok((f(h)? - 2.0 * f0 + f(-h)?) / (h * h))
}

/// Least-squares slope of y against x.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = csum(xs) / n;
    let my = csum(ys) / n;
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (&x, &y) in xs.iter().zip(ys) {
        num.add((x - mx) * (y - my));
        den.add((x - mx) * (x - mx));
    }
    num.value() / den.value()
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_handles_cancellation() {
        let xs = [1e16, 1.0, -1e16];
        assert_eq!(csum(&xs), 1.0);
    }

    #[test]
    fn root_finder_on_cubic() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = secant_bisection(f, 0.0, 2.0, -2.0, 6.0, 1e-14, 0.0, 100).unwrap();
        assert!((r.x - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn richardson_derivatives() {
        let f = |t: f64| Ok((2.0 * t).sin());
        let d1 = richardson_d1(f, 1e-2).unwrap();
        assert!((d1 - 2.0).abs() < 1e-9);
        let d2 = richardson_d2(f, 1e-2).unwrap();
        assert!(d2.abs() < 1e-7);
    }

    #[test]
    fn slope_of_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((ls_slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lcm_gcd() {
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(lcm(1, 7), 7);
    }
}
