//! Quadrature and root-finding helpers shared by the measures.

use crate::error::{Error, Result};

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64, panels: usize) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a)? + f(b)?;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Simpson value together with a Richardson error estimate from a
/// half-step refinement.
pub fn simpson_checked(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<(f64, f64)> {
    let coarse = simpson(f, a, b, panels)?;
    let fine = simpson(f, a, b, 2 * panels.max(2).next_multiple_of(2))?;
    Ok((fine, (fine - coarse).abs() / 15.0))
}

/// Bisection on a sign change of `f` over [lo, hi].
///
/// Runs until the bracket cannot shrink further or `max_iter` is reached;
/// errors if the endpoints do not bracket a sign change.
pub fn bisect(
    f: &mut impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootBracket { lo, hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let mut f = |x: f64| Ok(x * x * x);
        let v = simpson(&mut f, 0.0, 2.0, 10).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_exp_converges() {
        let mut f = |x: f64| Ok((-x).exp());
        let (v, err) = simpson_checked(&mut f, 0.0, 5.0, 100).unwrap();
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-9);
        assert!(err < 1e-9);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let mut f = |x: f64| Ok(x * x - 2.0);
        let r = bisect(&mut f, 0.0, 2.0, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_missing_sign_change() {
        let mut f = |x: f64| Ok(x * x + 1.0);
        assert!(matches!(bisect(&mut f, 0.0, 1.0, 50), Err(Error::RootBracket { .. })));
    }
}
