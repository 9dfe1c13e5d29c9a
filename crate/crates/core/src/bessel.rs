//! Bessel functions of the first kind for integer order.
//!
//! Ascending power series for |x| < 12, Miller's downward recurrence
//! normalised with the sum rule J₀ + 2ΣJ₂ₖ = 1 otherwise.

use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Largest |x| accepted.
pub const MAX_ARGUMENT: f64 = 1.0e3;

const SERIES_LIMIT: f64 = 12.0;

/// J_n(x) for n ≥ 0.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(bessel_j_unchecked(n, x))
}

/// J_n(x) for any integer order, using J₋ₙ = (−1)ⁿ Jₙ.
pub fn bessel_j_signed(n: i32, x: f64) -> Result<f64> {
    let v = bessel_j(n.unsigned_abs(), x)?;
    Ok(if n < 0 && n % 2 != 0 { -v } else { v })
}

/// J₀(x) … J_nmax(x) in one pass.
pub fn bessel_j_all(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    if x.abs() < SERIES_LIMIT {
        Ok((0..=nmax).map(|n| series(n, x)).collect())
    } else {
        Ok(miller(nmax, x))
    }
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return domain(format!("Bessel argument {x} outside supported range |x| <= {MAX_ARGUMENT}"));
    }
    Ok(())
}

pub(crate) fn bessel_j_unchecked(n: u32, x: f64) -> f64 {
    if x.abs() < SERIES_LIMIT {
        series(n, x)
    } else {
        miller(n, x)[n as usize]
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2.0 {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn miller(nmax: u32, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let top = (nmax as f64).max(ax);
    let mut m = (top + 30.0 + 12.0 * top.sqrt()) as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut vals = vec![0.0f64; m + 2];
    vals[m] = 1e-300;
    let two_over_x = 2.0 / ax;
    for k in (1..=m).rev() {
        let prev = k as f64 * two_over_x * vals[k] - vals[k + 1];
        vals[k - 1] = prev;
        if prev.abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=m).step_by(2) {
        norm += 2.0 * vals[k];
    }
    let sign_flip = x < 0.0;
    vals.truncate(nmax as usize + 1);
    for (n, v) in vals.iter_mut().enumerate() {
        *v /= norm;
        if sign_flip && n % 2 == 1 {
            *v = -*v;
        }
    }
    vals.resize(nmax as usize + 1, 0.0);
    vals
}

/// Smallest positive zero of J₀ (≈ 2.404 825 557 695 773).
pub fn first_j0_zero() -> f64 {
    static ZERO: OnceLock<f64> = OnceLock::new();
    *ZERO.get_or_init(|| {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series(0, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        // Newton polish, J₀' = −J₁.
        let mut z = 0.5 * (lo + hi);
        for _ in 0..3 {
            let j1 = series(1, z);
            if j1 != 0.0 {
                z += series(0, z) / j1;
            }
        }
        z
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an arbitrary-precision evaluation (mpmath, 30 digits).
    const REFERENCE: &[(u32, f64, f64)] = &[
        (0, 1.0, 0.765_197_686_557_966_55),
        (1, 1.0, 0.440_050_585_744_933_52),
        (1, 2.404_825_557_695_773, 0.519_147_497_289_466_74),
        (2, 2.404_825_557_695_773, 0.431_754_807_019_680_4),
        (5, 2.404_825_557_695_773, 0.016_389_243_204_805_856),
        (0, 11.9, 0.025_049_441_699_589_564),
        (3, 11.9, 0.207_627_276_056_981_94),
        (0, 12.5, 0.146_884_054_700_421_1),
        (7, 30.0, 0.145_185_189_572_328_27),
        (0, 100.0, 0.019_985_850_304_223_122),
        (40, 100.0, 0.072_701_754_822_811_057),
        (10, 999.0, -0.018_264_465_220_371_155),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, x, want) in REFERENCE {
            let got = bessel_j(n, x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sum_rule() {
        let p = 2.0;
        let mut s = 0.0;
        for n in -40..=40 {
            let j = bessel_j_signed(n, p).unwrap();
            s += j * j;
        }
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn first_zero() {
        // Independent bisection on the Miller path rather than the series.
        let (mut lo, mut hi) = (2.0f64, 3.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if miller(0, mid)[0] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = first_j0_zero();
        assert!((z - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!((z - 2.404_825_557_695_773).abs() < 1e-14);
        assert!(bessel_j(0, z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(bessel_j(0, 1.0e4).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
    }

    #[test]
    fn negative_order_and_argument() {
        let x = 3.7;
        assert!((bessel_j_signed(-3, x).unwrap() + bessel_j(3, x).unwrap()).abs() < 1e-15);
        assert!((bessel_j(3, -x).unwrap() + bessel_j(3, x).unwrap()).abs() < 1e-14);
        assert!((bessel_j(3, -20.0).unwrap() + bessel_j(3, 20.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn series_and_recurrence_agree_at_seam() {
        for &x in &[8.0, 10.0, 11.5, 11.99] {
            let m = miller(10, x);
            for n in 0..=10u32 {
                assert!((series(n, x) - m[n as usize]).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn all_orders_match_single() {
        for &x in &[0.3, 2.4, 15.0, -17.0] {
            let all = bessel_j_all(12, x).unwrap();
            for n in 0..=12u32 {
                assert!((all[n as usize] - bessel_j(n, x).unwrap()).abs() < 1e-14);
            }
        }
    }
}
