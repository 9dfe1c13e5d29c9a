//! Complex helpers that avoid cancellation near zero.

use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// e^z − 1.
pub fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        return z * (1.0 + z * (0.5 + z / 6.0));
    }
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    let half = (0.5 * z.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

/// e^z − 1 − z.
pub fn expm1_minus_z(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 0.25 {
        // Σ_{k=2}^{20} z^k/k!; the dropped tail is below 0.5²¹/21! ≈ 1e-26
        let mut acc = Complex64::new(INV_FACT[20], 0.0);
        for k in (2..20).rev() {
            acc = acc * z + INV_FACT[k];
        }
        acc * z * z
    } else {
        expm1(z) - z
    }
}

const INV_FACT: [f64; 21] = {
    let mut t = [1.0; 21];
    let mut k = 1;
    while k < 21 {
        t[k] = t[k - 1] / k as f64;
        k += 1;
    }
    t
};

/// (e^z − 1)/z, equal to 1 at z = 0.
pub fn expm1_over_z(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        expm1(z) / z
    }
}

/// Relative L2 distance ‖a − b‖ / ‖b‖.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Relative L2 distance for real sequences.
pub fn relative_l2_real(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
