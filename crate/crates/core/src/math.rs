//! Thin wrappers over `libm` so the numerics do not depend on `std`.

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    // Repeated squaring; exact for the small exponents used here.
    let mut base = x;
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// `|x|^p`, using integer powers when `p` is integral.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    if p == libm::trunc(p) && p.abs() <= 64.0 {
        powi(a, p as i32)
    } else {
        libm::pow(a, p)
    }
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub const PI: f64 = core::f64::consts::PI;

/// Surface measure of the unit sphere `S^{d-1} ⊂ ℝ^d` (2 for d = 1).
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn integer_powers_match_pow() {
        for &x in &[0.3, 1.7, -2.5] {
            for n in 0..9 {
                let a = abs_pow(x, n as f64);
                let b = libm::pow(libm::fabs(x), n as f64);
                assert!((a - b).abs() <= 1e-14 * b.max(1.0));
            }
        }
        assert_eq!(abs_pow(0.0, 2.0), 0.0);
        assert!((abs_pow(2.0, 1.5) - libm::pow(2.0, 1.5)).abs() < 1e-15);
    }
}
