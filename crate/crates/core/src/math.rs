//! Thin wrappers over `libm` so numerics are identical with or without `std`.

use core::f64::consts::PI;

use crate::linalg::C64;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}

#[inline]
pub(crate) fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Phase angle in `[0, 2π)`; angles within `1e-9` of `2π` wrap to zero.
pub(crate) fn angle_0_2pi(z: C64) -> f64 {
    let mut a = libm::atan2(z.im, z.re);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    if a > 2.0 * PI - 1e-9 {
        a = 0.0;
    }
    a
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}
