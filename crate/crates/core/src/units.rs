//! Unit helpers. Frequencies are stored as angular frequencies in rad/s and
//! times in seconds throughout the crate.

use std::f64::consts::TAU;

/// `2 pi x 10^6 x f` rad/s for a frequency `f` given in MHz.
pub fn mhz_2pi(f: f64) -> f64 {
    TAU * f * 1e6
}

/// `2 pi x 10^9 x f` rad/s for a frequency `f` given in GHz.
pub fn ghz_2pi(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!((mhz_2pi(10.0) - 6.283185307179586e7).abs() < 1e-3);
        assert!((ghz_2pi(1.0) - mhz_2pi(1000.0)).abs() < 1e-6);
        assert!((ns(618.0) - 6.18e-7).abs() < 1e-21);
        assert!((us(16.0) - 1.6e-5).abs() < 1e-20);
    }
}
