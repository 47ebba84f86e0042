//! Boundary unit conversions. Files use kHz (`f = ω/2π`) and µs; the
//! simulation works in rad/s and s.

use std::f64::consts::PI;

pub fn khz_to_rad_s(khz: f64) -> f64 {
    2.0 * PI * 1e3 * khz
}

pub fn rad_s_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

pub fn us_to_s(us: f64) -> f64 {
    us * 1e-6
}

pub fn s_to_us(s: f64) -> f64 {
    s * 1e6
}

pub fn ns_to_s(ns: f64) -> f64 {
    ns * 1e-9
}

pub fn s_to_ns(s: f64) -> f64 {
    s * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert!((khz_to_rad_s(2.0) - 12_566.370_614_359_172).abs() < 1e-9);
        assert_eq!(us_to_s(62.5), 62.5e-6);
    }

    proptest! {
        #[test]
        fn roundtrips(x in -1e6f64..1e6) {
            prop_assert!((rad_s_to_khz(khz_to_rad_s(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
            prop_assert!((s_to_us(us_to_s(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
            prop_assert!((s_to_ns(ns_to_s(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
