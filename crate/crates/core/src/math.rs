//! Float helpers for `no_std` builds, plus decibel conversions.
//!
//! Everything in the crate stores power in watts. Decibel values only show
//! up at the edges (path-loss models, parameter files, reports).

pub use core::f64::consts::{LN_10, LOG10_E, PI};

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
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Ratio in dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    powf(10.0, db / 10.0)
}

/// Linear ratio to dB. Non-positive inputs map to `-inf`.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * log10(x)
    }
}

/// dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Watts to dBm.
#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}
