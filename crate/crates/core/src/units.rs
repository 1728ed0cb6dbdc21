//! Physical constants and unit conversions.

/// Standard gravitational acceleration, m/s².
pub const G0: f64 = 9.80665;

pub const FT_TO_M: f64 = 0.3048;
pub const KT_TO_M_S: f64 = 1852.0 / 3600.0;

pub fn ft(value: f64) -> f64 {
    value * FT_TO_M
}

pub fn kt(value: f64) -> f64 {
    value * KT_TO_M_S
}

pub fn to_ft(m: f64) -> f64 {
    m / FT_TO_M
}

pub fn to_kt(m_s: f64) -> f64 {
    m_s / KT_TO_M_S
}
