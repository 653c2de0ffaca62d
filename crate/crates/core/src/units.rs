//! Decibel conversions. Every dB/linear hop in the crate goes through here.

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}

/// Shannon rate `bandwidth * log2(1 + sinr)` in bit/s.
#[inline]
pub fn shannon_rate(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2
}
