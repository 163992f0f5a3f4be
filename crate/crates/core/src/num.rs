//! Thin math shims over `libm` so the crate builds without `std`.

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// x * log2(x) with the 0 log 0 = 0 convention.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * libm::log2(x)
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy_bits(pmf: &[f64]) -> f64 {
    -pmf.iter().map(|&p| xlog2x(p)).sum::<f64>()
}
