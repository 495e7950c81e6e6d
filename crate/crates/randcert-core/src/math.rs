// Thin wrappers so call sites read like std float methods under no_std.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub const SQRT2: f64 = core::f64::consts::SQRT_2;
pub const PI: f64 = core::f64::consts::PI;
