//! Physical constants and the unit conversions used at the configuration
//! boundary. Everything past the config layer is SI with angular
//! frequencies in rad/s.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// One Debye in C·m.
pub const DEBYE: f64 = 3.335_640_952e-30;

/// Reduced Planck constant in erg·s (Gaussian units).
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// One Debye in statC·cm (Gaussian units).
pub const DEBYE_CGS: f64 = 1e-18;

pub fn mhz_to_rad_per_s(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

pub fn thz_to_rad_per_s(thz: f64) -> f64 {
    2.0 * PI * thz * 1e12
}

pub fn per_cm3_to_per_m3(n: f64) -> f64 {
    n * 1e6
}

pub fn cm_to_m(x: f64) -> f64 {
    x * 1e-2
}

pub fn um_to_m(x: f64) -> f64 {
    x * 1e-6
}

pub fn fs_to_s(t: f64) -> f64 {
    t * 1e-15
}

pub fn ps_to_s(t: f64) -> f64 {
    t * 1e-12
}

pub fn debye_to_si(d: f64) -> f64 {
    d * DEBYE
}

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
pub fn wavelength_to_angular(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
pub fn angular_to_wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}
