//! Physical constants (CODATA 2018, SI) and input unit conversions.

use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// One debye in C·m.
pub const DEBYE: f64 = 3.335_640_95e-30;

/// Spectroscopic wavenumber in cm⁻¹ to angular wavenumber in m⁻¹.
pub fn angular_wavenumber_from_cm(nu_tilde_cm: f64) -> f64 {
    2.0 * PI * nu_tilde_cm * 100.0
}

/// Angular frequency (rad/s) of a transition given in cm⁻¹.
pub fn omega_from_cm(nu_tilde_cm: f64) -> f64 {
    C * angular_wavenumber_from_cm(nu_tilde_cm)
}

pub fn debye_to_si(mu_debye: f64) -> f64 {
    mu_debye * DEBYE
}

pub fn um_to_m(r_um: f64) -> f64 {
    r_um * 1e-6
}

pub fn ps_to_s(t_ps: f64) -> f64 {
    t_ps * 1e-12
}

/// Linewidth in Hz (FWHM of the line in ordinary frequency) to rad/s.
pub fn gamma_from_hz(gamma_hz: f64) -> f64 {
    2.0 * PI * gamma_hz
}

/// `1/(4πε₀)²`, the coupling constant squared.
pub fn coulomb_sq() -> f64 {
    let k = 1.0 / (4.0 * PI * EPS0);
    k * k
}
