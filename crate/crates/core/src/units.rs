//! Atomic-unit constants and laboratory conversions.

/// Speed of light in atomic units.
pub const C_AU: f64 = 137.035999;

/// Intensity corresponding to unit field amplitude, W/cm².
pub const INTENSITY_AU: f64 = 3.50945e16;

/// One Hartree in eV.
pub const HARTREE_EV: f64 = 27.211386245988;

/// Bohr radius in nm.
pub const BOHR_NM: f64 = 0.0529177210903;

/// Charge of the active electron.
pub const ELECTRON_CHARGE: f64 = -1.0;

/// Angular frequency (a.u.) of light with the given vacuum wavelength.
pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_AU * BOHR_NM / wavelength_nm
}

/// Peak field (a.u.) for a cycle-averaged intensity in W/cm².
pub fn field_from_intensity(intensity_w_cm2: f64) -> f64 {
    (intensity_w_cm2 / INTENSITY_AU).sqrt()
}

pub fn ev_to_au(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn au_to_ev(au: f64) -> f64 {
    au * HARTREE_EV
}
