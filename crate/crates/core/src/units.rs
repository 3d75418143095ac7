//! Physical constants and unit conversions.
//!
//! Energies, frequencies and linewidths are carried in wavenumbers (cm^-1)
//! with hbar = 1. SI only appears in the geometry-derived coupling.

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant in J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant in J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_818_8e-12;
/// One Debye in C m.
pub const DEBYE: f64 = 3.335_640_951_981_52e-30;

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Energy in joules of one wavenumber quantum.
pub fn wavenumber_to_joule(wavenumber: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT * wavenumber * 100.0
}

pub fn joule_to_wavenumber(energy: f64) -> f64 {
    energy / (PLANCK * SPEED_OF_LIGHT * 100.0)
}

/// Converts a delay in femtoseconds to the reduced time `2 pi c t` (in cm),
/// so that `omega[cm^-1] * tau` is a phase in radians.
pub fn fs_to_reduced_time(t_fs: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_FS * t_fs
}

pub fn reduced_time_to_fs(tau: f64) -> f64 {
    tau / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_FS)
}
