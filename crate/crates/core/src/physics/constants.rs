use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// ħc in eV·nm (CODATA 2018, 10 significant digits).
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;
/// Electron rest energy m·c² in eV (CODATA 2018).
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.95;
/// ħ in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Speed of light in nm/s (exact).
pub const LIGHT_SPEED_NM_S: f64 = 2.997_924_58e17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants<T = f64> {
    /// eV·nm
    pub hbar_c: T,
    /// eV·nm; derived as 2π·ħc so the pair is exactly consistent.
    pub h_c: T,
    /// eV
    pub electron_rest_energy: T,
    /// eV·s
    pub hbar: T,
    /// nm/s
    pub light_speed: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        let hbar_c = T::lit(HBAR_C_EV_NM);
        Self {
            hbar_c,
            h_c: T::TAU() * hbar_c,
            electron_rest_energy: T::lit(ELECTRON_REST_ENERGY_EV),
            hbar: T::lit(HBAR_EV_S),
            light_speed: T::lit(LIGHT_SPEED_NM_S),
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}
