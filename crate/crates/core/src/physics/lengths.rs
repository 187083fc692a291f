use serde::{Deserialize, Serialize};

use super::beam::{wavelength_shift, BeamState};
use super::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::units::{ElectronVolts, EvNm, Nanometers, Radians, Seconds};

/// Which wavelength difference enters the self-coherence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LambdaConvention {
    /// Δλ from the beam's own dispersion, λ(E − ΔE) − λ(E).
    #[default]
    ElectronDispersion,
    /// Δλ = hc/ΔE, the wavelength of a virtual photon carrying ΔE.
    VirtualPhoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceQuery<T = f64> {
    pub delta_e: ElectronVolts<T>,
    pub delta_phi: Radians<T>,
    pub lambda_convention: LambdaConvention,
}

impl<T: Real> CoherenceQuery<T> {
    pub fn new(delta_e: ElectronVolts<T>, delta_phi: Radians<T>, lambda_convention: LambdaConvention) -> Result<Self> {
        check_positive("delta_e", delta_e.value())?;
        let phi = delta_phi.value();
        if !(phi >= T::zero()) || !phi.is_finite() {
            return Err(domain("delta_phi", format!("{phi} rad must be non-negative")));
        }
        Ok(Self {
            delta_e,
            delta_phi,
            lambda_convention,
        })
    }
}

fn check_positive<T: Real>(what: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, format!("{v} must be positive and finite")))
    }
}

/// Self-coherence length of two partial waves separated by Δλ that have
/// accumulated a phase difference Δφ:
///
/// ```text
/// l_s = Δφ / (2π/λ − 2π/(λ+Δλ)) = Δφ·λ(λ+Δλ) / (2π·Δλ)
/// ```
pub fn self_coherence_length<T: Real>(beam: &BeamState<T>, q: &CoherenceQuery<T>) -> Result<Nanometers<T>> {
    check_positive("delta_e", q.delta_e.value())?;
    let lambda = beam.wavelength.value();
    let dl = match q.lambda_convention {
        LambdaConvention::ElectronDispersion => wavelength_shift(beam, q.delta_e)?.value(),
        LambdaConvention::VirtualPhoton => PhysicalConstants::<T>::codata().h_c / q.delta_e.value(),
    };
    if dl == T::zero() {
        return Err(Error::Singular("Δλ = 0, self-coherence length diverges".into()));
    }
    let phi = q.delta_phi.value();
    Ok(Nanometers(phi * lambda * (lambda + dl) / (T::TAU() * dl)))
}

/// t_s = l_s / c.
pub fn coherence_time<T: Real>(l_s: Nanometers<T>) -> Result<Seconds<T>> {
    let l = l_s.value();
    if !(l >= T::zero()) || !l.is_finite() {
        return Err(domain("l_s", format!("{l} nm must be non-negative")));
    }
    Ok(Seconds(l / PhysicalConstants::<T>::codata().light_speed))
}

/// Evanescent decay length κ/ΔE. κ = ħc gives the light-speed length l_e = x_ic,
/// a fitted κ = ħv gives x_i.
pub fn evanescent_length<T: Real>(delta_e: ElectronVolts<T>, kappa: EvNm<T>) -> Result<Nanometers<T>> {
    check_positive("delta_e", delta_e.value())?;
    check_positive("kappa", kappa.value())?;
    Ok(Nanometers(kappa.value() / delta_e.value()))
}

/// Magnitude of the Goos-Hänchen shift `(λ/π)·sin Φ / √(sin²Φ − n²)`.
///
/// Below the critical angle (sin²Φ < n²) the root is imaginary; the result is
/// the modulus of the complex expression, `(λ/π)·sin Φ / √(n² − sin²Φ)`.
pub fn goos_hanchen_shift<T: Real>(lambda: Nanometers<T>, phi: Radians<T>, n_squared: T) -> Result<Nanometers<T>> {
    check_positive("lambda", lambda.value())?;
    let phi = phi.value();
    let half_pi = T::FRAC_PI_2();
    if !(phi > T::zero()) || phi > half_pi * (T::one() + T::epsilon()) {
        return Err(domain("phi", format!("{phi} rad must lie in (0, π/2]")));
    }
    if !n_squared.is_finite() {
        return Err(domain("n_squared", "must be finite"));
    }
    let s = phi.sin();
    let gap = s * s - n_squared;
    let scale = T::one().max(n_squared.abs());
    if gap.abs() <= T::lit(16.0) * T::epsilon() * scale {
        return Err(Error::Singular(format!("sin²Φ = n² = {n_squared}")));
    }
    Ok(Nanometers(lambda.value() / T::PI() * (s / gap.abs().sqrt()).abs()))
}

/// Tunneling depth ħc / √(2·mc²·ΔE) of a bound state below a barrier ΔE.
pub fn tunneling_depth<T: Real>(delta_e: ElectronVolts<T>) -> Result<Nanometers<T>> {
    check_positive("delta_e", delta_e.value())?;
    let k = PhysicalConstants::<T>::codata();
    Ok(Nanometers(
        k.hbar_c / (T::lit(2.0) * k.electron_rest_energy * delta_e.value()).sqrt(),
    ))
}

/// Time constant ħ/ΔE of the stationary phase factor exp(−iΔE·t/ħ).
pub fn phase_time_constant<T: Real>(delta_e: ElectronVolts<T>) -> Result<Seconds<T>> {
    check_positive("delta_e", delta_e.value())?;
    Ok(Seconds(PhysicalConstants::<T>::codata().hbar / delta_e.value()))
}

/// Uncertainty-limited time ħ/(2ΔE).
pub fn heisenberg_time<T: Real>(delta_e: ElectronVolts<T>) -> Result<Seconds<T>> {
    check_positive("delta_e", delta_e.value())?;
    Ok(Seconds(
        PhysicalConstants::<T>::codata().hbar / (T::lit(2.0) * delta_e.value()),
    ))
}
