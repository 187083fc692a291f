use serde::{Deserialize, Serialize};

use super::constants::PhysicalConstants;
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{ElectronVolts, Nanometers, Volts};

/// Relativistic state of a beam electron accelerated through `accel_voltage`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamState<T = f64> {
    pub accel_voltage: Volts<T>,
    pub kinetic_energy: ElectronVolts<T>,
    pub wavelength: Nanometers<T>,
    /// v/c
    pub beta: T,
    /// Momentum times c.
    pub momentum_c: ElectronVolts<T>,
}

fn momentum_c<T: Real>(kinetic: T, rest: T) -> T {
    (kinetic * kinetic + T::lit(2.0) * kinetic * rest).sqrt()
}

pub fn beam_kinematics<T: Real>(accel_voltage: Volts<T>) -> Result<BeamState<T>> {
    let v = accel_voltage.value();
    if !(v > T::zero()) || !v.is_finite() {
        return Err(domain("accel_voltage", format!("{v} V must be positive and finite")));
    }
    let k = PhysicalConstants::<T>::codata();
    // kinetic energy in eV equals the voltage in V for a unit charge
    let kinetic = v;
    let pc = momentum_c(kinetic, k.electron_rest_energy);
    Ok(BeamState {
        accel_voltage,
        kinetic_energy: ElectronVolts(kinetic),
        wavelength: Nanometers(k.h_c / pc),
        beta: pc / (kinetic + k.electron_rest_energy),
        momentum_c: ElectronVolts(pc),
    })
}

/// Δλ = λ(E − ΔE) − λ(E) for an electron that lost `delta_e`.
///
/// Evaluated through pc₀² − pc₁² = ΔE·(2E − ΔE + 2mc²) so that the result
/// keeps full relative precision although Δλ/λ is of order 10⁻⁶.
pub fn wavelength_shift<T: Real>(beam: &BeamState<T>, delta_e: ElectronVolts<T>) -> Result<Nanometers<T>> {
    let de = delta_e.value();
    let e0 = beam.kinetic_energy.value();
    if de < T::zero() || !de.is_finite() {
        return Err(domain("delta_e", format!("{de} eV must be non-negative")));
    }
    if de >= e0 {
        return Err(domain(
            "delta_e",
            format!("{de} eV must be below the kinetic energy {e0} eV"),
        ));
    }
    let k = PhysicalConstants::<T>::codata();
    let m = k.electron_rest_energy;
    let pc0 = beam.momentum_c.value();
    let pc1 = momentum_c(e0 - de, m);
    let two = T::lit(2.0);
    let dpc = de * (two * e0 - de + two * m) / (pc0 + pc1);
    Ok(Nanometers(k.h_c * dpc / (pc0 * pc1)))
}

/// Relativistic interaction constant σ in rad/(V·nm) used by the phase grating
/// `exp(i·σ·V·dz)`.
pub fn interaction_constant<T: Real>(beam: &BeamState<T>) -> T {
    let k = PhysicalConstants::<T>::codata();
    let e = beam.kinetic_energy.value();
    let m = k.electron_rest_energy;
    T::TAU() / (beam.wavelength.value() * beam.accel_voltage.value()) * (m + e) / (T::lit(2.0) * m + e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ev, volts};
    use approx::assert_relative_eq;

    // Independent oracle: plain textbook relations in f64 without the
    // cancellation-free rearrangement.
    fn oracle_lambda(kinetic: f64) -> f64 {
        let hc = std::f64::consts::TAU * 197.326_980_4;
        hc / (kinetic * kinetic + 2.0 * kinetic * 510_998.95).sqrt()
    }

    #[test]
    fn three_hundred_kv() {
        let b = beam_kinematics(volts(300_000.0)).unwrap();
        assert_relative_eq!(b.wavelength.value(), 1.9687e-3, max_relative = 5e-5);
        assert!((b.beta - 0.7765).abs() < 1e-4, "{}", b.beta);
        assert_relative_eq!(b.wavelength.value(), oracle_lambda(3e5), max_relative = 1e-12);
        let k = PhysicalConstants::<f64>::codata();
        let pc2 = 3e5f64.powi(2) + 2.0 * 3e5 * k.electron_rest_energy;
        assert_relative_eq!(b.momentum_c.value().powi(2), pc2, max_relative = 1e-12);
        assert_relative_eq!(b.wavelength.value(), k.h_c / b.momentum_c.value(), max_relative = 1e-12);
    }

    #[test]
    fn hundred_kv() {
        let b = beam_kinematics(volts(100_000.0)).unwrap();
        assert_relative_eq!(b.wavelength.value(), 3.7014e-3, max_relative = 5e-5);
    }

    #[test]
    fn low_voltage_limits_are_monotone() {
        let b1 = beam_kinematics(volts(1.0)).unwrap();
        let b10 = beam_kinematics(volts(10.0)).unwrap();
        assert!(b1.beta < b10.beta && b1.beta > 0.0);
        assert!(b1.wavelength.value() > b10.wavelength.value());
    }

    #[test]
    fn rejects_non_positive_voltage() {
        assert!(beam_kinematics(volts(0.0)).is_err());
        assert!(beam_kinematics(volts(-5.0)).is_err());
        assert!(beam_kinematics(volts(f64::NAN)).is_err());
    }

    #[test]
    fn wavelength_shift_one_ev() {
        let b = beam_kinematics(volts(300_000.0)).unwrap();
        let d = wavelength_shift(&b, ev(1.0)).unwrap().value();
        assert_relative_eq!(d, 4.026e-9, max_relative = 1e-3);
        // first-order oracle λ·(ΔE/β)/pc
        let first_order = b.wavelength.value() / b.beta / b.momentum_c.value();
        assert_relative_eq!(d, first_order, max_relative = 1e-5);
        // exact two-point evaluation (cancellation limits it to ~1e-10)
        let two_point = oracle_lambda(3e5 - 1.0) - oracle_lambda(3e5);
        assert_relative_eq!(d, two_point, max_relative = 1e-8);
    }

    #[test]
    fn wavelength_shift_is_locally_linear() {
        let b = beam_kinematics(volts(300_000.0)).unwrap();
        let d1 = wavelength_shift(&b, ev(1.0)).unwrap().value();
        let d2 = wavelength_shift(&b, ev(2.0)).unwrap().value();
        // the exact relation carries a curvature term of 2.45e-6 per eV at 300 kV
        let rel = (d2 / (2.0 * d1) - 1.0).abs();
        assert!(rel < 5e-6, "{rel}");
        assert_eq!(wavelength_shift(&b, ev(0.0)).unwrap().value(), 0.0);
    }

    #[test]
    fn wavelength_shift_domain() {
        let b = beam_kinematics(volts(300_000.0)).unwrap();
        assert!(wavelength_shift(&b, ev(300_000.0)).is_err());
        assert!(wavelength_shift(&b, ev(-1.0)).is_err());
    }

    #[test]
    fn interaction_constant_at_300kv() {
        let b = beam_kinematics(volts(300_000.0)).unwrap();
        // tabulated value 6.526e-3 rad/(V nm)
        assert_relative_eq!(interaction_constant(&b), 6.526e-3, max_relative = 1e-3);
    }

    #[test]
    fn f32_instantiation() {
        let b = beam_kinematics(Volts(300_000.0f32)).unwrap();
        assert!((b.wavelength.value() - 1.9687e-3).abs() < 1e-6);
    }
}
