//! Unit-carrying newtypes used at the physics API boundary.
//!
//! Units are fixed repo-wide: eV, nm, s, rad and V.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name<T = f64>(pub T);

        impl<T: Real> $name<T> {
            pub const UNIT: &'static str = $unit;

            pub fn new(value: T) -> Self {
                Self(value)
            }

            pub fn value(self) -> T {
                self.0
            }
        }

        impl<T: Real> fmt::Display for $name<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }

        impl<T: Real> Add for $name<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl<T: Real> Sub for $name<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl<T: Real> Mul<T> for $name<T> {
            type Output = Self;
            fn mul(self, rhs: T) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl<T: Real> Div<T> for $name<T> {
            type Output = Self;
            fn div(self, rhs: T) -> Self {
                Self(self.0 / rhs)
            }
        }
    };
}

quantity!(
    /// Accelerating voltage.
    Volts, "V"
);
quantity!(
    /// Energy, in particular an energy loss ΔE.
    ElectronVolts, "eV"
);
quantity!(
    /// Length.
    Nanometers, "nm"
);
quantity!(
    /// Time.
    Seconds, "s"
);
quantity!(
    /// Phase.
    Radians, "rad"
);
quantity!(
    /// Energy times length, the unit of ħc and of the fitted ħv.
    EvNm, "eV·nm"
);

/// `eV` shorthand for `f64` call sites.
pub fn ev(v: f64) -> ElectronVolts<f64> {
    ElectronVolts(v)
}

pub fn nm(v: f64) -> Nanometers<f64> {
    Nanometers(v)
}

pub fn rad(v: f64) -> Radians<f64> {
    Radians(v)
}

pub fn volts(v: f64) -> Volts<f64> {
    Volts(v)
}

pub fn ev_nm(v: f64) -> EvNm<f64> {
    EvNm(v)
}
