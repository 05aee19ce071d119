//! Semantic wrappers for dimensionful outputs.
//!
//! Dimensionless numbers stay as plain `f64`. Anything with a unit that leaves
//! the crate goes through one of these wrappers so a rate can't be handed to a
//! function expecting a time.

use serde::Serialize;
use std::f64::consts::PI;

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            pub const UNIT: &'static str = $unit;

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

quantity!(
    /// Time in seconds.
    Seconds,
    "s"
);
quantity!(
    /// Angular rate in rad/s.
    RadPerSec,
    "rad/s"
);
quantity!(
    /// Energy in joules.
    Joules,
    "J"
);
quantity!(
    /// Cyclic frequency in Hz.
    Hertz,
    "Hz"
);

impl RadPerSec {
    pub fn to_hertz(self) -> Hertz {
        Hertz(self.0 / (2.0 * PI))
    }
}

impl Hertz {
    pub fn to_rad_per_sec(self) -> RadPerSec {
        RadPerSec(self.0 * 2.0 * PI)
    }
}

impl Joules {
    /// E/h.
    pub fn to_hertz(self) -> Hertz {
        Hertz(self.0 / crate::constants::H)
    }

    /// E/ħ.
    pub fn to_rad_per_sec(self) -> RadPerSec {
        RadPerSec(self.0 / crate::constants::HBAR)
    }
}
