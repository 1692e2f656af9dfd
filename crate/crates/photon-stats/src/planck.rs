//! Planck occupancy and spectral energy density, tying the counting
//! statistics to physical frequency and temperature.
//!
//! The core API is dimensionless: everything depends on the single ratio
//! `x = hbar*omega / (k*T)`. SI wrappers evaluate that ratio from pinned
//! defining constants and convert the occupancy into a spectral density.

use crate::distributions::MeanOccupancy;
use crate::scalar::Scalar;
use crate::transmission::Transmittance;
use crate::{Error, Result};

/// The dimensionless photon energy `x = hbar*omega/(k*T)`. Strictly
/// positive and finite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ReducedFrequency<T>(T);

impl<T: Scalar> ReducedFrequency<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value > T::zero() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidReducedFrequency {
                value: value.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// Physical constants used by the SI wrappers.
///
/// [`PhysicalConstants::si`] carries the 2019 SI defining values (CODATA):
/// `h = 6.62607015e-34 J s` and `k = 1.380649e-23 J/K` exact,
/// `c = 299792458 m/s` exact, with `hbar = h/2pi` in its conventional
/// ten-digit form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants<T> {
    /// Reduced Planck constant, J s.
    pub hbar: T,
    /// Speed of light in vacuum, m/s.
    pub c: T,
    /// Boltzmann constant, J/K.
    pub k: T,
}

impl<T: Scalar> PhysicalConstants<T> {
    /// 2019 SI defining values.
    pub fn si() -> Self {
        Self {
            hbar: T::of(1.054571817e-34),
            c: T::of(299792458.0),
            k: T::of(1.380649e-23),
        }
    }

    /// Custom constants, e.g. natural units; all must be strictly positive.
    pub fn new(hbar: T, c: T, k: T) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("c", c), ("k", k)] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::NonPositive {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self { hbar, c, k })
    }

    /// Reduced frequency `hbar*omega/(k*T)` for an angular frequency in
    /// rad/s and a temperature in kelvin.
    pub fn reduced_frequency(&self, omega: T, temperature: T) -> Result<ReducedFrequency<T>> {
        if !omega.is_finite() || omega <= T::zero() {
            return Err(Error::NonPositive {
                name: "omega",
                value: omega.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !temperature.is_finite() || temperature <= T::zero() {
            return Err(Error::NonPositive {
                name: "temperature",
                value: temperature.to_f64().unwrap_or(f64::NAN),
            });
        }
        let x = self.hbar * omega / (self.k * temperature);
        if !x.is_finite() {
            return Err(Error::Overflow {
                name: "reduced frequency",
            });
        }
        ReducedFrequency::new(x)
    }
}

/// Mean number of photons per phase-space cell at reduced frequency `x`:
/// `<n> = 1/(e^x - 1)`.
///
/// Evaluated through `exp_m1`, which keeps full precision at small `x`
/// where the naive difference would cancel. Errors only if the occupancy
/// overflows the scalar (x below ~1e-308 for `f64`).
pub fn mean_occupancy<T: Scalar>(x: ReducedFrequency<T>) -> Result<MeanOccupancy<T>> {
    let n = T::one() / x.value().exp_m1();
    if !n.is_finite() {
        return Err(Error::Overflow {
            name: "mean occupancy",
        });
    }
    Ok(MeanOccupancy::new(n).expect("positive x yields a nonnegative occupancy"))
}

/// Number of phase-space cells per unit angular frequency and volume,
/// `omega^2 / (pi^2 c^3)`. Shared by both density code paths so their
/// comparison isolates the occupancy factor.
fn cell_density<T: Scalar>(omega: T, consts: &PhysicalConstants<T>) -> T {
    omega * omega / (T::PI() * T::PI() * consts.c * consts.c * consts.c)
}

/// Planck spectral energy density per unit angular frequency,
/// `f(omega, T) = hbar*omega^3/(pi^2 c^3) * 1/(e^x - 1)` in J s/m^3.
///
/// Equivalently the occupancy times the energy per photon times the cell
/// density, `<n> * hbar*omega * omega^2/(pi^2 c^3)`.
pub fn spectral_density<T: Scalar>(
    omega: T,
    temperature: T,
    consts: &PhysicalConstants<T>,
) -> Result<T> {
    let x = consts.reduced_frequency(omega, temperature)?;
    let occupancy = mean_occupancy(x)?;
    Ok(occupancy.value() * (consts.hbar * omega) * cell_density(omega, consts))
}

/// Graybody emission through a surface of transmittance `a`:
/// `rho(omega, T) = a * f(omega, T)`.
pub fn graybody_density<T: Scalar>(
    omega: T,
    temperature: T,
    a: Transmittance<T>,
    consts: &PhysicalConstants<T>,
) -> Result<T> {
    Ok(a.value() * spectral_density(omega, temperature, consts)?)
}
