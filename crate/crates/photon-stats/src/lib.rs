//! Photon counting statistics for thermal light crossing lossy boundaries.
//!
//! The crate models a chaotic (thermal) mode and follows its photon number
//! distribution through two competing pictures of partial transmission:
//!
//! * **Independent**: each photon crosses with probability `a` on its own,
//!   i.e. the count is binomially thinned.
//! * **Wave**: the state crosses as a whole with probability `a`, keeping
//!   its shape.
//!
//! Both pictures scale the mean identically (energy conservation does not
//! tell them apart), but they disagree on higher moments. The [`cavity`]
//! module works out the multi-bounce escape decomposition where the
//! disagreement becomes quantitative, [`planck`] ties mean occupancies to
//! physical frequency and temperature, and [`montecarlo`] re-derives the
//! analytic results stochastically with reproducible sampling.
//!
//! Analytic types are generic over the float width through [`Scalar`];
//! `*64` aliases below pin the common double-precision choices. The Monte
//! Carlo layer is `f64`-only because its reproducibility contract fixes the
//! generator and accumulator widths.
//!
//! ```
//! use photon_stats::{bose_einstein_pmf, wave_transmit, Mean64, Transmittance64};
//!
//! let mean = Mean64::new(1.0)?;
//! let a = Transmittance64::new(0.5)?;
//! let thermal = bose_einstein_pmf(mean, 1e-14)?;
//! let out = wave_transmit(&thermal, a);
//! // Whole-state transmission halves the mean but keeps the Fano shape.
//! assert!((out.moments().mean - 0.5).abs() < 1e-12);
//! # Ok::<(), photon_stats::Error>(())
//! ```

pub mod cavity;
pub mod distributions;
mod error;
pub mod montecarlo;
pub mod numerics;
pub mod planck;
mod scalar;
pub mod transmission;

pub use cavity::{
    build_bounce_series, cavity_energy_series, default_i_max, independent_cavity_second_moment,
    wave_cavity_second_moment, wave_decomposition_check, BounceSeries, CavityMomentReport,
    MAX_BOUNCES,
};
pub use distributions::{
    bose_einstein_pmf, einstein_second_moment, MeanOccupancy, MomentReport, PhotonNumberPmf,
};
pub use error::{Error, Result};
pub use montecarlo::{
    chi_square_statistic, default_i_cutoff, run_cavity_experiment, run_transmission_experiment,
    sample_bose_einstein, simulate_cavity_trial, transmit_event, CavityExperiment,
    CavityTrialRecord, GofReport, RngSeed, SampleStats,
};
pub use planck::{graybody_density, mean_occupancy, spectral_density, PhysicalConstants, ReducedFrequency};
pub use scalar::Scalar;
pub use transmission::{
    binomial_thinning, independent_transmit_closed_form, kirchhoff_mean_check, wave_transmit,
    Transmittance, TransmissionModel,
};

/// Double-precision mean occupancy.
pub type Mean64 = MeanOccupancy<f64>;
/// Double-precision transmittance.
pub type Transmittance64 = Transmittance<f64>;
/// Double-precision photon number distribution.
pub type Pmf64 = PhotonNumberPmf<f64>;
/// Double-precision moment report.
pub type Moments64 = MomentReport<f64>;
/// Double-precision bounce decomposition.
pub type BounceSeries64 = BounceSeries<f64>;
/// Double-precision cavity moment report.
pub type CavityMoments64 = CavityMomentReport<f64>;
/// Double-precision physical constants.
pub type Constants64 = PhysicalConstants<f64>;
