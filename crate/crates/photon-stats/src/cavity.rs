//! Emission from a body behind a partially transmitting mirror.
//!
//! Light bounces between the body and the mirror; at bounce `i` the fraction
//! escaping carries weight `a*(1-a)^i`. Summed over all bounces the weights
//! form a geometric series converging to 1, so the cavity emits like a black
//! body regardless of `a`. The two transmission hypotheses differ in what
//! each escaping parcel looks like:
//!
//! * **Independent**: the light escaping at bounce `i` is thermal with the
//!   reduced mean `a*(1-a)^i * m`. Aggregating second moments over bounces
//!   gives `m + 2am^2/(2-a)`, which *does* depend on `a`.
//! * **Wave**: each parcel keeps the full thermal distribution of the body,
//!   weighted by `a*(1-a)^i`. The aggregate second moment is `m + 2m^2`,
//!   independent of `a`.
//!
//! The gap between those aggregates, `4m^2(1-a)/(2-a)`, is what lets an
//! experiment discriminate the hypotheses.

use crate::distributions::{bose_einstein_pmf, MeanOccupancy, PhotonNumberPmf};
use crate::numerics::CompensatedSum;
use crate::scalar::Scalar;
use crate::transmission::{Transmittance, TransmissionModel};
use crate::{Error, Result};

/// Hard ceiling on bounce counts derived from the default residual rule.
pub const MAX_BOUNCES: usize = 1_000_000;

/// Default residual weight below which the bounce series is cut.
const DEFAULT_WEIGHT_RESIDUAL: f64 = 1e-12;

/// Escape-order decomposition of cavity emission.
///
/// `weights[i] = a*(1-a)^i` is the probability that light escapes at bounce
/// `i`; `per_bounce[i]` is the (unweighted) photon-number PMF of the parcel
/// escaping at that bounce; `residual_weight = (1-a)^(i_max+1)` is the mass
/// still circulating past the cut.
#[derive(Clone, Debug)]
pub struct BounceSeries<T> {
    model: TransmissionModel,
    weights: Vec<T>,
    per_bounce: Vec<PhotonNumberPmf<T>>,
    residual_weight: T,
}

impl<T: Scalar> BounceSeries<T> {
    #[inline]
    pub fn model(&self) -> TransmissionModel {
        self.model
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn per_bounce(&self) -> &[PhotonNumberPmf<T>] {
        &self.per_bounce
    }

    #[inline]
    pub fn residual_weight(&self) -> T {
        self.residual_weight
    }

    #[inline]
    pub fn i_max(&self) -> usize {
        self.weights.len() - 1
    }
}

/// Second-moment aggregate of cavity emission, reported both as the partial
/// bounce-series sum and as its closed form, with the certified size of the
/// discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityMomentReport<T> {
    /// Ascending, compensated partial sum over bounces `0..=i_max`.
    pub second_moment_series: T,
    /// Closed form of the full (infinite) series.
    pub second_moment_closed: T,
    pub i_max_used: usize,
    /// Exact value of the dropped geometric tail; `series` and `closed`
    /// agree to this plus rounding.
    pub truncation_residual: T,
}

fn require_open(a: Transmittance<impl Scalar>) -> Result<()> {
    if a.value().is_zero() {
        Err(Error::OpaqueCavity)
    } else {
        Ok(())
    }
}

/// Smallest `i_max` whose residual weight `(1-a)^(i_max+1)` drops below
/// 1e-12, capped at [`MAX_BOUNCES`].
pub fn default_i_max<T: Scalar>(a: Transmittance<T>) -> Result<usize> {
    require_open(a)?;
    let threshold = T::of(DEFAULT_WEIGHT_RESIDUAL);
    let keep = T::one() - a.value();
    if keep.is_zero() {
        return Ok(0);
    }
    // Log estimate, then walk to the exact boundary.
    let est = (threshold.ln() / keep.ln()).ceil() - T::one();
    let mut i_max = est
        .max(T::zero())
        .to_u64()
        .map(|v| (v as usize).min(MAX_BOUNCES))
        .unwrap_or(MAX_BOUNCES);
    while keep.powi(i_max as i32 + 1) >= threshold && i_max < MAX_BOUNCES {
        i_max += 1;
    }
    while i_max > 0 && keep.powi(i_max as i32) < threshold {
        i_max -= 1;
    }
    Ok(i_max)
}

/// Escape weights `a*(1-a)^i` for `i = 0..=i_max` plus the residual
/// `(1-a)^(i_max+1)`. Each weight is taken as the difference of consecutive
/// chain values `(1-a)^i - (1-a)^(i+1)`, so the sum telescopes: the
/// normalization error stays within one rounding of each weight however
/// long the chain runs.
fn escape_weights<T: Scalar>(a: T, i_max: usize) -> (Vec<T>, T) {
    let keep = T::one() - a;
    let mut weights = Vec::with_capacity(i_max + 1);
    let mut remaining = T::one();
    for _ in 0..=i_max {
        let next = remaining * keep;
        weights.push(remaining - next);
        remaining = next;
    }
    (weights, remaining)
}

/// Total escaped energy fraction `a * sum_{i=0}^{i_max} (1-a)^i`.
///
/// Converges to 1 as `i_max` grows: the cavity emits the full blackbody
/// flux whatever the mirror's transmittance.
pub fn cavity_energy_series<T: Scalar>(a: Transmittance<T>, i_max: usize) -> Result<T> {
    require_open(a)?;
    let (weights, _) = escape_weights(a.value(), i_max);
    let mut sum = CompensatedSum::new();
    for w in weights {
        sum.add(w);
    }
    Ok(sum.value())
}

/// Build the escape-order decomposition for either transmission model.
///
/// Independent: `per_bounce[i]` is Bose-Einstein with the reduced mean
/// `a*(1-a)^i * mean_in` (each bounce re-thermalized by thinning). Wave:
/// `per_bounce[i]` is the body's full Bose-Einstein PMF, identical at every
/// bounce; only the weight changes.
pub fn build_bounce_series<T: Scalar>(
    model: TransmissionModel,
    mean_in: MeanOccupancy<T>,
    a: Transmittance<T>,
    i_max: usize,
    tail_tol: T,
) -> Result<BounceSeries<T>> {
    require_open(a)?;
    let (weights, residual_weight) = escape_weights(a.value(), i_max);
    let per_bounce = match model {
        TransmissionModel::Independent => {
            let m = mean_in.value();
            weights
                .iter()
                .map(|&w| {
                    let reduced = MeanOccupancy::new(w * m)
                        .expect("weight times valid mean is a valid mean");
                    bose_einstein_pmf(reduced, tail_tol)
                })
                .collect::<Result<Vec<_>>>()?
        }
        TransmissionModel::Wave => {
            let p = bose_einstein_pmf(mean_in, tail_tol)?;
            vec![p; i_max + 1]
        }
    };
    Ok(BounceSeries {
        model,
        weights,
        per_bounce,
        residual_weight,
    })
}

/// Verify that the weighted bounce parcels reassemble the body's thermal
/// distribution: returns `max_n |sum_i w_i * per_bounce[i][n] - p[n]|`.
///
/// Only the wave model admits this decomposition; for the independent model
/// the unweighted per-bounce PMFs do not sum to a distribution (their
/// zero-photon masses alone exceed 1), so passing one is rejected.
pub fn wave_decomposition_check<T: Scalar>(
    series: &BounceSeries<T>,
    p: &PhotonNumberPmf<T>,
) -> Result<T> {
    if series.model != TransmissionModel::Wave {
        return Err(Error::ModelMismatch {
            expected: TransmissionModel::Wave,
            found: series.model,
        });
    }
    let support = series
        .per_bounce
        .iter()
        .map(|q| q.probs().len())
        .max()
        .unwrap_or(1)
        .max(p.probs().len());
    let mut worst = T::zero();
    for n in 0..support {
        let mut recon = CompensatedSum::new();
        for (w, q) in series.weights.iter().zip(&series.per_bounce) {
            recon.add(*w * q.prob(n));
        }
        let err = (recon.value() - p.prob(n)).abs();
        if err > worst {
            worst = err;
        }
    }
    Ok(worst)
}

/// Aggregate second moment over bounce orders for the independent model:
/// the series `sum_i [m_i + 2 m_i^2]` with `m_i = a(1-a)^i m`, against its
/// closed form `m + 2am^2/(2-a)`.
pub fn independent_cavity_second_moment<T: Scalar>(
    mean_in: MeanOccupancy<T>,
    a: Transmittance<T>,
    i_max: usize,
) -> Result<CavityMomentReport<T>> {
    require_open(a)?;
    let m = mean_in.value();
    let av = a.value();
    let two = T::of(2.0);
    let mut series = CompensatedSum::new();
    let mut remaining = T::one();
    for _ in 0..=i_max {
        let mi = av * remaining * m;
        series.add(mi + two * mi * mi);
        remaining = remaining * (T::one() - av);
    }
    // Dropped tails of the two geometric series, exactly:
    // sum_{i>i_max} m_i = m r and sum_{i>i_max} 2 m_i^2 = 2 a m^2 r^2/(2-a),
    // with r = (1-a)^(i_max+1).
    let r = remaining;
    let truncation_residual = m * r + two * av * m * m * r * r / (two - av);
    let closed = m + two * av * m * m / (two - av);
    Ok(CavityMomentReport {
        second_moment_series: series.value(),
        second_moment_closed: closed,
        i_max_used: i_max,
        truncation_residual,
    })
}

/// Aggregate second moment over bounce orders for the wave model: the
/// series `sum_i a(1-a)^i * (m + 2m^2)` against the closed form `m + 2m^2`,
/// which carries no dependence on `a` at all.
pub fn wave_cavity_second_moment<T: Scalar>(
    mean_in: MeanOccupancy<T>,
    a: Transmittance<T>,
    i_max: usize,
) -> Result<CavityMomentReport<T>> {
    require_open(a)?;
    let m = mean_in.value();
    let body = m + T::of(2.0) * m * m;
    let (weights, r) = escape_weights(a.value(), i_max);
    let mut series = CompensatedSum::new();
    for w in weights {
        series.add(w * body);
    }
    Ok(CavityMomentReport {
        second_moment_series: series.value(),
        second_moment_closed: body,
        i_max_used: i_max,
        truncation_residual: r * body,
    })
}
