//! Truncated photon-number distributions and their moments.
//!
//! The workhorse family is Bose-Einstein: a mode of mean occupancy `m` holds
//! `n` photons with probability `m^n / (1+m)^(n+1)`, a geometric law. PMFs
//! are stored truncated, with the discarded mass tracked explicitly, so
//! normalization and moment computations stay honest under composition.

use crate::numerics::CompensatedSum;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Longest truncated support this crate will allocate.
const MAX_SUPPORT_LEN: u64 = 1 << 24;

/// Mean photon number per mode. Finite and nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct MeanOccupancy<T>(T);

impl<T: Scalar> MeanOccupancy<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value >= T::zero() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidMeanOccupancy {
                value: value.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// How the probability mass beyond the stored support is distributed.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Tail<T> {
    /// The tail continues geometrically: mass `tail_mass` spread as
    /// `tail_mass * (1-ratio) * ratio^(n-s)` over `n >= s`, where `s` is the
    /// support length. Lets moments fold the tail back in exactly.
    Geometric { ratio: T },
    /// Tail shape unknown; moments carry a conservative truncation estimate
    /// instead of a correction.
    Unknown,
}

/// A photon-number PMF over `n = 0..=n_max`, with the mass beyond `n_max`
/// recorded in `tail_mass` rather than silently dropped.
///
/// Invariants, enforced at construction: every entry is finite and >= 0,
/// the tail mass is finite and >= 0, and entries plus tail sum to 1 within
/// [`Scalar::normalization_slack`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonNumberPmf<T> {
    probs: Vec<T>,
    tail_mass: T,
    tail: Tail<T>,
}

impl<T: Scalar> PhotonNumberPmf<T> {
    /// Build a PMF from raw probabilities and an explicit tail mass.
    ///
    /// The tail is treated as shapeless: moment reports will carry the
    /// conservative truncation estimates rather than an exact correction.
    pub fn from_parts(probs: Vec<T>, tail_mass: T) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf {
                reason: "support must hold at least n = 0",
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidPmf {
                reason: "probabilities must be finite and nonnegative",
            });
        }
        if !tail_mass.is_finite() || tail_mass < T::zero() {
            return Err(Error::InvalidPmf {
                reason: "tail mass must be finite and nonnegative",
            });
        }
        let mut total = CompensatedSum::new();
        for &p in &probs {
            total.add(p);
        }
        total.add(tail_mass);
        if (total.value() - T::one()).abs() > T::normalization_slack() {
            return Err(Error::InvalidPmf {
                reason: "probabilities and tail mass must sum to 1",
            });
        }
        Ok(Self {
            probs,
            tail_mass,
            tail: Tail::Unknown,
        })
    }

    /// Internal constructor for transform outputs whose invariants hold by
    /// construction.
    pub(crate) fn from_transform(probs: Vec<T>, tail_mass: T, geometric_ratio: Option<T>) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!(probs.iter().all(|p| p.is_finite() && *p >= T::zero()));
        debug_assert!(tail_mass.is_finite() && tail_mass >= T::zero());
        Self {
            probs,
            tail_mass,
            tail: match geometric_ratio {
                Some(ratio) => Tail::Geometric { ratio },
                None => Tail::Unknown,
            },
        }
    }

    /// Probabilities for `n = 0..=n_max`.
    #[inline]
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Probability mass beyond `n_max`.
    #[inline]
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// Largest photon number in the stored support.
    #[inline]
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of exactly `n` photons; zero beyond the stored support.
    #[inline]
    pub fn prob(&self, n: usize) -> T {
        self.probs.get(n).copied().unwrap_or_else(T::zero)
    }

    /// Ratio of the geometric tail continuation, if the tail shape is known.
    pub(crate) fn geometric_tail_ratio(&self) -> Option<T> {
        match self.tail {
            Tail::Geometric { ratio } => Some(ratio),
            Tail::Unknown => None,
        }
    }

    /// First and second moments of the distribution.
    ///
    /// Sums run over the stored support with compensated summation. A
    /// geometric tail is folded back in exactly (closed-form tail sums), so
    /// its `*_tail_error` fields are zero; a shapeless tail instead yields
    /// the documented conservative estimates `n_max * tail_mass` and
    /// `n_max^2 * tail_mass`.
    pub fn moments(&self) -> MomentReport<T> {
        let mut m1 = CompensatedSum::new();
        let mut m2 = CompensatedSum::new();
        for (n, &p) in self.probs.iter().enumerate() {
            let n_t = T::of_usize(n);
            m1.add(n_t * p);
            m2.add(n_t * n_t * p);
        }

        let (mean, second_moment, mean_tail_error, second_moment_tail_error) = match self.tail {
            Tail::Geometric { ratio } => {
                // Tail entries are tail_mass * (1-q) q^(n-s) for n >= s:
                //   sum n   = tail_mass * (s + q/(1-q))
                //   sum n^2 = tail_mass * (s^2 + 2s q/(1-q) + q(1+q)/(1-q)^2)
                let one = T::one();
                let s = T::of_usize(self.probs.len());
                let g = ratio / (one - ratio);
                let tail1 = self.tail_mass * (s + g);
                let tail2 = self.tail_mass
                    * (s * s + T::of(2.0) * s * g + ratio * (one + ratio) / ((one - ratio) * (one - ratio)));
                (m1.value() + tail1, m2.value() + tail2, T::zero(), T::zero())
            }
            Tail::Unknown => {
                let n_max = T::of_usize(self.n_max());
                (
                    m1.value(),
                    m2.value(),
                    n_max * self.tail_mass,
                    n_max * n_max * self.tail_mass,
                )
            }
        };

        let variance = second_moment - mean * mean;
        let fano_factor = if mean > T::zero() {
            Some(variance / mean)
        } else {
            None
        };
        MomentReport {
            mean,
            second_moment,
            variance,
            fano_factor,
            mean_tail_error,
            second_moment_tail_error,
        }
    }
}

/// Moments of a truncated PMF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport<T> {
    pub mean: T,
    pub second_moment: T,
    /// `second_moment - mean^2`; may dip a hair below zero from rounding.
    pub variance: T,
    /// `variance / mean`; `None` for a vacuum (zero-mean) distribution.
    pub fano_factor: Option<T>,
    /// Truncation contribution attributed to the unrepresented tail, taken
    /// at the support edge. Zero when the tail was folded in analytically.
    pub mean_tail_error: T,
    /// Same estimate for the second moment (`n_max^2 * tail_mass`).
    pub second_moment_tail_error: T,
}

/// Bose-Einstein (geometric) PMF for a mode of mean occupancy `m`:
/// `P(n) = m^n / (1+m)^(n+1)`.
///
/// The support is cut at the smallest `n_max` whose remaining geometric tail
/// `(m/(1+m))^(n_max+1)` falls below `tail_tol`; that exact tail value is
/// stored, and moments re-add it in closed form.
///
/// `m = 0` yields the delta distribution at `n = 0` (the analytic limit).
///
/// # Examples
///
/// ```
/// use photon_stats::{bose_einstein_pmf, MeanOccupancy};
///
/// let p = bose_einstein_pmf(MeanOccupancy::new(1.0f64).unwrap(), 1e-14).unwrap();
/// assert!((p.prob(0) - 0.5).abs() < 1e-15);
/// assert!((p.prob(1) - 0.25).abs() < 1e-15);
/// let report = p.moments();
/// assert!((report.mean - 1.0).abs() < 1e-12);
/// ```
pub fn bose_einstein_pmf<T: Scalar>(
    mean: MeanOccupancy<T>,
    tail_tol: T,
) -> Result<PhotonNumberPmf<T>> {
    if !tail_tol.is_finite() || tail_tol <= T::zero() || tail_tol >= T::one() {
        return Err(Error::InvalidTailTolerance {
            value: tail_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let m = mean.value();
    if m == T::zero() {
        return Ok(PhotonNumberPmf::from_transform(
            vec![T::one()],
            T::zero(),
            Some(T::zero()),
        ));
    }

    let q = m / (T::one() + m);
    // Estimate the cut from logs, then walk to the exact smallest n_max with
    // q^(n_max+1) < tail_tol (float log estimates can be off by one).
    let est = (tail_tol.ln() / q.ln()).ceil() - T::one();
    let est = est.max(T::zero()).to_u64().unwrap_or(u64::MAX);
    if est >= MAX_SUPPORT_LEN {
        return Err(Error::SupportTooLarge {
            required: est.saturating_add(1),
            limit: MAX_SUPPORT_LEN,
        });
    }
    let mut n_max = est as usize;
    while q.powi(n_max as i32 + 1) >= tail_tol {
        n_max += 1;
        if n_max as u64 >= MAX_SUPPORT_LEN {
            return Err(Error::SupportTooLarge {
                required: n_max as u64 + 1,
                limit: MAX_SUPPORT_LEN,
            });
        }
    }
    while n_max > 0 && q.powi(n_max as i32) < tail_tol {
        n_max -= 1;
    }

    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = T::one() / (T::one() + m); // (1-q), exactly P(0)
    for _ in 0..=n_max {
        probs.push(p);
        p = p * q;
    }
    let tail_mass = q.powi(n_max as i32 + 1);
    Ok(PhotonNumberPmf::from_transform(probs, tail_mass, Some(q)))
}

/// Second moment of thermal (Bose-Einstein) light in closed form:
/// `<n^2> = m + 2 m^2`, the fluctuation law for a single mode.
pub fn einstein_second_moment<T: Scalar>(mean: MeanOccupancy<T>) -> T {
    let m = mean.value();
    m + T::of(2.0) * m * m
}
