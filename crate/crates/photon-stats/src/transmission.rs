//! The two competing boundary-transmission transforms and the mean-scaling
//! check.
//!
//! A surface of transmittance `a` can act on an n-photon state in two
//! physically distinct ways:
//!
//! * **Independent**: each photon crosses on its own with probability `a`
//!   (binomial thinning). Applied to thermal light this stays in the
//!   Bose-Einstein family with mean `a*m`.
//! * **Wave**: the state crosses as a whole with probability `a`, otherwise
//!   nothing does. The transmitted distribution keeps the shape of the input
//!   above `n = 0` and piles the reflected mass onto `n = 0`.
//!
//! Both scale the mean by `a` (the Kirchhoff requirement); they differ in
//! the second moment, which is what makes them experimentally
//! distinguishable.

use crate::distributions::{bose_einstein_pmf, MeanOccupancy, PhotonNumberPmf};
use crate::numerics::CompensatedSum;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Energy transmission coefficient of a surface, in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Transmittance<T>(T);

impl<T: Scalar> Transmittance<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value >= T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidTransmittance {
                value: value.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// Which transmission hypothesis to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransmissionModel {
    /// Photons cross the boundary independently of one another.
    Independent,
    /// The whole n-photon state crosses or reflects as one.
    Wave,
}

impl core::fmt::Display for TransmissionModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            TransmissionModel::Independent => "independent",
            TransmissionModel::Wave => "wave",
        })
    }
}

/// Independent transmission of thermal light, in closed form: the output is
/// Bose-Einstein with mean `a * m`.
///
/// This is the fast path; [`binomial_thinning`] computes the same transform
/// from first principles and is cross-checked against it in the tests.
pub fn independent_transmit_closed_form<T: Scalar>(
    mean_in: MeanOccupancy<T>,
    a: Transmittance<T>,
    tail_tol: T,
) -> Result<PhotonNumberPmf<T>> {
    let scaled = MeanOccupancy::new(a.value() * mean_in.value())
        .expect("product of valid mean and transmittance is a valid mean");
    bose_einstein_pmf(scaled, tail_tol)
}

/// Binomial thinning of an arbitrary photon-number PMF: every photon
/// independently survives with probability `a`, so
/// `out[k] = sum_{n>=k} p[n] * C(n,k) a^k (1-a)^(n-k)`.
///
/// The input tail mass is carried over to the output tail unchanged
/// (conservative: thinning the unrepresented tail is not attempted), so
/// normalization is preserved. Binomial weights are built in log space,
/// which stays finite for supports far beyond the ~10^3 entries typical
/// here.
pub fn binomial_thinning<T: Scalar>(
    p: &PhotonNumberPmf<T>,
    a: Transmittance<T>,
) -> PhotonNumberPmf<T> {
    let av = a.value();
    if av == T::one() {
        return p.clone();
    }
    let mut out = vec![T::zero(); p.probs().len()];
    if av == T::zero() {
        // Total reflection: all represented mass lands on n = 0.
        let mut total = CompensatedSum::new();
        for &pn in p.probs() {
            total.add(pn);
        }
        out[0] = total.value();
        return PhotonNumberPmf::from_transform(out, p.tail_mass(), None);
    }

    let ln_a = av.ln();
    let ln_keep = (T::one() - av).ln();
    for (n, &pn) in p.probs().iter().enumerate() {
        if pn == T::zero() {
            continue;
        }
        // Walk k = 0..=n, updating ln[C(n,k) a^k (1-a)^(n-k)] incrementally:
        // the k -> k+1 step multiplies by (n-k)/(k+1) * a/(1-a).
        let mut ln_w = T::of_usize(n) * ln_keep;
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            let w = ln_w.exp();
            if w > T::zero() {
                *slot = *slot + pn * w;
            }
            if k < n {
                ln_w = ln_w + (T::of_usize(n - k) / T::of_usize(k + 1)).ln() + ln_a - ln_keep;
            }
        }
    }
    PhotonNumberPmf::from_transform(out, p.tail_mass(), None)
}

/// Wave (all-or-nothing) transmission: `out[n] = a * p[n]` for `n >= 1`,
/// with the reflected mass collected at zero, `out[0] = 1 - a*(1 - p[0])`.
/// The tail scales by `a` and keeps its shape.
pub fn wave_transmit<T: Scalar>(
    p: &PhotonNumberPmf<T>,
    a: Transmittance<T>,
) -> PhotonNumberPmf<T> {
    let av = a.value();
    let mut out: Vec<T> = p.probs().iter().map(|&x| av * x).collect();
    out[0] = T::one() - av * (T::one() - p.probs()[0]);
    PhotonNumberPmf::from_transform(out, av * p.tail_mass(), p.geometric_tail_ratio())
}

/// Absolute deviation from the mean-scaling law `<n_out> = a * <n_in>`.
/// Callers assert this below their tolerance.
pub fn kirchhoff_mean_check<T: Scalar>(
    p_in: &PhotonNumberPmf<T>,
    p_out: &PhotonNumberPmf<T>,
    a: Transmittance<T>,
) -> T {
    (p_out.moments().mean - a.value() * p_in.moments().mean).abs()
}
