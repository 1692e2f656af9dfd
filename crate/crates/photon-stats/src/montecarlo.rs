//! Stochastic re-derivation of the analytic predictions.
//!
//! Determinism contract: trial `t` draws from stream `t` of a ChaCha8
//! generator keyed by the run's seed, so every statistic is a pure function
//! of `(seed, parameters)` regardless of how trials are scheduled across
//! threads. All tallies are exact integer counts merged by addition
//! (order-independent); floating point enters only when the final
//! statistics are formed.
//!
//! This module is deliberately concrete over `f64`: the reproducibility
//! contract pins the generator, the sampling layout, and the integer
//! accumulator widths, none of which generalize over a scalar parameter.

use rand::distributions::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::cavity::MAX_BOUNCES;
use crate::distributions::{MeanOccupancy, PhotonNumberPmf};
use crate::transmission::{Transmittance, TransmissionModel};
use crate::{Error, Result};

/// Seed for a reproducible run. Any value is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

/// Default residual probability below which cavity trials are cut off.
const DEFAULT_CUTOFF_RESIDUAL: f64 = 1e-9;

/// Sample-moment summary of one observed count per trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub count: u64,
    pub mean: f64,
    pub second_moment: f64,
    /// Unbiased sample variance of the counts.
    pub variance: f64,
    pub stderr_mean: f64,
    /// Standard error of the second moment, from the sample variance of n^2.
    pub stderr_second_moment: f64,
}

/// Exact integer tally of counts: totals of n, n^2 and n^4 never round, so
/// merging tallies is associative and the final statistics are bit-stable
/// under any parallel schedule.
#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    count: u64,
    sum_n: u128,
    sum_n2: u128,
    sum_n4: u128,
}

impl Tally {
    #[inline]
    fn record(&mut self, n: u64) {
        let n = n as u128;
        let n2 = n * n;
        self.count += 1;
        self.sum_n += n;
        self.sum_n2 += n2;
        self.sum_n4 = self
            .sum_n4
            .checked_add(n2 * n2)
            .expect("fourth-moment tally overflowed: counts too large for this trial volume");
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.sum_n += other.sum_n;
        self.sum_n2 += other.sum_n2;
        self.sum_n4 = self
            .sum_n4
            .checked_add(other.sum_n4)
            .expect("fourth-moment tally overflowed while merging");
        self
    }

    fn stats(&self) -> SampleStats {
        let n = self.count;
        let nf = n as f64;
        let mean = self.sum_n as f64 / nf;
        let second_moment = self.sum_n2 as f64 / nf;
        if n < 2 {
            return SampleStats {
                count: n,
                mean,
                second_moment,
                variance: 0.0,
                stderr_mean: 0.0,
                stderr_second_moment: 0.0,
            };
        }
        // N*sum(x^2) - (sum x)^2 is computed in exact integers; it is
        // nonnegative by Cauchy-Schwarz, so the subtraction cannot wrap.
        let var_num = (n as u128 * self.sum_n2) - self.sum_n * self.sum_n;
        let variance = var_num as f64 / (nf * (nf - 1.0));
        let var2_num = n as u128 * self.sum_n4 - self.sum_n2 * self.sum_n2;
        let variance_n2 = var2_num as f64 / (nf * (nf - 1.0));
        SampleStats {
            count: n,
            mean,
            second_moment,
            variance,
            stderr_mean: (variance / nf).sqrt(),
            stderr_second_moment: (variance_n2 / nf).sqrt(),
        }
    }
}

/// One cavity trial, bounce by bounce.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityTrialRecord {
    /// Photons escaping at each bounce `0..bounces_used`.
    pub per_bounce_escapes: Vec<u64>,
    pub total_escaped: u64,
    /// Bounces simulated before the state emptied or the cutoff hit.
    pub bounces_used: usize,
}

/// Everything measured by a cavity experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityExperiment {
    /// Statistics of the escape count at each bounce order; every trial
    /// contributes to every bounce (zero when nothing escaped there).
    pub per_bounce: Vec<SampleStats>,
    /// Statistics of the total escaped count per trial.
    pub total_escaped: SampleStats,
    /// Mean over trials of `sum_i (escapes at bounce i)^2`. For the
    /// independent model this is the sum over bounces of per-bounce second
    /// moments; for the wave model it equals the second moment of the total
    /// escaped count (exactly one bounce is ever nonzero).
    pub aggregate_second_moment: f64,
    /// Standard error of that aggregate, from its per-trial spread.
    pub aggregate_stderr: f64,
    /// Trials still holding photons when the bounce cutoff hit.
    pub residual_trials: u64,
    /// Photons left circulating in those trials.
    pub residual_photons: u64,
    pub i_cutoff: usize,
}

fn trial_rng(base: &ChaCha8Rng, trial: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(trial);
    rng
}

/// Draw from the Bose-Einstein distribution of the given mean by inverting
/// its geometric CDF: `n = floor(ln u / ln(m/(1+m)))` for `u` uniform in
/// (0, 1].
pub fn sample_bose_einstein<R: Rng + ?Sized>(mean: MeanOccupancy<f64>, rng: &mut R) -> u64 {
    let m = mean.value();
    if m == 0.0 {
        return 0;
    }
    let q = m / (1.0 + m);
    let u: f64 = rng.sample(OpenClosed01);
    (u.ln() / q.ln()).floor() as u64
}

/// Exact binomial draw via one Bernoulli decision per photon. Preferred for
/// small counts where it is both fastest and transparently correct.
fn binomial_per_photon<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    let mut kept = 0;
    for _ in 0..n {
        if rng.gen::<f64>() < p {
            kept += 1;
        }
    }
    kept
}

/// Exact binomial draw through the inversion/BTPE sampler for large counts.
fn binomial_btpe<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    rand_distr::Binomial::new(n, p)
        .expect("transmittance is a valid probability")
        .sample(rng)
}

/// Count of photons surviving an independent filter of probability `p`.
/// Per-photon Bernoulli up to 64 photons, BTPE-class sampling above; the
/// two paths are cross-validated in the tests.
fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else if n <= 64 {
        binomial_per_photon(n, p, rng)
    } else {
        binomial_btpe(n, p, rng)
    }
}

/// Send `n` photons at a surface once and count what crosses.
pub fn transmit_event<R: Rng + ?Sized>(
    model: TransmissionModel,
    n: u64,
    a: Transmittance<f64>,
    rng: &mut R,
) -> u64 {
    match model {
        TransmissionModel::Independent => sample_binomial(n, a.value(), rng),
        TransmissionModel::Wave => {
            if rng.gen::<f64>() < a.value() {
                n
            } else {
                0
            }
        }
    }
}

/// Draw a thermal state and transmit it once, `n_trials` times; returns the
/// statistics of the transmitted count.
pub fn run_transmission_experiment(
    model: TransmissionModel,
    mean_in: MeanOccupancy<f64>,
    a: Transmittance<f64>,
    n_trials: u64,
    seed: RngSeed,
) -> Result<SampleStats> {
    if n_trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let base = ChaCha8Rng::seed_from_u64(seed.0);
    let tally = (0..n_trials)
        .into_par_iter()
        .fold(Tally::default, |mut tally, trial| {
            let mut rng = trial_rng(&base, trial);
            let n_in = sample_bose_einstein(mean_in, &mut rng);
            tally.record(transmit_event(model, n_in, a, &mut rng));
            tally
        })
        .reduce(Tally::default, Tally::merge);
    Ok(tally.stats())
}

/// Smallest cutoff with `(1-a)^i_cutoff < 1e-9` (at least 1 bounce), capped
/// at [`MAX_BOUNCES`]. The residual bucket accounts for anything cut off.
pub fn default_i_cutoff(a: Transmittance<f64>) -> Result<usize> {
    if a.value() == 0.0 {
        return Err(Error::OpaqueCavity);
    }
    let keep = 1.0 - a.value();
    if keep == 0.0 {
        return Ok(1);
    }
    let mut cutoff = ((DEFAULT_CUTOFF_RESIDUAL.ln() / keep.ln()).ceil() as usize).max(1);
    cutoff = cutoff.min(MAX_BOUNCES);
    while keep.powi(cutoff as i32) >= DEFAULT_CUTOFF_RESIDUAL && cutoff < MAX_BOUNCES {
        cutoff += 1;
    }
    while cutoff > 1 && keep.powi(cutoff as i32 - 1) < DEFAULT_CUTOFF_RESIDUAL {
        cutoff -= 1;
    }
    Ok(cutoff)
}

/// Simulate one cavity trial starting from `n0` photons, writing per-bounce
/// escape counts into `escapes` (resized to `i_cutoff`). Returns
/// `(total_escaped, bounces_used, leftover)`.
fn simulate_cavity_into<R: Rng + ?Sized>(
    model: TransmissionModel,
    n0: u64,
    a: Transmittance<f64>,
    i_cutoff: usize,
    rng: &mut R,
    escapes: &mut Vec<u64>,
) -> (u64, usize, u64) {
    escapes.clear();
    escapes.resize(i_cutoff, 0);
    match model {
        TransmissionModel::Independent => {
            let mut remaining = n0;
            let mut bounces_used = i_cutoff;
            for (i, slot) in escapes.iter_mut().enumerate() {
                if remaining == 0 {
                    bounces_used = i;
                    break;
                }
                let out = sample_binomial(remaining, a.value(), rng);
                *slot = out;
                remaining -= out;
            }
            (n0 - remaining, bounces_used, remaining)
        }
        TransmissionModel::Wave => {
            // The whole state escapes at the first success of a Bernoulli(a)
            // chain; the bounce index is geometric, drawn by inversion.
            let av = a.value();
            let bounce = if av >= 1.0 {
                0
            } else {
                let u: f64 = rng.sample(OpenClosed01);
                // ln u and ln(1-a) are both nonpositive, so the ratio is the
                // count of consecutive failures; floor, not Euclidean
                // division, which would round the negative quotient up.
                (u.ln() / (1.0 - av).ln()).floor() as usize
            };
            if bounce < i_cutoff {
                escapes[bounce] = n0;
                (n0, bounce + 1, 0)
            } else {
                (0, i_cutoff, n0)
            }
        }
    }
}

/// Run one cavity trial from a freshly drawn thermal state. Exposed for
/// realization-level checks; [`run_cavity_experiment`] is the aggregating
/// driver.
pub fn simulate_cavity_trial<R: Rng + ?Sized>(
    model: TransmissionModel,
    n0: u64,
    a: Transmittance<f64>,
    i_cutoff: usize,
    rng: &mut R,
) -> CavityTrialRecord {
    let mut escapes = Vec::new();
    let (total_escaped, bounces_used, _) =
        simulate_cavity_into(model, n0, a, i_cutoff, rng, &mut escapes);
    escapes.truncate(bounces_used);
    CavityTrialRecord {
        per_bounce_escapes: escapes,
        total_escaped,
        bounces_used,
    }
}

#[derive(Clone)]
struct CavityTally {
    per_bounce: Vec<Tally>,
    total: Tally,
    /// Per-trial aggregate Y = sum_i (escapes at bounce i)^2.
    sum_y: u128,
    sum_y2: u128,
    residual_trials: u64,
    residual_photons: u64,
    scratch: Vec<u64>,
}

impl CavityTally {
    fn new(i_cutoff: usize) -> Self {
        Self {
            per_bounce: vec![Tally::default(); i_cutoff],
            total: Tally::default(),
            sum_y: 0,
            sum_y2: 0,
            residual_trials: 0,
            residual_photons: 0,
            scratch: Vec::new(),
        }
    }

    fn merge(mut self, other: CavityTally) -> CavityTally {
        for (mine, theirs) in self.per_bounce.iter_mut().zip(other.per_bounce) {
            *mine = mine.merge(theirs);
        }
        self.total = self.total.merge(other.total);
        self.sum_y += other.sum_y;
        self.sum_y2 = self
            .sum_y2
            .checked_add(other.sum_y2)
            .expect("aggregate tally overflowed while merging");
        self.residual_trials += other.residual_trials;
        self.residual_photons += other.residual_photons;
        self
    }
}

/// Simulate multi-bounce escape from the cavity for `n_trials` thermal
/// states and aggregate per-bounce and total statistics.
///
/// Deterministic for a fixed `(seed, parameters)` tuple under any thread
/// count. Trials still circulating at `i_cutoff` land in the residual
/// bucket rather than being dropped.
pub fn run_cavity_experiment(
    model: TransmissionModel,
    mean_in: MeanOccupancy<f64>,
    a: Transmittance<f64>,
    n_trials: u64,
    i_cutoff: usize,
    seed: RngSeed,
) -> Result<CavityExperiment> {
    if a.value() == 0.0 {
        return Err(Error::OpaqueCavity);
    }
    if n_trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if i_cutoff == 0 {
        return Err(Error::NonPositive {
            name: "i_cutoff",
            value: 0.0,
        });
    }
    let base = ChaCha8Rng::seed_from_u64(seed.0);
    let tally = (0..n_trials)
        .into_par_iter()
        .fold(
            || CavityTally::new(i_cutoff),
            |mut tally, trial| {
                let mut rng = trial_rng(&base, trial);
                let n0 = sample_bose_einstein(mean_in, &mut rng);
                let mut scratch = std::mem::take(&mut tally.scratch);
                let (total, _used, leftover) =
                    simulate_cavity_into(model, n0, a, i_cutoff, &mut rng, &mut scratch);
                let mut y: u128 = 0;
                for (slot, out) in tally.per_bounce.iter_mut().zip(&scratch) {
                    slot.record(*out);
                    y += (*out as u128) * (*out as u128);
                }
                tally.total.record(total);
                tally.sum_y += y;
                tally.sum_y2 = tally
                    .sum_y2
                    .checked_add(y * y)
                    .expect("aggregate tally overflowed: counts too large for this trial volume");
                if leftover > 0 {
                    tally.residual_trials += 1;
                    tally.residual_photons += leftover;
                }
                tally.scratch = scratch;
                tally
            },
        )
        .reduce(|| CavityTally::new(i_cutoff), CavityTally::merge);

    let nf = n_trials as f64;
    let aggregate_second_moment = tally.sum_y as f64 / nf;
    let aggregate_stderr = if n_trials < 2 {
        0.0
    } else {
        let var_num = n_trials as u128 * tally.sum_y2 - tally.sum_y * tally.sum_y;
        let var = var_num as f64 / (nf * (nf - 1.0));
        (var / nf).sqrt()
    };
    Ok(CavityExperiment {
        per_bounce: tally.per_bounce.iter().map(Tally::stats).collect(),
        total_escaped: tally.total.stats(),
        aggregate_second_moment,
        aggregate_stderr,
        residual_trials: tally.residual_trials,
        residual_photons: tally.residual_photons,
        i_cutoff,
    })
}

/// Chi-square goodness-of-fit report for observed counts against a model
/// PMF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GofReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub bins_used: usize,
}

/// Pearson chi-square statistic for per-count observations `observed[n]`
/// against `pmf`, binning counts individually up to `max_bins - 1` and
/// collecting everything beyond (including the PMF tail) into a final bin.
/// Trailing bins are merged until every bin expects at least 5 events, the
/// usual validity rule.
pub fn chi_square_statistic(
    observed: &[u64],
    pmf: &PhotonNumberPmf<f64>,
    max_bins: usize,
) -> GofReport {
    let trials: u64 = observed.iter().sum();
    let nf = trials as f64;
    // Individual bins 0..cut, catch-all bin for >= cut.
    let mut cut = max_bins.saturating_sub(1).min(pmf.probs().len());
    while cut > 1 && nf * pmf.prob(cut - 1) < 5.0 {
        cut -= 1;
    }
    let mut statistic = 0.0;
    let mut covered = 0.0;
    for n in 0..cut {
        let expected = nf * pmf.prob(n);
        covered += pmf.prob(n);
        let obs = observed.get(n).copied().unwrap_or(0) as f64;
        statistic += (obs - expected).powi(2) / expected;
    }
    let tail_expected = nf * (1.0 - covered);
    let tail_obs: u64 = observed.iter().skip(cut).sum();
    statistic += (tail_obs as f64 - tail_expected).powi(2) / tail_expected;
    GofReport {
        statistic,
        degrees_of_freedom: cut, // bins = cut + 1, df = bins - 1
        bins_used: cut + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::independent_cavity_second_moment;
    use crate::distributions::bose_einstein_pmf;

    fn mean(m: f64) -> MeanOccupancy<f64> {
        MeanOccupancy::new(m).unwrap()
    }

    fn tr(a: f64) -> Transmittance<f64> {
        Transmittance::new(a).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn vacuum_always_samples_zero() {
        let mut r = rng(7);
        for _ in 0..100 {
            assert_eq!(sample_bose_einstein(mean(0.0), &mut r), 0);
        }
    }

    #[test]
    fn thermal_sampling_matches_distribution() {
        let trials = 1_000_000u64;
        let mut r = rng(11);
        let mut tally = Tally::default();
        let mut zeros = 0u64;
        for _ in 0..trials {
            let n = sample_bose_einstein(mean(1.0), &mut r);
            tally.record(n);
            if n == 0 {
                zeros += 1;
            }
        }
        let stats = tally.stats();
        assert!((stats.mean - 1.0).abs() < 5.0 * stats.stderr_mean);
        // P(0) = 0.5 for m = 1.
        let p0 = zeros as f64 / trials as f64;
        let se = (0.25 / trials as f64).sqrt();
        assert!((p0 - 0.5).abs() < 5.0 * se);
    }

    #[test]
    fn transmit_event_edge_cases() {
        let mut r = rng(3);
        for model in [TransmissionModel::Independent, TransmissionModel::Wave] {
            assert_eq!(transmit_event(model, 0, tr(0.5), &mut r), 0);
            assert_eq!(transmit_event(model, 9, tr(1.0), &mut r), 9);
            assert_eq!(transmit_event(model, 9, tr(0.0), &mut r), 0);
        }
    }

    #[test]
    fn wave_events_never_split_the_state() {
        let mut r = rng(5);
        let trials = 1_000_000u64;
        let mut sevens = 0u64;
        for _ in 0..trials {
            let out = transmit_event(TransmissionModel::Wave, 7, tr(0.5), &mut r);
            assert!(out == 0 || out == 7);
            if out == 7 {
                sevens += 1;
            }
        }
        let freq = sevens as f64 / trials as f64;
        let se = (0.25 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() < 5.0 * se);
    }

    #[test]
    fn binomial_paths_agree_with_each_other() {
        // Same (n, p) pushed through both samplers; their moments must,
        // statistically, be the same binomial moments.
        let n = 200u64;
        let p = 0.3;
        let reps = 200_000u64;
        let mut r = rng(17);
        let (mut t_small, mut t_large) = (Tally::default(), Tally::default());
        for _ in 0..reps {
            t_small.record(binomial_per_photon(n, p, &mut r));
            t_large.record(binomial_btpe(n, p, &mut r));
        }
        let (s, l) = (t_small.stats(), t_large.stats());
        let expect_mean = n as f64 * p;
        let se = (s.stderr_mean.powi(2) + l.stderr_mean.powi(2)).sqrt();
        assert!((s.mean - expect_mean).abs() < 5.0 * s.stderr_mean);
        assert!((l.mean - expect_mean).abs() < 5.0 * l.stderr_mean);
        assert!((s.mean - l.mean).abs() < 5.0 * se);
        let expect_var = n as f64 * p * (1.0 - p);
        assert!((s.variance - expect_var).abs() / expect_var < 0.05);
        assert!((l.variance - expect_var).abs() / expect_var < 0.05);
    }

    #[test]
    fn sample_stats_hand_check() {
        let mut t = Tally::default();
        for n in [0u64, 1, 2, 3] {
            t.record(n);
        }
        let s = t.stats();
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 1.5);
        assert_eq!(s.second_moment, 3.5);
        // Unbiased variance: (14 - 4*2.25)/3 = 5/3.
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.stderr_mean - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
        // Var of n^2 over {0,1,4,9}: (98 - 4*12.25)/3 = 49/3.
        assert!((s.stderr_second_moment - (49.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn transmission_experiment_matches_analytic_moments() {
        let trials = 1_000_000;
        let seed = RngSeed(42);
        let m = 1.0;
        let a = 0.5;
        let ind = run_transmission_experiment(
            TransmissionModel::Independent,
            mean(m),
            tr(a),
            trials,
            seed,
        )
        .unwrap();
        // Thinned thermal light: mean a*m, second moment am + 2(am)^2 = 1.
        assert!((ind.mean - 0.5).abs() < 5.0 * ind.stderr_mean);
        assert!((ind.second_moment - 1.0).abs() < 5.0 * ind.stderr_second_moment);

        let wav =
            run_transmission_experiment(TransmissionModel::Wave, mean(m), tr(a), trials, seed)
                .unwrap();
        // Whole-state transmission keeps the shape: a*(m + 2m^2) = 1.5.
        assert!((wav.mean - 0.5).abs() < 5.0 * wav.stderr_mean);
        assert!((wav.second_moment - 1.5).abs() < 5.0 * wav.stderr_second_moment);

        for model in [TransmissionModel::Independent, TransmissionModel::Wave] {
            let full = run_transmission_experiment(model, mean(m), tr(1.0), trials, seed).unwrap();
            assert!((full.second_moment - 3.0).abs() < 5.0 * full.stderr_second_moment);
        }
    }

    #[test]
    fn zero_trials_is_rejected() {
        assert_eq!(
            run_transmission_experiment(
                TransmissionModel::Wave,
                mean(1.0),
                tr(0.5),
                0,
                RngSeed(1)
            ),
            Err(Error::ZeroTrials)
        );
        assert!(matches!(
            run_cavity_experiment(TransmissionModel::Wave, mean(1.0), tr(0.5), 0, 10, RngSeed(1)),
            Err(Error::ZeroTrials)
        ));
    }

    #[test]
    fn cavity_rejects_degenerate_inputs() {
        assert_eq!(
            run_cavity_experiment(TransmissionModel::Wave, mean(1.0), tr(0.0), 10, 10, RngSeed(1)),
            Err(Error::OpaqueCavity)
        );
        assert!(matches!(
            run_cavity_experiment(TransmissionModel::Wave, mean(1.0), tr(0.5), 10, 0, RngSeed(1)),
            Err(Error::NonPositive { .. })
        ));
        assert_eq!(default_i_cutoff(tr(0.0)), Err(Error::OpaqueCavity));
    }

    #[test]
    fn default_cutoff_satisfies_its_rule() {
        assert_eq!(default_i_cutoff(tr(1.0)).unwrap(), 1);
        for &a in &[0.2, 0.5, 0.8, 0.99] {
            let c = default_i_cutoff(tr(a)).unwrap();
            let keep = 1.0 - a;
            assert!(keep.powi(c as i32) < 1e-9, "a = {a}");
            if c > 1 {
                assert!(keep.powi(c as i32 - 1) >= 1e-9, "a = {a} not minimal");
            }
        }
    }

    #[test]
    fn independent_trials_conserve_photons() {
        let mut r = rng(23);
        for _ in 0..2000 {
            let n0 = sample_bose_einstein(mean(2.0), &mut r);
            let rec = simulate_cavity_trial(TransmissionModel::Independent, n0, tr(0.3), 40, &mut r);
            let escaped: u64 = rec.per_bounce_escapes.iter().sum();
            assert_eq!(escaped, rec.total_escaped);
            assert!(rec.total_escaped <= n0);
            if rec.bounces_used < 40 {
                // Emptied early: everything escaped.
                assert_eq!(rec.total_escaped, n0);
            }
        }
    }

    #[test]
    fn wave_trials_escape_whole_or_not_at_all() {
        let mut r = rng(29);
        for _ in 0..2000 {
            let n0 = sample_bose_einstein(mean(1.0), &mut r);
            let rec = simulate_cavity_trial(TransmissionModel::Wave, n0, tr(0.4), 30, &mut r);
            assert!(rec.total_escaped == 0 || rec.total_escaped == n0);
            let nonzero = rec.per_bounce_escapes.iter().filter(|&&e| e > 0).count();
            assert!(nonzero <= 1);
        }
    }

    #[test]
    fn wave_escape_bounce_is_geometric() {
        // P(escape at bounce i) = a*(1-a)^i; the first bounce especially
        // must carry weight a, not get shifted later by a rounding slip.
        let trials = 200_000u64;
        let a = 0.3;
        let mut counts = [0u64; 3];
        let mut r = rng(37);
        for _ in 0..trials {
            let rec = simulate_cavity_trial(TransmissionModel::Wave, 1, tr(a), 50, &mut r);
            if let Some(i) = rec.per_bounce_escapes.iter().position(|&e| e > 0) {
                if i < counts.len() {
                    counts[i] += 1;
                }
            }
        }
        for (i, &count) in counts.iter().enumerate() {
            let p = a * (1.0 - a).powi(i as i32);
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            let freq = count as f64 / trials as f64;
            assert!((freq - p).abs() < 5.0 * se, "bounce {i}: {freq} vs {p}");
        }
    }

    #[test]
    fn cavity_experiment_recovers_bounce_structure() {
        let trials = 1_000_000;
        let exp = run_cavity_experiment(
            TransmissionModel::Independent,
            mean(1.0),
            tr(0.5),
            trials,
            60,
            RngSeed(123),
        )
        .unwrap();
        // Bounce-0 escapes are thermal with mean a*m = 0.5.
        let b0 = &exp.per_bounce[0];
        assert!((b0.mean - 0.5).abs() < 5.0 * b0.stderr_mean);
        // All photons eventually escape.
        assert!((exp.total_escaped.mean - 1.0).abs() < 5.0 * exp.total_escaped.stderr_mean);
        // The aggregate estimates the independent cavity law.
        let analytic = independent_cavity_second_moment(mean(1.0), tr(0.5), 59)
            .unwrap()
            .second_moment_series;
        assert!((exp.aggregate_second_moment - analytic).abs() < 5.0 * exp.aggregate_stderr);
    }

    #[test]
    fn wave_cavity_aggregate_ignores_transmittance() {
        let trials = 1_000_000;
        let mut values = Vec::new();
        for &a in &[0.2, 0.8] {
            let cutoff = default_i_cutoff(tr(a)).unwrap();
            let exp = run_cavity_experiment(
                TransmissionModel::Wave,
                mean(1.0),
                tr(a),
                trials,
                cutoff,
                RngSeed(7),
            )
            .unwrap();
            assert!(
                (exp.aggregate_second_moment - 3.0).abs() < 5.0 * exp.aggregate_stderr,
                "a = {a}"
            );
            assert!((exp.total_escaped.mean - 1.0).abs() < 5.0 * exp.total_escaped.stderr_mean);
            values.push((exp.aggregate_second_moment, exp.aggregate_stderr));
        }
        let (v1, s1) = values[0];
        let (v2, s2) = values[1];
        assert!((v1 - v2).abs() < 5.0 * (s1 * s1 + s2 * s2).sqrt());
    }

    #[test]
    fn experiments_are_bit_deterministic() {
        let run = || {
            run_transmission_experiment(
                TransmissionModel::Independent,
                mean(2.0),
                tr(0.3),
                100_000,
                RngSeed(99),
            )
            .unwrap()
        };
        assert_eq!(run(), run());

        let cav = || {
            run_cavity_experiment(
                TransmissionModel::Independent,
                mean(2.0),
                tr(0.3),
                100_000,
                30,
                RngSeed(99),
            )
            .unwrap()
        };
        assert_eq!(cav(), cav());
    }

    #[test]
    fn determinism_holds_across_thread_counts() {
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_cavity_experiment(
                    TransmissionModel::Wave,
                    mean(1.0),
                    tr(0.5),
                    100_000,
                    30,
                    RngSeed(4242),
                )
                .unwrap()
            })
        };
        assert_eq!(run_with(1), run_with(4));
    }

    #[test]
    fn bounce_escapes_stay_thermal() {
        // Marginally, bounce-i escapes under the independent model are
        // Bose-Einstein with mean a(1-a)^i m. Chi-square GOF at the 1e-3
        // level; 0.999 quantiles frozen from standard tables.
        const CHI2_Q999: [f64; 19] = [
            10.8275661707,
            13.8155105580,
            16.2662361962,
            18.4668269529,
            20.5150056524,
            22.4577444848,
            24.3218863479,
            26.1244815584,
            27.8771648713,
            29.5882984451,
            31.2641336202,
            32.9094904074,
            34.5281789749,
            36.1232736804,
            37.6972982184,
            39.2523547908,
            40.7902167069,
            42.3123963317,
            43.8201959645,
        ];
        let trials = 1_000_000u64;
        let (m, a) = (1.0, 0.5);
        let mut histograms = vec![vec![0u64; 64]; 3];
        let base = rng(31);
        let mut scratch = Vec::new();
        for trial in 0..trials {
            let mut r = trial_rng(&base, trial);
            let n0 = sample_bose_einstein(mean(m), &mut r);
            simulate_cavity_into(
                TransmissionModel::Independent,
                n0,
                tr(a),
                40,
                &mut r,
                &mut scratch,
            );
            for (i, hist) in histograms.iter_mut().enumerate() {
                let e = scratch[i] as usize;
                hist[e.min(63)] += 1;
            }
        }
        for (i, hist) in histograms.iter().enumerate() {
            let mi = a * (1.0 - a).powi(i as i32) * m;
            let pmf = bose_einstein_pmf(mean(mi), 1e-14).unwrap();
            let gof = chi_square_statistic(hist, &pmf, 20);
            assert!(gof.degrees_of_freedom >= 1 && gof.degrees_of_freedom <= 19);
            let critical = CHI2_Q999[gof.degrees_of_freedom - 1];
            assert!(
                gof.statistic < critical,
                "bounce {i}: chi2 = {} >= {critical} with {} dof",
                gof.statistic,
                gof.degrees_of_freedom
            );
        }
    }
}
