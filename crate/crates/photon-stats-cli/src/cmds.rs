//! One table builder per subcommand. Builders validate domain inputs
//! through the library types and return its errors untouched; `main`
//! translates them to exit codes.

use photon_stats::{
    bose_einstein_pmf, build_bounce_series, default_i_cutoff, default_i_max,
    einstein_second_moment, graybody_density, independent_cavity_second_moment,
    binomial_thinning, kirchhoff_mean_check, mean_occupancy, run_cavity_experiment,
    run_transmission_experiment, wave_cavity_second_moment, wave_transmit, Constants64, Mean64,
    Result, RngSeed, SampleStats, Transmittance64, TransmissionModel,
};

use crate::output::{Cell, Table};

/// How the run's generator is keyed and partitioned; recorded in metadata
/// so a stochastic table is reproducible from its own header.
const RNG_DESCRIPTION: &str = "chacha8, one stream per trial";

fn model_name(model: TransmissionModel) -> &'static str {
    match model {
        TransmissionModel::Independent => "independent",
        TransmissionModel::Wave => "wave",
    }
}

/// Thermal photon number distribution table: one row per stored count.
pub fn pmf(mean: f64, tail_tol: f64) -> Result<Table> {
    let mean = Mean64::new(mean)?;
    let p = bose_einstein_pmf(mean, tail_tol)?;
    let mut table = Table::new("pmf", vec!["n", "probability"]);
    table.meta("mean", Cell::Float(mean.value()));
    table.meta("tail_tol", Cell::Float(tail_tol));
    table.meta("tail_mass", Cell::Float(p.tail_mass()));
    for (n, &prob) in p.probs().iter().enumerate() {
        table.row(vec![Cell::Int(n as u64), Cell::Float(prob)]);
    }
    Ok(table)
}

/// Single-pass transmission table: input and output distributions side by
/// side, with mean and mean-scaling-residual footer rows.
pub fn transmit(model: TransmissionModel, mean: f64, a: f64, tail_tol: f64) -> Result<Table> {
    let mean = Mean64::new(mean)?;
    let a = Transmittance64::new(a)?;
    let p_in = bose_einstein_pmf(mean, tail_tol)?;
    let p_out = match model {
        TransmissionModel::Independent => binomial_thinning(&p_in, a),
        TransmissionModel::Wave => wave_transmit(&p_in, a),
    };
    let mut table = Table::new("transmit", vec!["n", "p_in", "p_out"]);
    table.meta("model", Cell::str(model_name(model)));
    table.meta("mean", Cell::Float(mean.value()));
    table.meta("a", Cell::Float(a.value()));
    table.meta("tail_tol", Cell::Float(tail_tol));
    table.meta("input_tail_mass", Cell::Float(p_in.tail_mass()));
    table.meta("output_tail_mass", Cell::Float(p_out.tail_mass()));
    for n in 0..=p_in.n_max() {
        table.row(vec![
            Cell::Int(n as u64),
            Cell::Float(p_in.prob(n)),
            Cell::Float(p_out.prob(n)),
        ]);
    }
    table.row(vec![
        Cell::str("mean"),
        Cell::Float(p_in.moments().mean),
        Cell::Float(p_out.moments().mean),
    ]);
    table.row(vec![
        Cell::str("kirchhoff_residual"),
        Cell::Empty,
        Cell::Float(kirchhoff_mean_check(&p_in, &p_out, a)),
    ]);
    Ok(table)
}

/// Multi-bounce escape decomposition: per-bounce weight and moments, then
/// aggregate summary rows comparing the series, its closed form, and the
/// lossless reference.
pub fn cavity(
    model: TransmissionModel,
    mean: f64,
    a: f64,
    i_max: Option<usize>,
    tail_tol: f64,
) -> Result<Table> {
    let mean = Mean64::new(mean)?;
    let a = Transmittance64::new(a)?;
    let i_max = match i_max {
        Some(v) => v,
        None => default_i_max(a)?,
    };
    let series = build_bounce_series(model, mean, a, i_max, tail_tol)?;
    let report = match model {
        TransmissionModel::Independent => independent_cavity_second_moment(mean, a, i_max)?,
        TransmissionModel::Wave => wave_cavity_second_moment(mean, a, i_max)?,
    };

    let mut table = Table::new(
        "cavity",
        vec!["i", "weight", "bounce_mean", "bounce_second_moment"],
    );
    table.meta("model", Cell::str(model_name(model)));
    table.meta("mean", Cell::Float(mean.value()));
    table.meta("a", Cell::Float(a.value()));
    table.meta("i_max", Cell::Int(i_max as u64));
    table.meta("tail_tol", Cell::Float(tail_tol));
    if model == TransmissionModel::Independent {
        table.meta(
            "bounce_rows_note",
            Cell::str(
                "rows are the escape-count laws per bounce; \
                 only the wave model admits a weighted pointwise decomposition",
            ),
        );
    }
    for (i, (weight, pmf)) in series
        .weights()
        .iter()
        .zip(series.per_bounce())
        .enumerate()
    {
        let moments = pmf.moments();
        table.row(vec![
            Cell::Int(i as u64),
            Cell::Float(*weight),
            Cell::Float(moments.mean),
            Cell::Float(moments.second_moment),
        ]);
    }
    table.row(vec![
        Cell::str("residual_weight"),
        Cell::Float(series.residual_weight()),
        Cell::Empty,
        Cell::Empty,
    ]);
    for (label, value) in [
        ("second_moment_series", report.second_moment_series),
        ("second_moment_closed", report.second_moment_closed),
        ("einstein_reference", einstein_second_moment(mean)),
        ("truncation_residual", report.truncation_residual),
    ] {
        table.row(vec![
            Cell::str(label),
            Cell::Empty,
            Cell::Empty,
            Cell::Float(value),
        ]);
    }
    Ok(table)
}

fn z_score(estimate: f64, analytic: f64, stderr: f64) -> Cell {
    let diff = estimate - analytic;
    if diff == 0.0 {
        Cell::Float(0.0)
    } else if stderr == 0.0 {
        Cell::Empty
    } else {
        Cell::Float(diff / stderr)
    }
}

fn stats_row(label: impl Into<String>, stats: &SampleStats, analytic: f64) -> Vec<Cell> {
    vec![
        Cell::str(label),
        Cell::Int(stats.count),
        Cell::Float(stats.mean),
        Cell::Float(stats.stderr_mean),
        Cell::Float(analytic),
        z_score(stats.mean, analytic, stats.stderr_mean),
    ]
}

fn second_moment_row(label: impl Into<String>, stats: &SampleStats, analytic: f64) -> Vec<Cell> {
    vec![
        Cell::str(label),
        Cell::Int(stats.count),
        Cell::Float(stats.second_moment),
        Cell::Float(stats.stderr_second_moment),
        Cell::Float(analytic),
        z_score(stats.second_moment, analytic, stats.stderr_second_moment),
    ]
}

/// Stochastic cross-check table: estimates with standard errors next to
/// their analytic targets and the resulting z-scores.
#[allow(clippy::too_many_arguments)]
pub fn montecarlo(
    model: TransmissionModel,
    mean: f64,
    a: f64,
    trials: u64,
    seed: u64,
    cavity: bool,
    cutoff: Option<usize>,
) -> Result<Table> {
    let mean = Mean64::new(mean)?;
    let a = Transmittance64::new(a)?;
    let m = mean.value();
    let einstein = einstein_second_moment(mean);

    let mut table = Table::new(
        "montecarlo",
        vec!["quantity", "count", "estimate", "stderr", "analytic", "z_score"],
    );
    table.meta("model", Cell::str(model_name(model)));
    table.meta("mean", Cell::Float(m));
    table.meta("a", Cell::Float(a.value()));
    table.meta("trials", Cell::Int(trials));
    table.meta("seed", Cell::Int(seed));
    table.meta("rng", Cell::str(RNG_DESCRIPTION));
    table.meta("cavity", Cell::Bool(cavity));

    if cavity {
        let i_cutoff = match cutoff {
            Some(v) => v,
            None => default_i_cutoff(a)?,
        };
        let exp = run_cavity_experiment(model, mean, a, trials, i_cutoff, RngSeed(seed))?;
        table.meta("i_cutoff", Cell::Int(i_cutoff as u64));
        table.meta("residual_trials", Cell::Int(exp.residual_trials));
        table.meta("residual_photons", Cell::Int(exp.residual_photons));

        let keep = 1.0 - a.value();
        for (i, stats) in exp.per_bounce.iter().enumerate() {
            let analytic = a.value() * keep.powi(i as i32) * m;
            table.row(stats_row(format!("bounce_{i}_mean"), stats, analytic));
        }
        table.row(stats_row("total_mean", &exp.total_escaped, m));
        table.row(second_moment_row(
            "total_second_moment",
            &exp.total_escaped,
            einstein,
        ));
        // The aggregate discriminates the models: summing per-bounce second
        // moments only reproduces the lossless value under wave
        // transmission.
        let aggregate_analytic = match model {
            TransmissionModel::Independent => {
                independent_cavity_second_moment(mean, a, i_cutoff.saturating_sub(1))?
                    .second_moment_closed
            }
            TransmissionModel::Wave => einstein,
        };
        table.row(vec![
            Cell::str("aggregate_second_moment"),
            Cell::Int(trials),
            Cell::Float(exp.aggregate_second_moment),
            Cell::Float(exp.aggregate_stderr),
            Cell::Float(aggregate_analytic),
            z_score(
                exp.aggregate_second_moment,
                aggregate_analytic,
                exp.aggregate_stderr,
            ),
        ]);
    } else {
        let stats = run_transmission_experiment(model, mean, a, trials, RngSeed(seed))?;
        let out_mean = a.value() * m;
        let out_second = match model {
            TransmissionModel::Independent => {
                einstein_second_moment(Mean64::new(out_mean)?)
            }
            TransmissionModel::Wave => a.value() * einstein,
        };
        table.row(stats_row("mean", &stats, out_mean));
        table.row(second_moment_row("second_moment", &stats, out_second));
    }
    Ok(table)
}

/// Model discrimination table: the two cavity aggregates and their gap,
/// over a transmittance grid.
pub fn compare(mean: f64, a_grid: &[f64]) -> Result<Table> {
    let mean = Mean64::new(mean)?;
    let mut table = Table::new(
        "compare",
        vec![
            "a",
            "independent_second_moment",
            "wave_second_moment",
            "deficit",
        ],
    );
    table.meta("mean", Cell::Float(mean.value()));
    let grid_text: Vec<String> = a_grid.iter().map(|v| format!("{v}")).collect();
    table.meta("a_grid", Cell::str(grid_text.join(",")));
    for &a in a_grid {
        let a = Transmittance64::new(a)?;
        let i_max = default_i_max(a)?;
        let independent = independent_cavity_second_moment(mean, a, i_max)?.second_moment_closed;
        let wave = wave_cavity_second_moment(mean, a, i_max)?.second_moment_closed;
        table.row(vec![
            Cell::Float(a.value()),
            Cell::Float(independent),
            Cell::Float(wave),
            Cell::Float(wave - independent),
        ]);
    }
    Ok(table)
}

/// Occupancy and spectral density at one frequency point, given either the
/// reduced frequency directly or a physical (omega, temperature) pair.
pub fn planck(
    x: Option<f64>,
    omega: Option<f64>,
    temperature: Option<f64>,
    a: f64,
) -> Result<Table> {
    let a = Transmittance64::new(a)?;
    let consts = Constants64::si();
    let mut table = Table::new(
        "planck",
        vec!["x", "mean_occupancy", "spectral_density", "graybody_density"],
    );
    table.meta("a", Cell::Float(a.value()));

    let row = match (x, omega, temperature) {
        (Some(x), None, None) => {
            let xr = photon_stats::ReducedFrequency::new(x)?;
            let occupancy = mean_occupancy(xr)?;
            table.meta("x", Cell::Float(xr.value()));
            // Densities need an absolute frequency scale, which the
            // dimensionless input does not carry.
            vec![
                Cell::Float(xr.value()),
                Cell::Float(occupancy.value()),
                Cell::Empty,
                Cell::Empty,
            ]
        }
        (None, Some(omega), Some(temperature)) => {
            let xr = consts.reduced_frequency(omega, temperature)?;
            let occupancy = mean_occupancy(xr)?;
            let blackbody = photon_stats::spectral_density(omega, temperature, &consts)?;
            let graybody = graybody_density(omega, temperature, a, &consts)?;
            table.meta("omega", Cell::Float(omega));
            table.meta("temperature", Cell::Float(temperature));
            table.meta("hbar", Cell::Float(consts.hbar));
            table.meta("c", Cell::Float(consts.c));
            table.meta("k", Cell::Float(consts.k));
            vec![
                Cell::Float(xr.value()),
                Cell::Float(occupancy.value()),
                Cell::Float(blackbody),
                Cell::Float(graybody),
            ]
        }
        _ => unreachable!("argument parsing enforces x xor (omega, temperature)"),
    };
    table.row(row);
    Ok(table)
}
