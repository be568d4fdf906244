use std::fmt;

use gnfield_core::fit::{loglog_slope, logspace};
use gnfield_core::fock::{evolve_adaptive, Environment, FockOracle, FockSpaceSpec, OracleOptions};
use gnfield_core::gaussian::temperature_for_occupation;
use gnfield_core::large_n::{central_scaling, gcs_symbols, group_element, GlobalOps};
use gnfield_core::reduced::{evolve_exact, evolve_short_time};
use gnfield_core::rng::sample_chunked;
use gnfield_core::spin::{as_two_mode, spin_thermal, SpinEnvSpec};
use gnfield_core::stochastic::{evolve_stoc_mc, matched_amplitude, sigma_analytic, OuParams};
use gnfield_core::two_mode::{coefficients, derived_constants};
use gnfield_core::{Complex64, Error, GaussianState, ModelKind, ThermalOccupation, TwoModeParams};
use rand::Rng;

use crate::config::{Experiment, ScenarioConfig};
use crate::table::ResultTable;

#[derive(Debug)]
pub enum RunError {
    /// Parameters are valid JSON but describe an impossible scenario.
    Usage(String),
    /// The oracle would exceed its dimension cap.
    Resource(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "invalid scenario: {m}"),
            RunError::Resource(m) => write!(f, "resource limit: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionCap { .. } => RunError::Resource(e.to_string()),
            other => RunError::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<ResultTable, RunError>;

/// Runs one scenario. Deterministic given the resolved configuration.
pub fn run(config: &ScenarioConfig) -> Outcome {
    match config.experiment {
        Experiment::E1Unitarity => e1_unitarity(config),
        Experiment::E2OracleBosonic => e2_oracle_bosonic(config),
        Experiment::E3ShorttimeScaling => e3_shorttime_scaling(config),
        Experiment::E4StochasticMatch => e4_stochastic_match(config),
        Experiment::E5SpinEnv => e5_spin_env(config),
        Experiment::E6LargeNScaling => e6_large_n_scaling(config),
        Experiment::E7SpectrumSpread => e7_spectrum_spread(config),
    }
}

fn seed(config: &ScenarioConfig) -> u64 {
    config.seed.expect("validated: stochastic experiments carry a seed")
}

fn e1_unitarity(c: &ScenarioConfig) -> Outcome {
    let (draws, block) = (c.usize("draws"), c.usize("block"));
    let (fmax, lmax, tmax, tol) = (c.f64("freq_max"), c.f64("lambda_max"), c.f64("t_max"), c.f64("tolerance"));
    // Each draw evaluates both coupling types on the same parameters.
    let residuals: Vec<[f64; 2]> = sample_chunked(seed(c), draws, |rng, _| {
        let nu = fmax * (1.0 - rng.random::<f64>());
        let omega = fmax * (1.0 - rng.random::<f64>());
        let lambda = lmax * rng.random::<f64>();
        let t = tmax * rng.random::<f64>();
        let p = TwoModeParams::new(nu, omega, lambda).expect("positive frequencies");
        ModelKind::ALL.map(|k| {
            let co = coefficients(&p, k, t);
            co.unitarity_residual().abs() / co.mu_abs2.max(1.0)
        })
    });
    let mut table = ResultTable::new(&["block", "model", "draws", "max_scaled_residual"]);
    for (b, chunk) in residuals.chunks(block).enumerate() {
        for (j, kind) in ModelKind::ALL.iter().enumerate() {
            let worst = chunk.iter().map(|r| r[j]).fold(0.0, f64::max);
            table.push(vec![b.into(), kind.name().into(), chunk.len().into(), worst.into()], worst < tol);
        }
    }
    Ok(table)
}

/// Times `[0, 2/Δ]` (`2/Λ` when the gap closes).
fn horizon_times(p: &TwoModeParams, kind: ModelKind, n: usize) -> Vec<f64> {
    let gap = derived_constants(p, kind).gap;
    let end = if gap > 0.0 { 2.0 / gap } else { 2.0 / p.lambda.max(1e-300) };
    if n == 1 {
        return vec![end];
    }
    (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
}

struct OracleComparison {
    t: f64,
    error: f64,
    leakage: f64,
}

/// Oracle vs exact reduced map for the environment `env` (its mean frequency
/// is the collective one).
fn compare_with_oracle(
    env: Environment,
    kind: ModelKind,
    nu: f64,
    lambda: f64,
    n_thermal: f64,
    alpha: Complex64,
    d_start: usize,
    times: &[f64],
) -> Result<(Vec<OracleComparison>, usize), RunError> {
    let omega = env.reference_frequency();
    let spec = FockSpaceSpec::new(nu, d_start, env, kind)?;
    let temperature = temperature_for_occupation(omega, n_thermal)?;
    let input = GaussianState::coherent(alpha);
    let run = evolve_adaptive(&spec, &input, temperature, times, d_start, OracleOptions::default())?;
    if run.capped {
        return Err(RunError::Resource(format!(
            "truncation leakage above tolerance at the dimension cap (truncation {})",
            run.truncation
        )));
    }
    let p = TwoModeParams::new(nu, omega, lambda)?;
    let occ = ThermalOccupation::bosonic(n_thermal)?;
    let rows = run
        .results
        .iter()
        .map(|r| OracleComparison {
            t: r.t,
            error: r.state.moment_distance(&evolve_exact(&input, &occ, &p, kind, r.t)),
            leakage: r.leakage,
        })
        .collect();
    Ok((rows, run.truncation))
}

fn e2_oracle_bosonic(c: &ScenarioConfig) -> Outcome {
    let (nu, omega, lambda, n_th) = (c.f64("nu"), c.f64("omega"), c.f64("lambda"), c.f64("n_thermal"));
    let alpha = Complex64::new(c.f64("alpha_re"), c.f64("alpha_im"));
    let tol = c.f64("tolerance");
    let n = c.usize("n_modes");
    let mut table = ResultTable::new(&["model", "t", "moment_error", "leakage", "truncation"]);
    for kind in c.models("model") {
        let p = TwoModeParams::new(nu, omega, lambda)?;
        let times = horizon_times(&p, kind, c.usize("n_times"));
        let env = Environment::uniform_bosonic(n, omega, lambda, c.usize("truncation"));
        let (rows, d) = compare_with_oracle(env, kind, nu, lambda, n_th, alpha, c.usize("truncation"), &times)?;
        for r in rows {
            table.push(vec![kind.name().into(), r.t.into(), r.error.into(), r.leakage.into(), d.into()], r.error < tol);
        }
    }
    Ok(table)
}

fn e3_shorttime_scaling(c: &ScenarioConfig) -> Outcome {
    let p = TwoModeParams::new(c.f64("nu"), c.f64("omega"), c.f64("lambda"))?;
    let input = GaussianState::thermal(c.f64("input_n"));
    let (t_min, t_max) = (c.f64("t_min"), c.f64("t_max"));
    if t_min >= t_max {
        return Err(RunError::Usage("t_min must be below t_max".into()));
    }
    let times = logspace(t_min, t_max, c.usize("n_points").max(2));
    let tol = c.f64("slope_tolerance");
    let mut table = ResultTable::new(&["model", "n_thermal", "t", "moment_error", "slope"]);
    for kind in c.models("model") {
        for n in c.f64_list("n_thermal") {
            let occ = ThermalOccupation::bosonic(n)?;
            let errors: Vec<f64> = times
                .iter()
                .map(|&t| {
                    let exact = evolve_exact(&input, &occ, &p, kind, t);
                    exact.moment_distance(&evolve_short_time(&input, &occ, &p, kind, t).state)
                })
                .collect();
            let slope = loglog_slope(&times, &errors).slope;
            let ok = (slope - 2.0).abs() <= tol;
            for (&t, &e) in times.iter().zip(&errors) {
                table.push(vec![kind.name().into(), n.into(), t.into(), e.into(), slope.into()], ok);
            }
        }
    }
    Ok(table)
}

fn e4_stochastic_match(c: &ScenarioConfig) -> Outcome {
    let (lambda, n, tau, nu) = (c.f64("lambda"), c.f64("n_thermal"), c.f64("tau"), c.f64("nu"));
    let g = matched_amplitude(lambda, n, tau);
    let params = OuParams::with_detuning(g, tau, nu + c.f64("detuning"), c.f64("detuning"))?;
    let z_max = c.f64("z_max");
    let mut table = ResultTable::new(&[
        "t",
        "empirical_sigma",
        "analytic_sigma",
        "standard_error",
        "z_analytic",
        "short_time_variance",
        "z_short_time",
    ]);
    for t in c.f64_list("times") {
        let est = evolve_stoc_mc(&GaussianState::vacuum(), &params, nu, t, c.usize("n_traj"), seed(c))?;
        let analytic = sigma_analytic(&params, t)?;
        // Per-quadrature variance added by the short-time Gaussian-noise map.
        let short = 0.5 * lambda * lambda * t * t * (n + 0.5);
        let (emp, se) = (est.alpha.cov[0], est.alpha.cov_se[0]);
        let z = (emp - analytic) / se;
        let z_short = (emp - short) / se;
        table.push(
            vec![t.into(), emp.into(), analytic.into(), se.into(), z.into(), short.into(), z_short.into()],
            z.abs() < z_max,
        );
    }
    table.note("G", g);
    Ok(table)
}

fn e5_spin_env(c: &ScenarioConfig) -> Outcome {
    let (n, f, g, nu, t) = (c.usize("n_spins"), c.f64("f"), c.f64("g"), c.f64("nu"), c.f64("t"));
    let temps = c.f64_list("temperatures");
    let input = GaussianState::vacuum();
    let mut table = ResultTable::new(&["model", "temperature", "m", "n_ts", "lambda_s", "discrepancy", "leakage"]);
    for kind in c.models("model") {
        let couplings = vec![Complex64::new(g / (n as f64).sqrt(), 0.0); n];
        let spec = FockSpaceSpec::new(nu, c.usize("truncation"), Environment::Spins { f, couplings }, kind)?;
        let mut oracle = FockOracle::new(&spec);
        let mut previous = f64::INFINITY;
        for &temp in &temps {
            let env = SpinEnvSpec::uniform(n, f, g, temp)?;
            let th = spin_thermal(&env)?;
            let (p, occ) = as_two_mode(&env, nu)?;
            let map = evolve_short_time(&input, &occ, &p, kind, t).state;
            let r = oracle.evolve_many(&input, temp, &[t], OracleOptions::default())?.remove(0);
            // In units of the leading added variance.
            let disc = r.state.moment_distance(&map) / (g * g * t * t);
            let ok = disc < previous && !r.leakage_flag;
            previous = disc;
            table.push(
                vec![kind.name().into(), temp.into(), th.m.into(), th.n_ts.into(), th.lambda_s.into(), disc.into(), r.leakage.into()],
                ok,
            );
        }
    }
    Ok(table)
}

fn e6_large_n_scaling(c: &ScenarioConfig) -> Outcome {
    let mut table = ResultTable::new(&["quantity", "n", "value", "reference"]);
    let ns = c.usize_list("n_values");
    let tol = c.f64("slope_tolerance");
    let rel = central_scaling([1.0, 1.0], [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)], &ns)?;
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = if ns.len() >= 2 { loglog_slope(&x, &rel).slope } else { f64::NAN };
    let ok = (slope + 1.0).abs() <= tol;
    for (&n, &r) in ns.iter().zip(&rel) {
        table.push(vec!["relative_central".into(), n.into(), r.into(), slope.into()], ok);
    }

    let (eps, bs, d) = (c.f64("eps"), c.f64("beta_scaled"), c.usize("truncation"));
    let mut fl = Vec::new();
    let sym_ns = c.usize_list("symbol_n_values");
    for &n in &sym_ns {
        let beta = Complex64::new(bs / (n as f64).sqrt(), 0.0);
        let ops = GlobalOps::uniform(n, d)?;
        let s = gcs_symbols(eps, beta, &ops);
        let zeta = group_element(eps, beta).zeta;
        let b_err = (s.b - zeta).norm();
        table.push(
            vec!["b_symbol_error".into(), n.into(), b_err.into(), beta.norm_sqr().into()],
            b_err <= beta.norm_sqr() && !s.edge_flag,
        );
        table.push(
            vec!["n_bb_dagger_minus_one".into(), n.into(), (n as f64 * s.bb_dag.re - 1.0).into(), (n as f64 * zeta.norm_sqr()).into()],
            (n as f64 * (s.bb_dag.re - zeta.norm_sqr()) - 1.0).abs() < 1e-6,
        );
        table.push(vec!["fluctuation".into(), n.into(), s.fluctuation().into(), (1.0 / n as f64).into()], (s.fluctuation() * n as f64 - 1.0).abs() < 1e-6);
        fl.push(s.fluctuation());
    }
    if sym_ns.len() >= 2 {
        let x: Vec<f64> = sym_ns.iter().map(|&n| n as f64).collect();
        let s = loglog_slope(&x, &fl).slope;
        table.note("fluctuation_slope", s);
    }
    table.note("central_slope", slope);
    Ok(table)
}

fn e7_spectrum_spread(c: &ScenarioConfig) -> Outcome {
    let (nu, omega, lambda, n_th) = (c.f64("nu"), c.f64("omega"), c.f64("lambda"), c.f64("n_thermal"));
    let alpha = Complex64::new(c.f64("alpha_re"), c.f64("alpha_im"));
    let n = c.usize("n_modes");
    let spreads = c.f64_list("spreads");
    let mut table = ResultTable::new(&["model", "spread", "max_reduction_error", "truncation"]);
    for kind in c.models("model") {
        let p = TwoModeParams::new(nu, omega, lambda)?;
        let times = horizon_times(&p, kind, c.usize("n_times"));
        let mut previous = f64::NEG_INFINITY;
        for &s in &spreads {
            let omegas = spread_frequencies(omega, s, n);
            let env = Environment::spread_bosonic(&omegas, lambda, c.usize("truncation"));
            let (rows, d) = compare_with_oracle(env, kind, nu, lambda, n_th, alpha, c.usize("truncation"), &times)?;
            let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
            table.push(vec![kind.name().into(), s.into(), worst.into(), d.into()], worst > previous);
            previous = worst;
        }
    }
    Ok(table)
}

/// `N` frequencies evenly spread over `ω(1 ± s)`.
pub fn spread_frequencies(omega: f64, s: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![omega];
    }
    (0..n).map(|k| omega * (1.0 - s + 2.0 * s * k as f64 / (n - 1) as f64)).collect()
}
