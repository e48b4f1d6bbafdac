//! The four subcommands. Each one evaluates core functions, writes one file
//! under the output directory and returns what it wrote for the caller to
//! summarize. No arithmetic beyond unit conversion happens here.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use dfrc_core::detection::{limit_factor, max_snr_closed_form};
use dfrc_core::montecarlo::{BlockTally, MonteCarloPlan};
use dfrc_core::oracle::{gradient_check, oracle_restart, reduced_closed_form, RestartOutcome};
use dfrc_core::{
    design_optimal_waveform, design_via_nullspace, detection_probability, from_db,
    required_waveform_snr, residual_energy, snr_of_waveform, synthesize_comm_signal, to_db,
    zero_loss_angles, Error as CoreError, OracleReport, ReducedProblem, Scenario, C64,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, provenance, write_csv, write_text};

/// `signal-check` fails above this per-sample error.
pub const SIGNAL_TOLERANCE: f64 = 1e-6;
/// Per-sample error the optimal waveform is held to by `verify`.
pub const FIDELITY_TOLERANCE: f64 = 1e-9;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;
pub const PATH_TOLERANCE: f64 = 1e-8;
pub const ORACLE_TOLERANCE: f64 = 1e-6;
pub const GRADIENT_TOLERANCE: f64 = 1e-5;
/// Binomial standard deviations allowed for simulated rates.
pub const RATE_SIGMAS: f64 = 3.0;
/// Standard errors allowed for the H0 moments.
pub const MOMENT_SIGMAS: f64 = 5.0;

/// Reports an infeasible scenario as [`CoreError::Infeasible`].
pub fn feasible_scenario(config: &ExperimentConfig) -> Result<Scenario> {
    let s = config.scenario()?;
    let e_hat = residual_energy(&s);
    if e_hat < 0.0 {
        return Err(CoreError::Infeasible { deficit: -e_hat }.into());
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct SignalCheck {
    pub path: PathBuf,
    pub max_abs_error: f64,
}

impl SignalCheck {
    pub fn passed(&self) -> bool {
        self.max_abs_error <= SIGNAL_TOLERANCE
    }
}

/// Compares `a†(theta_c) S` with `d_c` sample by sample.
pub fn cmd_signal_check(config: &ExperimentConfig) -> Result<SignalCheck> {
    let s = feasible_scenario(config)?;
    let design = design_optimal_waveform(&s)?;
    let synthesized = synthesize_comm_signal(&design.waveform, &s.comm_steering())?;

    let mut max_abs_error: f64 = 0.0;
    let rows: Vec<Vec<String>> = s
        .d_c()
        .iter()
        .zip(&synthesized)
        .enumerate()
        .map(|(k, (d, y))| {
            let err = (y - d).norm();
            max_abs_error = max_abs_error.max(err);
            vec![k.to_string(), fmt_f64(d.re), fmt_f64(d.im), fmt_f64(y.re), fmt_f64(y.im), fmt_f64(err)]
        })
        .collect();

    let mut meta = provenance(config);
    meta.push(format!("max_abs_error = {}", fmt_f64(max_abs_error)));
    let columns = ["sample_index", "desired_re", "desired_im", "synthesized_re", "synthesized_im", "abs_error"];
    let path = write_csv(&config.output_dir, "signal.csv", &meta, &columns, &rows)?;
    Ok(SignalCheck { path, max_abs_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdPoint {
    pub input_snr_db: f64,
    pub waveform_snr_db: f64,
    pub p_d: f64,
}

#[derive(Debug, Clone)]
pub struct PdCurve {
    pub path: PathBuf,
    pub points: Vec<PdPoint>,
    /// Input SNR at which `P_D = 0.9`.
    pub input_snr_db_at_090: f64,
}

/// `P_D` versus input SNR under the optimal waveform.
pub fn cmd_pd_curve(config: &ExperimentConfig) -> Result<PdCurve> {
    let s = feasible_scenario(config)?;
    let waveform = design_optimal_waveform(&s)?.waveform;

    let points = config
        .input_snr_grid_db
        .iter()
        .map(|&db| {
            let snr = snr_of_waveform(&waveform, &s, from_db(db))?;
            Ok(PdPoint { input_snr_db: db, waveform_snr_db: to_db(snr), p_d: detection_probability(snr, config.p_fa)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_unit = snr_of_waveform(&waveform, &s, 1.0)?;
    let input_snr_db_at_090 = to_db(required_waveform_snr(0.9, config.p_fa)? / per_unit);

    let mut meta = provenance(config);
    meta.push(format!("p_fa = {}", fmt_f64(config.p_fa)));
    meta.push(format!("input_snr_db_at_pd_0.9 = {}", fmt_f64(input_snr_db_at_090)));
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![fmt_f64(p.input_snr_db), fmt_f64(p.waveform_snr_db), fmt_f64(p.p_d)])
        .collect();
    let path = write_csv(&config.output_dir, "pd_curve.csv", &meta, &["input_snr_db", "waveform_snr_db", "p_d"], &rows)?;
    Ok(PdCurve { path, points, input_snr_db_at_090 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta_c_deg: f64,
    pub gain: f64,
    pub snr_max_db: f64,
    pub mono_bound_db: f64,
    pub loss_db: f64,
    pub p_d: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub mainlobe_loss_db: f64,
    /// First pattern null beside the target.
    pub exact_null_deg: f64,
    pub exact_null_loss_db: f64,
    pub zero_loss_angles_deg: Vec<f64>,
    pub max_loss_db: f64,
    pub max_loss_theta_deg: f64,
}

#[derive(Debug, Clone)]
pub struct ThetaSweep {
    pub path: PathBuf,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Sweep row for receiver direction `theta_c_deg`.
pub fn sweep_row(base: &Scenario, theta_c_deg: f64, input_snr: f64, p_fa: f64) -> Result<SweepRow> {
    let s = base.with_theta_c(theta_c_deg.to_radians())?;
    let gain = s.gain();
    if residual_energy(&s) < 0.0 {
        return Ok(SweepRow {
            theta_c_deg,
            gain,
            snr_max_db: f64::NAN,
            mono_bound_db: f64::NAN,
            loss_db: f64::NAN,
            p_d: f64::NAN,
            feasible: false,
        });
    }
    let budget = max_snr_closed_form(&s, input_snr)?;
    Ok(SweepRow {
        theta_c_deg,
        gain,
        snr_max_db: to_db(budget.snr_max),
        mono_bound_db: to_db(budget.mono_bound),
        loss_db: budget.loss_db,
        p_d: detection_probability(budget.snr_max, p_fa)?,
        feasible: true,
    })
}

/// Angle of the first transmit pattern null beside `theta_t`.
pub fn first_null(s: &Scenario) -> f64 {
    let offset = 1.0 / (s.array().n_tx() as f64 * s.array().d_tx());
    let sin_t = s.theta_t().sin();
    let sin_null = if sin_t + offset <= 1.0 { sin_t + offset } else { sin_t - offset };
    sin_null.asin()
}

/// Closed-form SNR limit, mono-function bound and loss versus `theta_c`.
pub fn cmd_theta_sweep(config: &ExperimentConfig) -> Result<ThetaSweep> {
    let s = feasible_scenario(config)?;
    let input = from_db(config.input_snr_db);

    let rows = config
        .sweep_angles_deg()
        .par_iter()
        .map(|&deg| sweep_row(&s, deg, input, config.p_fa))
        .collect::<Result<Vec<_>>>()?;

    let mainlobe_loss_db = max_snr_closed_form(&s.with_theta_c(s.theta_t())?, input)?.loss_db;
    let null = first_null(&s);
    let exact_null_loss_db = max_snr_closed_form(&s.with_theta_c(null)?, input)?.loss_db;
    let zero_loss_angles_deg: Vec<f64> = zero_loss_angles(&s)?.into_iter().map(f64::to_degrees).collect();
    let (max_loss_theta_deg, max_loss_db) = rows
        .iter()
        .filter(|r| r.feasible)
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, r| if r.loss_db > acc.1 { (r.theta_c_deg, r.loss_db) } else { acc });
    let summary = SweepSummary {
        mainlobe_loss_db,
        exact_null_deg: null.to_degrees(),
        exact_null_loss_db,
        zero_loss_angles_deg,
        max_loss_db,
        max_loss_theta_deg,
    };

    let mut meta = provenance(config);
    meta.push(format!("input_snr_db = {}", fmt_f64(config.input_snr_db)));
    meta.push(format!("p_fa = {}", fmt_f64(config.p_fa)));
    meta.push(format!("mainlobe_loss_db = {}", fmt_f64(summary.mainlobe_loss_db)));
    meta.push(format!("exact_null_deg = {}", fmt_f64(summary.exact_null_deg)));
    meta.push(format!("exact_null_loss_db = {}", fmt_f64(summary.exact_null_loss_db)));
    let roots: Vec<String> = summary.zero_loss_angles_deg.iter().map(|&x| fmt_f64(x)).collect();
    meta.push(format!("zero_loss_angles_deg = [{}]", roots.join(", ")));
    meta.push(format!("max_sweep_loss_db = {} at theta_c_deg = {}", fmt_f64(max_loss_db), fmt_f64(max_loss_theta_deg)));

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.theta_c_deg),
                fmt_f64(r.gain),
                fmt_f64(r.snr_max_db),
                fmt_f64(r.mono_bound_db),
                fmt_f64(r.loss_db),
                fmt_f64(r.p_d),
                r.feasible.to_string(),
            ]
        })
        .collect();
    let columns = ["theta_c_deg", "gain", "snr_max_db", "mono_bound_db", "loss_db", "p_d", "feasible"];
    let path = write_csv(&config.output_dir, "theta_sweep.csv", &meta, &columns, &table)?;
    Ok(ThetaSweep { path, rows, summary })
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// `key=value` pairs with the measured quantities.
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub path: PathBuf,
    pub checks: Vec<Check>,
    pub text: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Best of `restarts` oracle runs, restarts evaluated in parallel.
pub fn parallel_oracle(s: &Scenario, restarts: usize, max_iters: usize, seed: u64) -> Result<OracleReport> {
    let problem = ReducedProblem::new(s)?;
    let closed = reduced_closed_form(s)?;
    let outcomes: Vec<RestartOutcome> =
        (0..restarts as u64).into_par_iter().map(|r| oracle_restart(&problem, max_iters, seed, r)).collect();
    Ok(OracleReport::from_restarts(closed, &outcomes))
}

/// Monte Carlo detector with blocks evaluated in parallel.
pub fn parallel_monte_carlo(
    waveform: &dfrc_core::WaveformMatrix,
    s: &Scenario,
    alpha_t: C64,
    p_fa: f64,
    trials: u64,
    seed: u64,
) -> Result<dfrc_core::MonteCarloReport> {
    let plan = MonteCarloPlan::new(waveform, s, alpha_t, p_fa, trials, seed)?;
    let tallies: Vec<BlockTally> = (0..plan.block_count()).into_par_iter().map(|k| plan.run_block(k)).collect();
    Ok(plan.finish(&tallies))
}

fn binomial_sd(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn verify_checks(config: &ExperimentConfig, s: &Scenario) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let design = design_optimal_waveform(s)?;

    let synthesized = synthesize_comm_signal(&design.waveform, &s.comm_steering())?;
    let fidelity = synthesized.iter().zip(s.d_c()).map(|(y, d)| (y - d).norm()).fold(0.0, f64::max);
    checks.push(Check::new(
        "comm_fidelity",
        fidelity <= FIDELITY_TOLERANCE,
        format!("max_abs_error={} tol={}", fmt_f64(fidelity), fmt_f64(FIDELITY_TOLERANCE)),
    ));

    let achieved = snr_of_waveform(&design.waveform, s, 1.0)?;
    let closed = max_snr_closed_form(s, 1.0)?.snr_max;
    let rel = if closed > 0.0 { (achieved - closed).abs() / closed } else { achieved.abs() };
    checks.push(Check::new(
        "closed_form_snr",
        rel <= CLOSED_FORM_TOLERANCE,
        format!("relative_error={} tol={}", fmt_f64(rel), fmt_f64(CLOSED_FORM_TOLERANCE)),
    ));

    let via = design_via_nullspace(s)?;
    let scale = design.waveform.entries().as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let path_gap = via.entries().max_abs_diff(design.waveform.entries()) / scale.max(f64::MIN_POSITIVE);
    checks.push(Check::new(
        "path_equivalence",
        path_gap <= PATH_TOLERANCE,
        format!("relative_max_diff={} tol={}", fmt_f64(path_gap), fmt_f64(PATH_TOLERANCE)),
    ));

    let energy_gap = (design.waveform.energy() + design.unused_energy - s.e_t()).abs() / s.e_t();
    checks.push(Check::new(
        "energy_saturation",
        energy_gap <= CLOSED_FORM_TOLERANCE,
        format!("relative_error={}", fmt_f64(energy_gap)),
    ));

    let factor = limit_factor(s.gain(), residual_energy(s), s.array().n_tx(), s.comm_energy());
    let bound = s.e_t() * s.array().n_tx() as f64;
    checks.push(Check::new(
        "mono_bound",
        factor <= bound * (1.0 + 1e-12),
        format!("limit_factor={} bound={}", fmt_f64(factor), fmt_f64(bound)),
    ));

    let oracle = parallel_oracle(s, config.oracle_restarts, config.oracle_max_iters, config.seed)?;
    checks.push(Check::new(
        "oracle_gap",
        oracle.relative_gap.abs() <= ORACLE_TOLERANCE,
        format!(
            "relative_gap={} best={} closed_form={} restarts={} iterations={} converged={}",
            fmt_f64(oracle.relative_gap),
            fmt_f64(oracle.best_value),
            fmt_f64(oracle.closed_form_value),
            oracle.restarts,
            oracle.iterations_total,
            oracle.converged
        ),
    ));

    let grad = gradient_check(s, config.seed)?;
    checks.push(Check::new(
        "gradient_check",
        grad < GRADIENT_TOLERANCE,
        format!("max_relative_error={} tol={}", fmt_f64(grad), fmt_f64(GRADIENT_TOLERANCE)),
    ));

    let alpha = C64::new((from_db(config.input_snr_db) * s.sigma2()).sqrt(), 0.0);
    let mc = parallel_monte_carlo(&design.waveform, s, alpha, config.mc_p_fa, config.mc_trials, config.seed)?;
    let sd_fa = binomial_sd(mc.p_fa_analytic, mc.trials);
    checks.push(Check::new(
        "mc_false_alarm",
        (mc.p_fa_hat - mc.p_fa_analytic).abs() <= RATE_SIGMAS * sd_fa,
        format!(
            "p_fa_hat={} p_fa={} sd={} trials={}",
            fmt_f64(mc.p_fa_hat),
            fmt_f64(mc.p_fa_analytic),
            fmt_f64(sd_fa),
            mc.trials
        ),
    ));
    let sd_d = binomial_sd(mc.p_d_analytic, mc.trials);
    checks.push(Check::new(
        "mc_detection",
        (mc.p_d_hat - mc.p_d_analytic).abs() <= RATE_SIGMAS * sd_d.max(0.5 / mc.trials as f64),
        format!(
            "p_d_hat={} p_d={} sd={} trials={}",
            fmt_f64(mc.p_d_hat),
            fmt_f64(mc.p_d_analytic),
            fmt_f64(sd_d),
            mc.trials
        ),
    ));
    let n = mc.trials as f64;
    let var = mc.h0_variance_analytic;
    let mean_ok = mc.h0_mean.abs() <= MOMENT_SIGMAS * (var / n).sqrt();
    let var_ok = (mc.h0_variance - var).abs() <= MOMENT_SIGMAS * var * (2.0 / (n - 1.0)).sqrt();
    checks.push(Check::new(
        "mc_h0_moments",
        mean_ok && var_ok,
        format!("mean={} variance={} variance_model={}", fmt_f64(mc.h0_mean), fmt_f64(mc.h0_variance), fmt_f64(var)),
    ));
    Ok(checks)
}

/// Runs every check on the configured scenario and writes `verify.txt`.
/// An infeasible scenario yields a single failing `feasibility` check.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    let s = config.scenario()?;
    let e_hat = residual_energy(&s);
    let mut checks = vec![Check::new("feasibility", e_hat >= 0.0, format!("residual_energy={}", fmt_f64(e_hat)))];
    if e_hat >= 0.0 {
        checks.extend(verify_checks(config, &s)?);
    }

    let text = render(config, &checks);
    let path = write_text(&config.output_dir, "verify.txt", &text)?;
    Ok(VerifyReport { path, checks, text })
}

fn render(config: &ExperimentConfig, checks: &[Check]) -> String {
    let mut text = String::new();
    for line in provenance(config) {
        let _ = writeln!(text, "# {line}");
    }
    for c in checks {
        let _ = writeln!(text, "{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let overall = checks.iter().all(|c| c.passed);
    let _ = writeln!(text, "{} overall", if overall { "PASS" } else { "FAIL" });
    text
}

