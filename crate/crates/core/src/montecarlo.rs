//! Monte Carlo simulation of the matched-filter detector.
//!
//! Received data follow `Y = alpha_t b*(theta_t) a†(theta_t) S + N` with
//! `N` circularly-symmetric white Gaussian noise of variance `sigma²`
//! (`sigma² / 2` per real dimension). The detector declares a target when
//! `Re(conj(alpha_t) s† A† y) > T_h`. Using `A = I_L ⊗ (b* a†)` the statistic
//! reduces to `Re(conj(alpha_t) · bᵀ Y S† a)`, which costs `O(N_R L)` per
//! trial without forming `A`.
//!
//! Each trial draws one noise matrix and evaluates the statistic under both
//! hypotheses (`Y = N` and `Y = signal + N`). Trials are grouped in blocks of
//! [`BLOCK_TRIALS`]; block `k` draws from ChaCha8 stream `k` of the seed, so
//! blocks can run in any order or in parallel and merge to identical results.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::detection::detection_probability;
use crate::error::{Error, Result};
use crate::special::erfc_inv;
use crate::waveform::{Scenario, WaveformMatrix};
use crate::C64;

pub const MIN_TRIALS: u64 = 10_000;
pub const BLOCK_TRIALS: u64 = 1 << 16;

fn check_shape(waveform: &WaveformMatrix, scenario: &Scenario) -> Result<()> {
    let n_tx = scenario.array().n_tx();
    if waveform.n_tx() != n_tx {
        return Err(Error::DimensionMismatch { expected: n_tx, found: waveform.n_tx() });
    }
    if waveform.code_length() != scenario.code_length() {
        return Err(Error::DimensionMismatch { expected: scenario.code_length(), found: waveform.code_length() });
    }
    Ok(())
}

fn check_p_fa(p_fa: f64) -> Result<()> {
    if p_fa > 0.0 && p_fa <= 0.5 {
        Ok(())
    } else {
        Err(Error::Domain { name: "p_fa", value: p_fa })
    }
}

/// `||A(theta_t) s||² = N_R a†(theta_t) S S† a(theta_t)`.
fn signal_energy(waveform: &WaveformMatrix, scenario: &Scenario) -> Result<f64> {
    Ok(scenario.array().n_rx() as f64 * waveform.projected_power(&scenario.target_steering())?)
}

/// Threshold giving false-alarm rate `p_fa`.
///
/// Under H0 the statistic is zero-mean Gaussian with variance
/// `sigma² |alpha_t|² ||A s||² / 2`, so
/// `T_h = sigma |alpha_t| ||A s|| erfc⁻¹(2 p_fa)`.
pub fn threshold_for_pfa(waveform: &WaveformMatrix, scenario: &Scenario, alpha_t: C64, p_fa: f64) -> Result<f64> {
    check_shape(waveform, scenario)?;
    check_p_fa(p_fa)?;
    let energy = signal_energy(waveform, scenario)?;
    Ok(libm::sqrt(scenario.sigma2() * energy) * alpha_t.norm() * erfc_inv(2.0 * p_fa)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    /// Trials per hypothesis.
    pub trials: u64,
    pub p_fa_hat: f64,
    pub p_d_hat: f64,
    pub p_fa_analytic: f64,
    pub p_d_analytic: f64,
    pub threshold: f64,
    pub seed: u64,
    /// Sample mean of the H0 statistic.
    pub h0_mean: f64,
    /// Sample variance of the H0 statistic.
    pub h0_variance: f64,
    /// `sigma² |alpha_t|² ||A s||² / 2`.
    pub h0_variance_analytic: f64,
}

/// Counts and moments from one block of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockTally {
    pub trials: u64,
    pub false_alarms: u64,
    pub detections: u64,
    pub h0_sum: f64,
    pub h0_sum_sq: f64,
}

/// A prepared simulation, split into independently runnable blocks.
#[derive(Debug, Clone)]
pub struct MonteCarloPlan {
    rx: Vec<C64>,
    /// `S† a(theta_t)`.
    matched: Vec<C64>,
    /// Noise-free `bᵀ Y S† a` under H1.
    signal: C64,
    alpha: C64,
    /// Unit phase of `alpha_t` (1 when `alpha_t = 0`).
    phase: C64,
    /// Threshold on `Re(conj(phase) z)`, i.e. `T_h / |alpha_t|`.
    unit_threshold: f64,
    noise_std: f64,
    threshold: f64,
    p_fa: f64,
    p_d_analytic: f64,
    h0_variance_analytic: f64,
    trials: u64,
    seed: u64,
}

impl MonteCarloPlan {
    pub fn new(
        waveform: &WaveformMatrix,
        scenario: &Scenario,
        alpha_t: C64,
        p_fa: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        check_shape(waveform, scenario)?;
        check_p_fa(p_fa)?;
        if trials < MIN_TRIALS {
            return Err(Error::TooFewTrials { min: MIN_TRIALS, got: trials });
        }
        if !(alpha_t.re.is_finite() && alpha_t.im.is_finite()) {
            return Err(Error::Domain { name: "alpha_t", value: alpha_t.norm() });
        }

        let a_t = scenario.target_steering();
        let rx = scenario.receive_steering().entries().to_vec();
        let projected = waveform.entries().left_project(a_t.entries())?;
        let matched = waveform.entries().adjoint_mul_vec(a_t.entries())?;
        let rx_gain: C64 = rx.iter().map(|b| b * b.conj()).sum();
        let projected_matched: C64 = projected.iter().zip(&matched).map(|(p, m)| p * m).sum();
        let signal = alpha_t * rx_gain * projected_matched;

        let sigma2 = scenario.sigma2();
        let energy = signal_energy(waveform, scenario)?;
        let magnitude = alpha_t.norm();
        let phase = if magnitude > 0.0 { alpha_t / magnitude } else { C64::new(1.0, 0.0) };
        let unit_threshold = libm::sqrt(sigma2 * energy) * erfc_inv(2.0 * p_fa)?;
        let snr = magnitude * magnitude * energy / sigma2;

        Ok(Self {
            rx,
            matched,
            signal,
            alpha: alpha_t,
            phase,
            unit_threshold,
            noise_std: libm::sqrt(0.5 * sigma2),
            threshold: unit_threshold * magnitude,
            p_fa,
            p_d_analytic: detection_probability(snr, p_fa)?,
            h0_variance_analytic: 0.5 * sigma2 * magnitude * magnitude * energy,
            trials,
            seed,
        })
    }

    pub fn block_count(&self) -> u64 {
        self.trials.div_ceil(BLOCK_TRIALS)
    }

    /// Runs block `index`; the last block may be short.
    pub fn run_block(&self, index: u64) -> BlockTally {
        let start = index * BLOCK_TRIALS;
        let count = BLOCK_TRIALS.min(self.trials.saturating_sub(start));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);

        let mut tally = BlockTally { trials: count, ..BlockTally::default() };
        for _ in 0..count {
            let noise = self.noise_statistic(&mut rng);
            let h0 = (self.phase.conj() * noise).re;
            let h1 = (self.phase.conj() * (self.signal + noise)).re;
            if h0 > self.unit_threshold {
                tally.false_alarms += 1;
            }
            if h1 > self.unit_threshold {
                tally.detections += 1;
            }
            let raw = (self.alpha.conj() * noise).re;
            tally.h0_sum += raw;
            tally.h0_sum_sq += raw * raw;
        }
        tally
    }

    /// `bᵀ N S† a` for one fresh noise matrix `N`.
    fn noise_statistic(&self, rng: &mut ChaCha8Rng) -> C64 {
        let mut z = C64::new(0.0, 0.0);
        for m in &self.matched {
            let mut column = C64::new(0.0, 0.0);
            for b in &self.rx {
                let n = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
                column += b * n;
            }
            z += column * self.noise_std * m;
        }
        z
    }

    /// Merges block tallies, which must be given in block order.
    pub fn finish(&self, tallies: &[BlockTally]) -> MonteCarloReport {
        let mut total = BlockTally::default();
        for t in tallies {
            total.trials += t.trials;
            total.false_alarms += t.false_alarms;
            total.detections += t.detections;
            total.h0_sum += t.h0_sum;
            total.h0_sum_sq += t.h0_sum_sq;
        }
        let n = total.trials as f64;
        let mean = total.h0_sum / n;
        let variance = if total.trials > 1 { (total.h0_sum_sq - n * mean * mean) / (n - 1.0) } else { 0.0 };
        MonteCarloReport {
            trials: total.trials,
            p_fa_hat: total.false_alarms as f64 / n,
            p_d_hat: total.detections as f64 / n,
            p_fa_analytic: self.p_fa,
            p_d_analytic: self.p_d_analytic,
            threshold: self.threshold,
            seed: self.seed,
            h0_mean: mean,
            h0_variance: variance.max(0.0),
            h0_variance_analytic: self.h0_variance_analytic,
        }
    }
}

/// Runs every block of a [`MonteCarloPlan`] sequentially.
pub fn monte_carlo_detector(
    waveform: &WaveformMatrix,
    scenario: &Scenario,
    alpha_t: C64,
    p_fa: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let plan = MonteCarloPlan::new(waveform, scenario, alpha_t, p_fa, trials, seed)?;
    let tallies: Vec<BlockTally> = (0..plan.block_count()).map(|k| plan.run_block(k)).collect();
    Ok(plan.finish(&tallies))
}
