//! Closed-form detection performance and SNR limits.
//!
//! The matched-filter detector for a known target amplitude in white
//! Gaussian noise achieves
//!
//! ```text
//! P_D = 1/2 erfc( erfc⁻¹(2 P_FA) - sqrt(SNR) ),
//! SNR = N_R |alpha_t|² a†(theta_t) S S† a(theta_t) / sigma².
//! ```
//!
//! Under the communication constraint the largest reachable SNR is
//!
//! ```text
//! SNR_max = N_R |alpha_t|² ( sqrt(ê_t N_T (1 - G²)) + G ||d_c|| )² / sigma²,
//! ```
//!
//! against `|alpha_t|² e_t N_T N_R / sigma²` without it. The two coincide
//! when `G = ||d_c|| / sqrt(e_t N_T)`.
//!
//! Functions here take the input SNR `|alpha_t|² / sigma²` as a linear ratio.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::array::gain;
use crate::error::{Error, Result};
use crate::special::{erfc, erfc_inv};
use crate::waveform::{residual_energy, Scenario, WaveformMatrix, DEGENERACY_TOL};
use crate::to_db;

/// Bracketing resolution for [`zero_loss_angles`], in radians.
pub const ZERO_LOSS_GRID_STEP: f64 = 1e-3;

fn check_p_fa(p_fa: f64) -> Result<()> {
    if p_fa > 0.0 && p_fa <= 0.5 {
        Ok(())
    } else {
        Err(Error::Domain { name: "p_fa", value: p_fa })
    }
}

fn check_snr(name: &'static str, snr: f64) -> Result<()> {
    if snr >= 0.0 && !snr.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { name, value: snr })
    }
}

/// `P_D` of the matched-filter detector at false-alarm rate `p_fa`.
pub fn detection_probability(waveform_snr: f64, p_fa: f64) -> Result<f64> {
    check_snr("waveform_snr", waveform_snr)?;
    check_p_fa(p_fa)?;
    if waveform_snr == 0.0 {
        return Ok(p_fa);
    }
    Ok(0.5 * erfc(erfc_inv(2.0 * p_fa)? - libm::sqrt(waveform_snr)))
}

/// Waveform SNR needed to reach `p_d` at false-alarm rate `p_fa`.
pub fn required_waveform_snr(p_d: f64, p_fa: f64) -> Result<f64> {
    check_p_fa(p_fa)?;
    if !(p_d >= p_fa && p_d < 1.0) {
        return Err(Error::Domain { name: "p_d", value: p_d });
    }
    let root = erfc_inv(2.0 * p_fa)? - erfc_inv(2.0 * p_d)?;
    Ok(root * root)
}

/// One operating point of a detection curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPoint {
    /// `|alpha_t|² / sigma²`, linear.
    pub input_snr: f64,
    /// SNR after transmit/receive processing, linear.
    pub waveform_snr: f64,
    pub p_fa: f64,
    pub p_d: f64,
}

impl DetectionPoint {
    pub fn evaluate(input_snr: f64, waveform_snr: f64, p_fa: f64) -> Result<Self> {
        let p_d = detection_probability(waveform_snr, p_fa)?;
        Ok(Self { input_snr, waveform_snr, p_fa, p_d })
    }
}

/// `N_R · input_snr · a†(theta_t) S S† a(theta_t)`.
pub fn snr_of_waveform(waveform: &WaveformMatrix, scenario: &Scenario, input_snr: f64) -> Result<f64> {
    check_snr("input_snr", input_snr)?;
    let n_tx = scenario.array().n_tx();
    if waveform.n_tx() != n_tx {
        return Err(Error::DimensionMismatch { expected: n_tx, found: waveform.n_tx() });
    }
    if waveform.code_length() != scenario.code_length() {
        return Err(Error::DimensionMismatch {
            expected: scenario.code_length(),
            found: waveform.code_length(),
        });
    }
    let power = waveform.projected_power(&scenario.target_steering())?;
    Ok(scenario.array().n_rx() as f64 * input_snr * power)
}

/// `( sqrt(ê_t N_T (1 - G²)) + G sqrt(comm_energy) )²`, the largest value of
/// `a†(theta_t) S S† a(theta_t)` at gain `G`.
pub fn limit_factor(gain: f64, residual_energy: f64, n_tx: usize, comm_energy: f64) -> f64 {
    let free = libm::sqrt(residual_energy * n_tx as f64 * (1.0 - gain * gain).max(0.0));
    let root = free + gain * libm::sqrt(comm_energy);
    root * root
}

/// Constrained SNR limit, the unconstrained bound and the gap between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBudget {
    pub snr_max: f64,
    /// Bound without the communication constraint.
    pub mono_bound: f64,
    /// `10 log10(mono_bound / snr_max)`, never negative.
    pub loss_db: f64,
    pub gain: f64,
    pub zero_loss_gain: f64,
}

pub fn max_snr_closed_form(scenario: &Scenario, input_snr: f64) -> Result<SnrBudget> {
    max_snr_for_gain(scenario, scenario.gain(), input_snr)
}

/// As [`max_snr_closed_form`] but at an explicit gain instead of the one
/// implied by the scenario's angles.
pub fn max_snr_for_gain(scenario: &Scenario, gain: f64, input_snr: f64) -> Result<SnrBudget> {
    check_snr("input_snr", input_snr)?;
    if !(0.0..=1.0).contains(&gain) {
        return Err(Error::Domain { name: "gain", value: gain });
    }
    let e_hat = feasible_residual(scenario)?;
    let n_tx = scenario.array().n_tx();
    let n_rx = scenario.array().n_rx() as f64;

    let factor = limit_factor(gain, e_hat, n_tx, scenario.comm_energy());
    let mono_factor = scenario.e_t() * n_tx as f64;
    let loss_db = if factor > 0.0 { to_db(mono_factor / factor).max(0.0) } else { f64::INFINITY };

    Ok(SnrBudget {
        snr_max: n_rx * input_snr * factor,
        mono_bound: n_rx * input_snr * mono_factor,
        loss_db,
        gain,
        zero_loss_gain: zero_loss_gain(scenario)?,
    })
}

fn feasible_residual(scenario: &Scenario) -> Result<f64> {
    let e_hat = residual_energy(scenario);
    if e_hat < 0.0 {
        Err(Error::Infeasible { deficit: -e_hat })
    } else {
        Ok(e_hat)
    }
}

/// Gain toward the receiver at which the constraint costs nothing:
/// `G* = ||d_c|| / sqrt(e_t N_T)`.
///
/// With `a0 = sqrt(ê_t N_T)`, `b0 = ||d_c||` and `G = sin(psi)` the limit
/// factor is `(a0 cos psi + b0 sin psi)²`, maximal at `sin psi = b0 / sqrt(a0² + b0²)`
/// where it equals `a0² + b0² = e_t N_T`.
pub fn zero_loss_gain(scenario: &Scenario) -> Result<f64> {
    feasible_residual(scenario)?;
    let ratio = scenario.comm_energy() / (scenario.e_t() * scenario.array().n_tx() as f64);
    Ok(libm::sqrt(ratio).min(1.0))
}

/// Receiver directions at which the dual-function system loses no SNR,
/// bracketed on a [`ZERO_LOSS_GRID_STEP`] grid.
pub fn zero_loss_angles(scenario: &Scenario) -> Result<Vec<f64>> {
    zero_loss_angles_with_step(scenario, ZERO_LOSS_GRID_STEP)
}

/// Sorted roots of `gain(theta_t, theta) = G*` over `[-pi/2, pi/2]`.
///
/// Sign changes of `gain - G*` are bracketed on a uniform grid of width
/// `step` and refined by bisection. Roots where the gain only touches `G*`
/// without crossing are found only if they land on a grid point, so `step`
/// must resolve the mainlobe of the array. When `G* = 1` the roots are the
/// directions whose transmit response equals the target's (the target
/// itself plus any grating lobes), computed directly.
pub fn zero_loss_angles_with_step(scenario: &Scenario, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain { name: "grid step", value: step });
    }
    let target_gain = zero_loss_gain(scenario)?;
    let array = *scenario.array();
    let theta_t = scenario.theta_t();

    if 1.0 - target_gain < DEGENERACY_TOL {
        return Ok(grating_directions(theta_t, array.d_tx()));
    }

    let h = |theta: f64| gain(&array, theta_t, theta).map(|g| g - target_gain);
    let cells = libm::ceil(PI / step) as usize;
    let grid = |k: usize| if k == cells { FRAC_PI_2 } else { -FRAC_PI_2 + k as f64 * step };

    let mut roots = Vec::new();
    let mut a = grid(0);
    let mut ha = h(a)?;
    for k in 1..=cells {
        let b = grid(k);
        let hb = h(b)?;
        if ha == 0.0 {
            roots.push(a);
        } else if ha * hb < 0.0 {
            roots.push(bisect(&h, a, b, ha)?);
        }
        a = b;
        ha = hb;
    }
    if ha == 0.0 {
        roots.push(a);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    Ok(roots)
}

fn bisect(h: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut h_lo: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h(mid)?;
        if h_mid == 0.0 {
            return Ok(mid);
        }
        if (h_mid < 0.0) == (h_lo < 0.0) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Angles with `sin(theta) = sin(theta_t) + m / d` for integer `m`.
fn grating_directions(theta_t: f64, spacing: f64) -> Vec<f64> {
    let s0 = libm::sin(theta_t);
    let reach = libm::ceil(2.0 * spacing) as i64;
    let mut out: Vec<f64> = (-reach..=reach)
        .filter_map(|m| {
            let s = s0 + m as f64 / spacing;
            if m == 0 {
                Some(theta_t)
            } else if (-1.0..=1.0).contains(&s) {
                Some(libm::asin(s))
            } else {
                None
            }
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
