//! Detection limits of a dual-function MIMO radar-communication transmitter.
//!
//! A colocated MIMO array illuminates one point target while a single
//! communication receiver must see a prescribed symbol stream. This crate
//! computes the waveform that maximizes target SNR under that constraint,
//! the resulting SNR and detection probability in closed form, and two
//! independent numerical checks of those closed forms: a projected-gradient
//! search over the constrained problem and a Monte Carlo simulation of the
//! matched-filter detector.
//!
//! Conventions used throughout:
//!
//! - angles are radians in `[-pi/2, pi/2]`, measured from broadside;
//! - array spacings are in wavelengths;
//! - SNR values are linear; decibels only appear in [`to_db`] / [`from_db`];
//! - a waveform matrix has one row per transmit element and one column per
//!   code sample.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod array;
pub mod detection;
mod error;
pub mod linalg;
pub mod montecarlo;
pub mod oracle;
pub mod special;
pub mod waveform;

pub use array::{beampattern, gain, steering_vector, ArrayConfig, ArrayKind, SteeringVector};
pub use detection::{
    detection_probability, max_snr_closed_form, max_snr_for_gain, required_waveform_snr,
    snr_of_waveform, zero_loss_angles, zero_loss_angles_with_step, zero_loss_gain,
    DetectionPoint, SnrBudget,
};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use montecarlo::{monte_carlo_detector, threshold_for_pfa, MonteCarloPlan, MonteCarloReport};
pub use oracle::{gradient_check, oracle_maximize, OracleReport};
pub use special::{erfc, erfc_inv};
pub use waveform::{
    design_optimal_waveform, design_via_nullspace, null_space_basis, residual_energy,
    synthesize_comm_signal, DegenerateCase, DesignResult, NullSpaceBasis, ReducedProblem, Scenario,
    WaveformMatrix,
};

/// Double-precision complex number.
pub type C64 = num_complex::Complex64;

/// Linear power ratio to decibels.
pub fn to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

/// Decibels to linear power ratio.
pub fn from_db(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}
