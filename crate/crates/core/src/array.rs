//! Uniform linear array geometry, steering vectors and transmit beampattern.
//!
//! Element `k` (0-based) of a steering vector toward angle `theta` is
//! `exp(+i 2 pi d k sin(theta))`, `d` being the spacing in wavelengths.
//! Element 0 is the phase reference. Everything downstream depends on
//! inner products only, so the sign convention is immaterial as long as it
//! is used consistently.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Which aperture a steering vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Transmit,
    Receive,
}

/// Colocated transmit and receive uniform linear arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_tx: usize,
    n_rx: usize,
    d_tx: f64,
    d_rx: f64,
}

impl ArrayConfig {
    /// Element counts and inter-element spacings (in wavelengths).
    pub fn new(n_tx: usize, n_rx: usize, d_tx: f64, d_rx: f64) -> Result<Self> {
        if n_tx < 2 {
            return Err(Error::InvalidArray("at least two transmit elements are required"));
        }
        if n_rx < 1 {
            return Err(Error::InvalidArray("at least one receive element is required"));
        }
        if !(d_tx.is_finite() && d_tx > 0.0) {
            return Err(Error::InvalidArray("transmit spacing must be finite and positive"));
        }
        if !(d_rx.is_finite() && d_rx > 0.0) {
            return Err(Error::InvalidArray("receive spacing must be finite and positive"));
        }
        Ok(Self { n_tx, n_rx, d_tx, d_rx })
    }

    /// Half-wavelength arrays with the given element counts.
    pub fn half_wavelength(n_tx: usize, n_rx: usize) -> Result<Self> {
        Self::new(n_tx, n_rx, 0.5, 0.5)
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn d_tx(&self) -> f64 {
        self.d_tx
    }

    pub fn d_rx(&self) -> f64 {
        self.d_rx
    }

    fn elements(&self, kind: ArrayKind) -> (usize, f64) {
        match kind {
            ArrayKind::Transmit => (self.n_tx, self.d_tx),
            ArrayKind::Receive => (self.n_rx, self.d_rx),
        }
    }
}

/// Array response toward one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    entries: Vec<C64>,
    angle: f64,
    kind: ArrayKind,
}

impl SteeringVector {
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn from_entries(entries: Vec<C64>, angle: f64, kind: ArrayKind) -> Self {
        Self { entries, angle, kind }
    }

    /// `self† other`.
    pub fn inner(&self, other: &SteeringVector) -> C64 {
        linalg::dot(&self.entries, &other.entries)
    }
}

pub(crate) fn check_angle(angle: f64) -> Result<()> {
    if angle.is_finite() && angle.abs() <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::AngleDomain { angle })
    }
}

pub fn steering_vector(config: &ArrayConfig, angle: f64, kind: ArrayKind) -> Result<SteeringVector> {
    check_angle(angle)?;
    let (n, spacing) = config.elements(kind);
    let step = 2.0 * PI * spacing * libm::sin(angle);
    let entries = (0..n)
        .map(|k| {
            let (s, c) = libm::sincos(step * k as f64);
            C64::new(c, s)
        })
        .collect();
    Ok(SteeringVector { entries, angle, kind })
}

/// Normalized transmit beampattern `a†(theta_c) a(theta_t) / N_T`.
pub fn beampattern(config: &ArrayConfig, theta_t: f64, theta_c: f64) -> Result<C64> {
    check_angle(theta_t)?;
    check_angle(theta_c)?;
    if theta_t == theta_c {
        return Ok(C64::new(1.0, 0.0));
    }
    let a_t = steering_vector(config, theta_t, ArrayKind::Transmit)?;
    let a_c = steering_vector(config, theta_c, ArrayKind::Transmit)?;
    Ok(a_c.inner(&a_t) / config.n_tx() as f64)
}

/// Normalized gain `|B(theta_t, theta_c)|`, clamped to `[0, 1]` against rounding.
pub fn gain(config: &ArrayConfig, theta_t: f64, theta_c: f64) -> Result<f64> {
    Ok(beampattern(config, theta_t, theta_c)?.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ula16() -> ArrayConfig {
        ArrayConfig::half_wavelength(16, 16).unwrap()
    }

    #[test]
    fn broadside_is_all_ones() {
        let a = steering_vector(&ula16(), 0.0, ArrayKind::Transmit).unwrap();
        assert_eq!(a.len(), 16);
        assert!(a.entries().iter().all(|z| *z == C64::new(1.0, 0.0)));
    }

    #[test]
    fn end_of_scan_half_wavelength() {
        let cfg = ArrayConfig::half_wavelength(2, 1).unwrap();
        let a = steering_vector(&cfg, FRAC_PI_2, ArrayKind::Transmit).unwrap();
        assert_eq!(a.entries()[0], C64::new(1.0, 0.0));
        assert!((a.entries()[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn second_element_phase_at_32_degrees() {
        let a = steering_vector(&ula16(), 32f64.to_radians(), ArrayKind::Transmit).unwrap();
        // pi * sin(32 deg), evaluated at 40 digits
        assert!((a.entries()[1].arg() - 1.664_790_467_510_745_2).abs() < 1e-14);
    }

    #[test]
    fn receive_vector_uses_receive_geometry() {
        let cfg = ArrayConfig::new(4, 3, 0.5, 1.0).unwrap();
        let b = steering_vector(&cfg, 0.3, ArrayKind::Receive).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.kind(), ArrayKind::Receive);
        let expected = 2.0 * PI * libm::sin(0.3);
        assert!((b.entries()[1] - C64::from_polar(1.0, expected)).norm() < 1e-14);
    }

    #[test]
    fn rejects_out_of_domain_angles() {
        let cfg = ula16();
        assert!(matches!(
            steering_vector(&cfg, 1.6, ArrayKind::Transmit),
            Err(Error::AngleDomain { .. })
        ));
        assert!(steering_vector(&cfg, f64::NAN, ArrayKind::Transmit).is_err());
        assert!(beampattern(&cfg, 0.0, -2.0).is_err());
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(ArrayConfig::new(1, 1, 0.5, 0.5).is_err());
        assert!(ArrayConfig::new(2, 0, 0.5, 0.5).is_err());
        assert!(ArrayConfig::new(2, 1, 0.0, 0.5).is_err());
        assert!(ArrayConfig::new(2, 1, 0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn self_beampattern_is_exactly_one() {
        let cfg = ula16();
        for deg in [-90.0, -33.3, 0.0, 12.5, 90.0] {
            let th = f64::to_radians(deg);
            assert_eq!(beampattern(&cfg, th, th).unwrap(), C64::new(1.0, 0.0));
            assert_eq!(gain(&cfg, th, th).unwrap(), 1.0);
        }
    }

    #[test]
    fn first_null_of_sixteen_elements() {
        let cfg = ula16();
        let theta_c = libm::asin(1.0 / 8.0);
        assert!(beampattern(&cfg, 0.0, theta_c).unwrap().norm() < 1e-14);
        assert!(gain(&cfg, 0.0, theta_c).unwrap() < 1e-14);
    }

    #[test]
    fn gain_at_32_degrees_matches_dirichlet_kernel() {
        // |sin(N x) / (N sin x)| with x = pi/2 sin(32 deg), 40-digit reference
        let g = gain(&ula16(), 0.0, 32f64.to_radians()).unwrap();
        assert!((g - 0.057_726_867_342_938_45).abs() < 1e-14);
    }
}
