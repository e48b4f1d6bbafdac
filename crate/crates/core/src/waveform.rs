//! Optimal transmit waveform under a communication equality constraint.
//!
//! The problem is
//!
//! ```text
//! maximize   a†(theta_t) S S† a(theta_t)
//! subject to a†(theta_c) S = d_cᵀ,   tr(S S†) <= e_t
//! ```
//!
//! Writing `S = Ŝ + B V` with `Ŝ = a(theta_c) d_cᵀ / N_T` and `B` an
//! orthonormal basis of the null space of `a†(theta_c)` removes the
//! equality constraint and leaves a ball of radius `sqrt(ê_t)` for `V`,
//! where `ê_t = e_t - ||d_c||² / N_T`. The maximizer is rank one,
//! `S = w d_cᵀ` with `w = alpha1 a(theta_c) + alpha2 a(theta_t)`.
//!
//! [`design_optimal_waveform`] evaluates the rank-one closed form directly;
//! [`design_via_nullspace`] goes through `B` and `V` explicitly and serves as
//! an independent cross-check.

use alloc::vec::Vec;

use crate::array::{self, check_angle, steering_vector, ArrayConfig, ArrayKind, SteeringVector};
use crate::error::{Error, Result};
use crate::linalg::{self, householder_completion, CMatrix};
use crate::C64;

/// Gains below this are treated as an exact pattern null (`q = 0`), gains
/// within this of one as a communication receiver co-located with the target.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// One problem instance: geometry, directions, symbols and energy budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    array: ArrayConfig,
    theta_t: f64,
    theta_c: f64,
    d_c: Vec<C64>,
    e_t: f64,
    sigma2: f64,
}

impl Scenario {
    /// The code length `L` is the length of `d_c`.
    pub fn new(
        array: ArrayConfig,
        theta_t: f64,
        theta_c: f64,
        d_c: Vec<C64>,
        e_t: f64,
        sigma2: f64,
    ) -> Result<Self> {
        check_angle(theta_t)?;
        check_angle(theta_c)?;
        if d_c.is_empty() {
            return Err(Error::InvalidScenario("code length must be positive"));
        }
        if d_c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidScenario("communication symbols must be finite"));
        }
        if !(e_t.is_finite() && e_t > 0.0) {
            return Err(Error::InvalidScenario("transmit energy must be finite and positive"));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidScenario("noise variance must be finite and positive"));
        }
        Ok(Self { array, theta_t, theta_c, d_c, e_t, sigma2 })
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn theta_t(&self) -> f64 {
        self.theta_t
    }

    pub fn theta_c(&self) -> f64 {
        self.theta_c
    }

    pub fn d_c(&self) -> &[C64] {
        &self.d_c
    }

    pub fn code_length(&self) -> usize {
        self.d_c.len()
    }

    pub fn e_t(&self) -> f64 {
        self.e_t
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `||d_c||²`.
    pub fn comm_energy(&self) -> f64 {
        linalg::norm_sqr(&self.d_c)
    }

    pub fn with_theta_c(&self, theta_c: f64) -> Result<Self> {
        check_angle(theta_c)?;
        Ok(Self { theta_c, ..self.clone() })
    }

    pub fn with_energy(&self, e_t: f64) -> Result<Self> {
        Self::new(self.array, self.theta_t, self.theta_c, self.d_c.clone(), e_t, self.sigma2)
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.array, self.theta_t, self.theta_c, self.d_c.clone(), self.e_t, sigma2)
    }

    /// Transmit steering vector toward the target.
    pub fn target_steering(&self) -> SteeringVector {
        steering_vector(&self.array, self.theta_t, ArrayKind::Transmit).expect("angle validated")
    }

    /// Transmit steering vector toward the communication receiver.
    pub fn comm_steering(&self) -> SteeringVector {
        steering_vector(&self.array, self.theta_c, ArrayKind::Transmit).expect("angle validated")
    }

    /// Receive steering vector toward the target.
    pub fn receive_steering(&self) -> SteeringVector {
        steering_vector(&self.array, self.theta_t, ArrayKind::Receive).expect("angle validated")
    }

    /// `B(theta_t, theta_c)`.
    pub fn beampattern(&self) -> C64 {
        array::beampattern(&self.array, self.theta_t, self.theta_c).expect("angles validated")
    }

    /// `G = |B(theta_t, theta_c)|`.
    pub fn gain(&self) -> f64 {
        self.beampattern().norm().min(1.0)
    }
}

/// Transmit code matrix, `N_T × L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix {
    entries: CMatrix,
    energy: f64,
}

impl WaveformMatrix {
    pub fn new(entries: CMatrix) -> Self {
        let energy = entries.frobenius_norm_sqr();
        Self { entries, energy }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `tr(S S†)`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn n_tx(&self) -> usize {
        self.entries.rows()
    }

    pub fn code_length(&self) -> usize {
        self.entries.cols()
    }

    /// `a† S S† a`.
    pub fn projected_power(&self, a: &SteeringVector) -> Result<f64> {
        Ok(linalg::norm_sqr(&self.entries.left_project(a.entries())?))
    }
}

/// Orthonormal basis of the null space of `a†(theta_c)`, `N_T × (N_T - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceBasis {
    entries: CMatrix,
}

impl NullSpaceBasis {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Builds the basis by one Householder reflection that maps `a_c` onto the
/// first coordinate axis; the remaining columns of the reflector span the
/// orthogonal complement. Deterministic for a given input.
pub fn null_space_basis(a_c: &SteeringVector) -> Result<NullSpaceBasis> {
    let n = a_c.len();
    if n < 2 {
        return Err(Error::EmptyNullSpace(n));
    }
    let h = householder_completion(a_c.entries())?;
    let entries = CMatrix::from_fn(n, n - 1, |r, c| h[(r, c + 1)]);
    Ok(NullSpaceBasis { entries })
}

/// `ê_t = e_t - ||d_c||² / N_T`. Negative means infeasible.
pub fn residual_energy(scenario: &Scenario) -> f64 {
    scenario.e_t - scenario.comm_energy() / scenario.array.n_tx() as f64
}

/// Which branch of the closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateCase {
    Generic,
    /// The receiver sits on a pattern null of the target beam (`q = 0`).
    CommAtNull,
    /// The receiver and the target have identical transmit responses.
    CommEqualsTarget,
}

impl DegenerateCase {
    pub fn classify(gain: f64) -> Self {
        if 1.0 - gain < DEGENERACY_TOL {
            DegenerateCase::CommEqualsTarget
        } else if gain < DEGENERACY_TOL {
            DegenerateCase::CommAtNull
        } else {
            DegenerateCase::Generic
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub waveform: WaveformMatrix,
    /// Beamformer `w`, with `S = w d_cᵀ`.
    pub w: Vec<C64>,
    pub alpha1: C64,
    pub alpha2: C64,
    /// `a†(theta_t) S S† a(theta_t)`.
    pub achieved_snr_factor: f64,
    /// `ê_t`.
    pub residual_energy: f64,
    pub gain: f64,
    pub degenerate_case: DegenerateCase,
    /// Energy left unspent; nonzero only when the receiver coincides with
    /// the target and null-space energy cannot reach it.
    pub unused_energy: f64,
}

fn check_design_inputs(scenario: &Scenario) -> Result<f64> {
    let e_hat = residual_energy(scenario);
    if e_hat < 0.0 {
        return Err(Error::Infeasible { deficit: -e_hat });
    }
    if scenario.comm_energy() == 0.0 {
        return Err(Error::ZeroCommSignal);
    }
    Ok(e_hat)
}

/// Closed-form maximizer `S = w d_cᵀ`.
///
/// On a pattern null the free unit vector of the reduced problem is taken
/// as `conj(d_c)/||d_c||`, which keeps `S` rank one; when the receiver
/// coincides with the target the minimum-energy waveform `Ŝ` is returned.
pub fn design_optimal_waveform(scenario: &Scenario) -> Result<DesignResult> {
    let e_hat = check_design_inputs(scenario)?;
    let n = scenario.array.n_tx() as f64;
    let a_t = scenario.target_steering();
    let a_c = scenario.comm_steering();
    let bp = scenario.beampattern();
    let g = bp.norm().min(1.0);
    let d_norm = linalg::norm(&scenario.d_c);
    let case = DegenerateCase::classify(g);

    let (alpha1, alpha2, unused) = match case {
        DegenerateCase::CommEqualsTarget => (C64::new(1.0 / n, 0.0), C64::new(0.0, 0.0), e_hat),
        DegenerateCase::CommAtNull | DegenerateCase::Generic => {
            // ||u|| = ||B B† a_t|| = ||a_t - B(theta_t, theta_c) a_c||
            let u_norm = linalg::norm(
                &a_t.entries().iter().zip(a_c.entries()).map(|(t, c)| t - bp * c).collect::<Vec<_>>(),
            );
            let scale = libm::sqrt(e_hat) / (u_norm * d_norm);
            if case == DegenerateCase::Generic {
                // ||q|| = G ||d_c||
                let k = scale / g;
                (C64::new(1.0 / n - k * g * g, 0.0), bp.conj() * k, 0.0)
            } else {
                (C64::new(1.0 / n, 0.0) - bp * scale, C64::new(scale, 0.0), 0.0)
            }
        }
    };

    let w: Vec<C64> = a_c
        .entries()
        .iter()
        .zip(a_t.entries())
        .map(|(c, t)| alpha1 * c + alpha2 * t)
        .collect();
    let waveform = WaveformMatrix::new(CMatrix::outer(&w, &scenario.d_c));
    let achieved_snr_factor = waveform.projected_power(&a_t)?;

    Ok(DesignResult {
        waveform,
        w,
        alpha1,
        alpha2,
        achieved_snr_factor,
        residual_energy: e_hat,
        gain: g,
        degenerate_case: case,
        unused_energy: unused,
    })
}

/// The reduced, equality-free problem in `V`:
/// maximize `||q + V† u||²` subject to `tr(V V†) <= ê_t`.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    /// `Ŝ = a(theta_c) d_cᵀ / N_T`.
    pub s_hat: CMatrix,
    pub basis: NullSpaceBasis,
    /// `q = Ŝ† a(theta_t)`, length `L`.
    pub q: Vec<C64>,
    /// `u = B† a(theta_t)`, length `N_T - 1`.
    pub u: Vec<C64>,
    pub residual_energy: f64,
    pub gain: f64,
    pub degenerate_case: DegenerateCase,
}

impl ReducedProblem {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let e_hat = check_design_inputs(scenario)?;
        let n = scenario.array.n_tx() as f64;
        let a_t = scenario.target_steering();
        let a_c = scenario.comm_steering();

        let s_hat = CMatrix::from_fn(a_c.len(), scenario.code_length(), |r, c| {
            a_c.entries()[r] * scenario.d_c[c] / n
        });
        let basis = null_space_basis(&a_c)?;
        let q = s_hat.adjoint_mul_vec(a_t.entries())?;
        let u = basis.entries.adjoint_mul_vec(a_t.entries())?;
        let gain = scenario.gain();

        Ok(Self {
            s_hat,
            basis,
            q,
            u,
            residual_energy: e_hat,
            gain,
            degenerate_case: DegenerateCase::classify(gain),
        })
    }

    /// Shape of `V`: `(N_T - 1) × L`.
    pub fn v_shape(&self) -> (usize, usize) {
        (self.u.len(), self.q.len())
    }

    /// `f(V) = ||q + V† u||²`.
    pub fn objective(&self, v: &CMatrix) -> f64 {
        let vu = v.adjoint_mul_vec(&self.u).expect("V has the reduced shape");
        self.q.iter().zip(&vu).map(|(a, b)| (a + b).norm_sqr()).sum()
    }

    /// Gradient of `f` with respect to the real and imaginary parts of `V`,
    /// packed as a complex matrix: `2 u u† V + 2 u q†`.
    pub fn gradient(&self, v: &CMatrix) -> CMatrix {
        let vu = v.adjoint_mul_vec(&self.u).expect("V has the reduced shape");
        // 2 u (V† u + q)†
        let r: Vec<C64> = self.q.iter().zip(&vu).map(|(a, b)| a + b).collect();
        CMatrix::from_fn(self.u.len(), r.len(), |i, j| self.u[i] * r[j].conj() * 2.0)
    }

    /// `S = Ŝ + B V`.
    pub fn waveform_from(&self, v: &CMatrix) -> Result<WaveformMatrix> {
        let bv = self.basis.entries.matmul(v)?;
        Ok(WaveformMatrix::new(&self.s_hat + &bv))
    }

    /// Maximizer of the reduced problem: `sqrt(ê_t) ū q̄†`, or
    /// `sqrt(ê_t) ū x†` with `x = conj(d_c)/||d_c||` on a pattern null, or
    /// zero when `u` vanishes.
    pub fn optimal_v(&self, d_c: &[C64]) -> CMatrix {
        let (rows, cols) = self.v_shape();
        let u_norm = linalg::norm(&self.u);
        let direction: Vec<C64> = match self.degenerate_case {
            DegenerateCase::CommEqualsTarget => return CMatrix::zeros(rows, cols),
            DegenerateCase::Generic => {
                let q_norm = linalg::norm(&self.q);
                self.q.iter().map(|z| z / q_norm).collect()
            }
            DegenerateCase::CommAtNull => {
                let d_norm = linalg::norm(d_c);
                d_c.iter().map(|z| z.conj() / d_norm).collect()
            }
        };
        let scale = libm::sqrt(self.residual_energy) / u_norm;
        CMatrix::from_fn(rows, cols, |i, j| self.u[i] * direction[j].conj() * scale)
    }
}

/// Optimal waveform assembled as `Ŝ + B V*` through an explicit null-space
/// basis.
pub fn design_via_nullspace(scenario: &Scenario) -> Result<WaveformMatrix> {
    let problem = ReducedProblem::new(scenario)?;
    let v = problem.optimal_v(&scenario.d_c);
    problem.waveform_from(&v)
}

/// Signal seen by the communication receiver, `a†(theta_c) S`.
pub fn synthesize_comm_signal(waveform: &WaveformMatrix, a_c: &SteeringVector) -> Result<Vec<C64>> {
    waveform.entries.left_project(a_c.entries())
}
