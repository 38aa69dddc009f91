//! Numerical solution of the dephasing master equation
//! `dρ/dt = −i[H, ρ] − (γ/2)[H, [H, ρ]]`.
//!
//! The spectral path is exact for the time-independent Hamiltonian: in the
//! eigenbasis of `H` each element evolves as
//! `ρ_mn(t) = ρ_mn(0) exp(−i ω_mn t − (γ/2) ω_mn² t)` with `ω_mn = E_m − E_n`.
//! The RK4 path integrates the right-hand side directly and exists to catch
//! mistakes in the spectral path.

use crate::analytic::TwoQubitState;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, partial_trace, ComplexMatrix, C64};
use crate::metrics::wootters_concurrence;
use crate::model::{hamiltonian, initial_state, leakage, SystemParams};

/// Default RK4 step in units of `1/Ω` (unscaled time).
pub const DEFAULT_RK4_STEP_OMEGA: f64 = 0.005;
/// Maximum discrepancy between a run and its step-halved rerun.
pub const STEP_HALVING_TOL: f64 = 1e-4;

pub const EVOLVED_HERMITIAN_TOL: f64 = 1e-10;
pub const EVOLVED_TRACE_TOL: f64 = 1e-9;
pub const EVOLVED_MIN_EIGENVALUE: f64 = -1e-8;

/// Precomputed eigendecomposition of `H` and the initial state in its eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    params: SystemParams,
    energies: Vec<f64>,
    basis: ComplexMatrix,
    rho0: ComplexMatrix,
}

impl SpectralPropagator {
    pub fn new(p: &SystemParams) -> Result<Self> {
        Self::with_initial_state(p, &initial_state(p))
    }

    pub fn with_initial_state(p: &SystemParams, rho0: &ComplexMatrix) -> Result<Self> {
        if rho0.dim() != p.full_dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has dim {}, model has {}",
                rho0.dim(),
                p.full_dim()
            )));
        }
        let eig = herm_eig(&hamiltonian(p))?;
        let rho0 = &(&eig.vectors.adjoint() * rho0) * &eig.vectors;
        Ok(Self { params: *p, energies: eig.values, basis: eig.vectors, rho0 })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Full-system state at scaled time `gt`.
    pub fn state_at(&self, gt: f64) -> Result<ComplexMatrix> {
        if !(gt.is_finite() && gt >= 0.0) {
            return Err(Error::InvalidParameter(format!("scaled time must be non-negative, got {gt}")));
        }
        let t = self.params.time(gt);
        let gamma = self.params.gamma();
        let n = self.energies.len();
        let mut m = self.rho0.clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.energies[i] - self.energies[j];
                let factor = C64::from_polar((-0.5 * gamma * w * w * t).exp(), -w * t);
                m[(i, j)] *= factor;
            }
        }
        Ok(&(&self.basis * &m) * &self.basis.adjoint())
    }

    /// State at `gt` expressed in the eigenbasis of `H`.
    pub fn eigenbasis_state_at(&self, gt: f64) -> Result<ComplexMatrix> {
        let rho = self.state_at(gt)?;
        Ok(&(&self.basis.adjoint() * &rho) * &self.basis)
    }
}

/// Exact (spectral) solution at scaled time `gt`.
pub fn evolve_spectral(p: &SystemParams, gt: f64) -> Result<ComplexMatrix> {
    SpectralPropagator::new(p)?.state_at(gt)
}

/// Right-hand side of the master equation.
pub fn master_rhs(h: &ComplexMatrix, gamma: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    let comm = &(h * rho) - &(rho * h);
    let mut out = comm.scale(C64::new(0.0, -1.0));
    if gamma != 0.0 {
        let double = &(h * &comm) - &(&comm * h);
        out = &out - &double.scale_real(0.5 * gamma);
    }
    out
}

fn rk4_step(h: &ComplexMatrix, gamma: f64, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let k1 = master_rhs(h, gamma, rho);
    let k2 = master_rhs(h, gamma, &(rho + &k1.scale_real(dt / 2.0)));
    let k3 = master_rhs(h, gamma, &(rho + &k2.scale_real(dt / 2.0)));
    let k4 = master_rhs(h, gamma, &(rho + &k3.scale_real(dt)));
    let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
    rho + &incr.scale_real(dt / 6.0)
}

/// Integrates over unscaled duration `t` with the largest uniform step not
/// exceeding `dt`.
fn integrate(h: &ComplexMatrix, gamma: f64, rho0: &ComplexMatrix, t: f64, dt: f64) -> ComplexMatrix {
    let steps = ((t / dt) - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return rho0.clone();
    }
    let step = t / steps as f64;
    let mut rho = rho0.clone();
    for _ in 0..steps {
        rho = rk4_step(h, gamma, &rho, step);
    }
    rho
}

fn check_step(gt: f64, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {dt}")));
    }
    if !(gt.is_finite() && gt >= 0.0) {
        return Err(Error::InvalidParameter(format!("scaled time must be non-negative, got {gt}")));
    }
    Ok(())
}

/// Fixed-step RK4 from an arbitrary initial state, without the step-halving
/// check. `dt` is in unscaled time.
pub fn rk4_integrate_from(p: &SystemParams, rho0: &ComplexMatrix, gt: f64, dt: f64) -> Result<ComplexMatrix> {
    check_step(gt, dt)?;
    Ok(integrate(&hamiltonian(p), p.gamma(), rho0, p.time(gt), dt))
}

/// Fixed-step RK4 from the model's initial state, verified against a rerun
/// at half the step. `dt` is in unscaled time.
pub fn evolve_rk4(p: &SystemParams, gt: f64, dt: f64) -> Result<ComplexMatrix> {
    check_step(gt, dt)?;
    let h = hamiltonian(p);
    let rho0 = initial_state(p);
    let t = p.time(gt);
    let coarse = integrate(&h, p.gamma(), &rho0, t, dt);
    let fine = integrate(&h, p.gamma(), &rho0, t, dt / 2.0);
    let discrepancy = coarse.max_abs_diff(&fine);
    if discrepancy > STEP_HALVING_TOL {
        return Err(Error::StepTooLarge(discrepancy));
    }
    Ok(coarse)
}

/// Default RK4 step for `p`, `0.005/Ω`.
pub fn default_rk4_step(p: &SystemParams) -> f64 {
    DEFAULT_RK4_STEP_OMEGA / p.omega()
}

/// Two-atom state obtained by tracing out the cavity.
pub fn reduce_to_atoms(p: &SystemParams, rho: &ComplexMatrix) -> Result<TwoQubitState> {
    let reduced = partial_trace(rho, &[p.n_max() + 1, 2, 2], &[1, 2])?;
    TwoQubitState::new(reduced)
}

/// Wootters concurrence of the cavity-traced spectral solution.
pub fn dephased_concurrence_oracle(p: &SystemParams, gt: f64) -> Result<f64> {
    wootters_concurrence(&reduce_to_atoms(p, &evolve_spectral(p, gt)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Spectral,
    /// RK4 with the given unscaled step.
    Rk4 { dt: f64 },
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    /// Largest population found outside the single-excitation sector.
    pub leakage: f64,
}

impl EvolutionResult {
    /// Checks Hermiticity, unit trace and positivity of every state.
    pub fn check_invariants(&self) -> Result<()> {
        for (gt, rho) in self.times.iter().zip(&self.states) {
            check_density(rho).map_err(|e| Error::InvalidState(format!("at gt = {gt}: {e}")))?;
        }
        Ok(())
    }
}

/// Validates a full-system density matrix against the evolution tolerances.
pub fn check_density(rho: &ComplexMatrix) -> Result<()> {
    let herm = rho.hermiticity_error();
    if herm > EVOLVED_HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("Hermiticity error {herm:e}")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > EVOLVED_TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let min_eig = *herm_eig(rho)?.values.last().unwrap();
    if min_eig < EVOLVED_MIN_EIGENVALUE {
        return Err(Error::InvalidState(format!("eigenvalue {min_eig:e}")));
    }
    Ok(())
}

/// Evolves the model's initial state to every scaled time in `times`
/// (strictly increasing) and validates the result.
pub fn evolve_grid(p: &SystemParams, times: &[f64], method: Method) -> Result<EvolutionResult> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidGrid("times must be non-negative and strictly increasing".into()));
    }
    let states = match method {
        Method::Spectral => {
            let prop = SpectralPropagator::new(p)?;
            times.iter().map(|&gt| prop.state_at(gt)).collect::<Result<Vec<_>>>()?
        }
        Method::Rk4 { dt } => rk4_grid(p, times, dt)?,
    };
    let leak = states.iter().map(leakage).fold(0.0, f64::max);
    let result = EvolutionResult { times: times.to_vec(), states, leakage: leak };
    result.check_invariants()?;
    Ok(result)
}

/// RK4 states at every scaled time in `times`, integrating sequentially.
pub fn rk4_grid(p: &SystemParams, times: &[f64], dt: f64) -> Result<Vec<ComplexMatrix>> {
    check_step(0.0, dt)?;
    let h = hamiltonian(p);
    let mut rho = initial_state(p);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &gt in times {
        let t = p.time(gt);
        rho = integrate(&h, p.gamma(), &rho, t - now, dt);
        now = t;
        out.push(rho.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{concurrence_closed, concurrence_dephased, rho_full_analytic, stationary_concurrence};
    use crate::model::{excitation_number, full_index, GG};

    #[test]
    fn spectral_matches_analytic_without_dephasing() {
        for (delta, lambda) in [(0.0, 1.0), (0.5, 0.6), (-2.0, 0.9), (5.0, 1.0)] {
            let p = SystemParams::scaled(delta, lambda, 0.0).unwrap();
            let prop = SpectralPropagator::new(&p).unwrap();
            for gt in [0.0, 0.5, 7.3, 120.0, 499.9] {
                let numeric = prop.state_at(gt).unwrap();
                let exact = rho_full_analytic(&p, gt).unwrap();
                assert!(numeric.max_abs_diff(&exact) < 1e-8);
            }
        }
    }

    #[test]
    fn spectral_at_zero_is_initial_state() {
        let p = SystemParams::scaled(0.3, 0.8, 0.05).unwrap();
        let rho = evolve_spectral(&p, 0.0).unwrap();
        assert!(rho.max_abs_diff(&initial_state(&p)) < 1e-15);
    }

    #[test]
    fn eigenbasis_populations_are_constant_under_dephasing() {
        let p = SystemParams::scaled(0.5, 1.0, 0.2).unwrap();
        let prop = SpectralPropagator::new(&p).unwrap();
        let d0 = prop.eigenbasis_state_at(0.0).unwrap().diag();
        for gt in [1.0, 10.0, 100.0] {
            let d = prop.eigenbasis_state_at(gt).unwrap().diag();
            for (a, b) in d0.iter().zip(&d) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn excitation_number_is_conserved() {
        let p = SystemParams::scaled(0.5, 0.7, 0.05).unwrap();
        let n = excitation_number(&p);
        let prop = SpectralPropagator::new(&p).unwrap();
        for gt in [0.0, 3.0, 30.0, 300.0] {
            let mean = (&n * &prop.state_at(gt).unwrap()).trace().re;
            assert!((mean - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn larger_cutoff_never_populates_extra_levels() {
        let p = SystemParams::scaled(0.5, 1.0, 0.01).unwrap().with_n_max(3).unwrap();
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 1.7).collect();
        let res = evolve_grid(&p, &times, Method::Spectral).unwrap();
        assert!(res.leakage <= 1e-12);
        let p1 = p.with_n_max(1).unwrap();
        for (&gt, rho) in times.iter().zip(&res.states) {
            let c3 = wootters_concurrence(&reduce_to_atoms(&p, rho).unwrap()).unwrap();
            let c1 = dephased_concurrence_oracle(&p1, gt).unwrap();
            assert!((c3 - c1).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_reproduces_resonant_concurrence() {
        let p = SystemParams::scaled(0.0, 1.0, 0.0).unwrap();
        let dt = 0.01 / p.omega();
        let times: Vec<f64> = (1..=20).map(|i| i as f64 * std::f64::consts::PI / p.omega() / 4.0).collect();
        let states = rk4_grid(&p, &times, dt).unwrap();
        for (&gt, rho) in times.iter().zip(&states) {
            let c = wootters_concurrence(&reduce_to_atoms(&p, rho).unwrap()).unwrap();
            let wt = p.omega() * p.time(gt);
            assert!((c - (1.0 - wt.cos()) / 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_keeps_stationary_state() {
        let p = SystemParams::scaled(0.8, 1.0, 0.3).unwrap();
        let mut rho0 = ComplexMatrix::zeros(p.full_dim());
        rho0[(full_index(0, GG), full_index(0, GG))] = C64::new(1.0, 0.0);
        let rho = rk4_integrate_from(&p, &rho0, 25.0, 0.01).unwrap();
        assert!(rho.max_abs_diff(&rho0) < 1e-15);
    }

    #[test]
    fn rk4_agrees_with_spectral() {
        let p = SystemParams::scaled(0.5, 1.0, 0.01).unwrap();
        let dt = default_rk4_step(&p);
        let numeric = evolve_rk4(&p, 40.0, dt).unwrap();
        let exact = evolve_spectral(&p, 40.0).unwrap();
        assert!(numeric.max_abs_diff(&exact) < 1e-6);
    }

    #[test]
    fn rk4_rejects_oversized_steps() {
        let p = SystemParams::scaled(0.5, 1.0, 0.0).unwrap();
        assert!(matches!(evolve_rk4(&p, 20.0, 2.0 / p.omega()), Err(Error::StepTooLarge(_))));
        assert!(evolve_rk4(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn dephased_oracle_matches_closed_form() {
        for delta in [0.0, 0.5, 1.0] {
            for gamma in [0.0, 0.01] {
                let p = SystemParams::scaled(delta, 1.0, gamma).unwrap();
                for gt in [0.0, 1.1, 42.0, 250.0, 500.0] {
                    let oracle = dephased_concurrence_oracle(&p, gt).unwrap();
                    assert!((oracle - concurrence_dephased(&p, gt).unwrap()).abs() < 1e-6);
                    if gamma == 0.0 {
                        assert!((oracle - concurrence_closed(&p, gt).unwrap()).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn strong_dephasing_reaches_stationary_value() {
        let p = SystemParams::scaled(0.5, 1.0, 1.0).unwrap();
        let c = dephased_concurrence_oracle(&p, 500.0).unwrap();
        assert!((c - stationary_concurrence(&p).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn grid_validation() {
        let p = SystemParams::scaled(0.5, 1.0, 0.0).unwrap();
        assert!(evolve_grid(&p, &[1.0, 0.5], Method::Spectral).is_err());
        assert!(evolve_grid(&p, &[-1.0, 0.5], Method::Spectral).is_err());
    }
}
